#include "tsc/traffic/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tsc/error.hpp"

namespace tsc::traffic {
namespace {

constexpr double kMinGap = 1e-3;
constexpr double kEps = 1e-9;

}  // namespace

std::pair<double, double> queue_geometry(std::span<const VehicleSnapshot> vehicles, double lane_length) {
  double tail = lane_length;
  for (const auto& v : vehicles) {
    if (v.stopped) tail = std::min(tail, v.x - v.length);
  }
  double distance = lane_length;
  for (const auto& v : vehicles) {
    if (v.stopped || v.x > tail) continue;
    distance = std::clamp(tail - v.x, 0.0, lane_length);
    break;  // stop line first, so the first qualifying mover is the foremost
  }
  return {tail, distance};
}

Simulation::Simulation(std::shared_ptr<const RoadNetwork> network, SimConfig config)
    : network_(std::move(network)), config_(config) {
  if (!network_) throw ValidationError("simulation needs a network");
  if (!(config_.dt > 0.0)) throw ValidationError("sub-step dt must be positive");
  if (!(config_.decision_interval >= config_.dt)) {
    throw ValidationError("decision interval must be at least one sub-step");
  }
  if (config_.yellow_duration < 0.0 || config_.yellow_duration > config_.decision_interval) {
    throw ValidationError("yellow duration must lie in [0, decision interval]");
  }
  const auto& net = *network_;
  lane_control_.assign(net.lanes().size(), LaneControl{});
  for (int i = 0; i < net.num_intersections(); ++i) {
    const auto& node = net.intersection(i);
    for (int slot = 0; slot < kLanesPerIntersection; ++slot) {
      lane_control_[node.incoming_lanes[slot]] = {i, slot};
    }
  }
  signals_.assign(net.num_intersections(), SignalState{});
  lane_queue_.assign(net.lanes().size(), {});
  joined_.assign(net.lanes().size(), 0);
  left_.assign(net.lanes().size(), 0);
  entered_.assign(net.lanes().size(), 0);
  departed_.assign(net.lanes().size(), 0);
  dwell_sum_.assign(net.num_intersections(), 0.0);
  dwell_count_.assign(net.num_intersections(), 0);
}

void Simulation::reset(std::vector<ScheduledVehicle> schedule) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    try {
      network_->validate_route(schedule[i].route);
      schedule[i].idm.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("flow entry " + std::to_string(i) + ": " + e.what());
    }
  }
  schedule_ = std::move(schedule);
  if (config_.spawn_jitter > 0.0) {
    std::mt19937_64 rng(config_.seed);
    for (auto& entry : schedule_) {
      std::uniform_real_distribution<double> jitter(0.0, config_.spawn_jitter);
      entry.start_time += jitter(rng);
    }
  }
  release_order_.resize(schedule_.size());
  std::iota(release_order_.begin(), release_order_.end(), 0);
  std::stable_sort(release_order_.begin(), release_order_.end(),
                   [&](int a, int b) { return schedule_[a].start_time < schedule_[b].start_time; });
  next_release_ = 0;
  pending_.assign(network_->lanes().size(), {});
  pending_lanes_.clear();

  vehicles_.clear();
  stopped_lane_.clear();
  accel_.clear();
  for (auto& q : lane_queue_) q.clear();
  for (auto& s : signals_) s = SignalState{};
  std::fill(dwell_sum_.begin(), dwell_sum_.end(), 0.0);
  std::fill(dwell_count_.begin(), dwell_count_.end(), 0);
  arrived_ = 0;
  clock_ = 0.0;
  reset_interval_counters();
  spawn_from_flow();
}

void Simulation::reset_interval_counters() {
  std::fill(joined_.begin(), joined_.end(), 0);
  std::fill(left_.begin(), left_.end(), 0);
  std::fill(entered_.begin(), entered_.end(), 0);
  std::fill(departed_.begin(), departed_.end(), 0);
}

void Simulation::set_phase(int intersection, int phase) {
  if (phase < 0 || phase >= kNumPhases) {
    throw ValidationError("phase id must be in 0..7, got " + std::to_string(phase));
  }
  SignalState& s = signals_.at(intersection);
  const bool was_all_red = s.all_red;
  s.all_red = false;
  if (phase == s.phase && !was_all_red) return;
  const auto& phases = standard_phases();
  if (s.phase == kNoPhase || config_.yellow_duration <= 0.0) {
    s.yellow_remaining = 0.0;
  } else {
    const GreenMask previous = was_all_red ? GreenMask{0} : phases[s.phase].green;
    s.during_yellow = previous & phases[phase].green;
    s.yellow_remaining = was_all_red ? 0.0 : config_.yellow_duration;
  }
  s.phase = phase;
}

void Simulation::set_all_red(int intersection) {
  SignalState& s = signals_.at(intersection);
  s.all_red = true;
  s.yellow_remaining = 0.0;
}

GreenMask Simulation::green_mask(int intersection) const {
  const SignalState& s = signals_.at(intersection);
  if (s.all_red) return 0;
  if (s.yellow_remaining > kEps) return s.during_yellow;
  if (s.phase == kNoPhase) return kRightTurnMask;
  return standard_phases()[s.phase].green;
}

bool Simulation::lane_green(int lane) const {
  const LaneControl& c = lane_control_[lane];
  if (c.intersection < 0) return true;
  return (green_mask(c.intersection) >> c.slot) & 1u;
}

int Simulation::target_lane(const Vehicle& veh) const {
  const int next = veh.route[veh.leg + 1];
  const int after = veh.leg + 2 < veh.route.size() ? veh.route[veh.leg + 2] : kBoundary;
  return network_->lane_for(next, after);
}

IdmParams Simulation::effective_params(const Vehicle& veh) const {
  IdmParams p = veh.idm;
  p.v0 = std::min(p.v0, network_->lane(veh.lane).speed_limit);
  return p;
}

Simulation::Obstacle Simulation::head_obstacle(const Vehicle& veh) const {
  Obstacle ob;
  const double length = network_->lane(veh.lane).length;
  if (veh.leg + 1 >= veh.route.size()) return ob;  // route ends here: free exit
  if (!lane_green(veh.lane)) {
    ob.present = true;
    ob.stationary = true;
    ob.gap = length - veh.x;
    return ob;
  }
  const auto& q = lane_queue_[target_lane(veh)];
  if (q.empty()) return ob;
  const Vehicle& tail = vehicles_[q.back()];
  ob.present = true;
  ob.gap = (length - veh.x) + (tail.x - tail.idm.length);
  ob.speed = tail.v;
  ob.stationary = tail.v < config_.stop_speed;
  return ob;
}

void Simulation::step(double dt) {
  if (!(dt > 0.0)) throw ValidationError("step dt must be positive");
  const auto& net = *network_;
  accel_.assign(vehicles_.size(), 0.0);

  for (std::size_t lane = 0; lane < lane_queue_.size(); ++lane) {
    const auto& q = lane_queue_[lane];
    for (std::size_t k = 0; k < q.size(); ++k) {
      const Vehicle& veh = vehicles_[q[k]];
      std::optional<Leader> leader;
      bool leader_stationary = false;
      if (k > 0) {
        const Vehicle& lead = vehicles_[q[k - 1]];
        leader = Leader{std::max(lead.x - lead.idm.length - veh.x, kMinGap), lead.v};
        leader_stationary = lead.v < config_.stop_speed;
      } else {
        const Obstacle ob = head_obstacle(veh);
        if (ob.present) {
          leader = Leader{std::max(ob.gap, kMinGap), ob.speed};
          leader_stationary = ob.stationary;
        }
      }
      const IdmParams params = effective_params(veh);
      double a = idm_accel(veh.v, leader, params);
      // A vehicle at rest does not creep up on a close leader that is itself at rest.
      if (veh.stopped && leader && leader_stationary && leader->gap < params.s0 + params.length) a = std::min(a, 0.0);
      accel_[q[k]] = a;
    }
  }

  for (std::size_t lane = 0; lane < lane_queue_.size(); ++lane) {
    const auto& q = lane_queue_[lane];
    const Lane& info = net.lane(static_cast<int>(lane));
    for (std::size_t k = 0; k < q.size(); ++k) {
      Vehicle& veh = vehicles_[q[k]];
      double v_new = std::clamp(veh.v + accel_[q[k]] * dt, 0.0, info.speed_limit);
      double x_new = veh.x + v_new * dt;
      double limit = std::numeric_limits<double>::infinity();
      if (k > 0) {
        const Vehicle& lead = vehicles_[q[k - 1]];
        limit = lead.x - lead.idm.length;
      } else if (veh.leg + 1 < veh.route.size()) {
        if (!lane_green(static_cast<int>(lane))) {
          limit = info.length;
        } else {
          const auto& target = lane_queue_[target_lane(veh)];
          if (!target.empty()) {
            const Vehicle& tail = vehicles_[target.back()];
            limit = info.length + tail.x - tail.idm.length;
          }
        }
      }
      if (x_new > limit) {
        x_new = std::max(veh.x, limit);
        v_new = (x_new - veh.x) / dt;
      }
      veh.x = x_new;
      veh.v = v_new;
    }
  }

  transfer_heads();

  for (auto& s : signals_) {
    if (s.yellow_remaining > 0.0) s.yellow_remaining = std::max(0.0, s.yellow_remaining - dt);
  }
  clock_ += dt;
  spawn_from_flow();
  update_queue_status();
}

void Simulation::transfer_heads() {
  const auto& net = *network_;
  const double now = clock_ + config_.dt;
  for (std::size_t lane = 0; lane < lane_queue_.size(); ++lane) {
    auto& q = lane_queue_[lane];
    const double length = net.lane(static_cast<int>(lane)).length;
    while (!q.empty()) {
      const int vid = q.front();
      Vehicle& veh = vehicles_[vid];
      if (veh.x <= length) break;
      if (veh.leg + 1 >= veh.route.size()) {
        q.pop_front();
        ++departed_[lane];
        veh.exit_time = now;
        exit_vehicle(vid);
        continue;
      }
      const int target = target_lane(veh);
      double overflow = veh.x - length;
      const auto& tq = lane_queue_[target];
      if (!tq.empty()) {
        const Vehicle& tail = vehicles_[tq.back()];
        overflow = std::min(overflow, tail.x - tail.idm.length);
      }
      if (overflow < 0.0) {
        veh.x = length;  // blocked: hold at the stop line
        veh.v = 0.0;
        break;
      }
      q.pop_front();
      ++departed_[lane];
      const int node = net.link(veh.route[veh.leg]).to;
      if (node != kBoundary) {
        dwell_sum_[node] += now - veh.leg_start;
        ++dwell_count_[node];
      }
      ++veh.leg;
      veh.leg_start = now;
      enter_lane(vid, target, overflow);
    }
  }
}

void Simulation::enter_lane(int vid, int lane, double x) {
  Vehicle& veh = vehicles_[vid];
  veh.lane = lane;
  veh.x = x;
  lane_queue_[lane].push_back(vid);
  ++entered_[lane];
}

void Simulation::exit_vehicle(int vid) {
  if (stopped_lane_[vid] >= 0) {
    ++left_[stopped_lane_[vid]];
    stopped_lane_[vid] = -1;
  }
  vehicles_[vid].stopped = false;
  ++arrived_;
}

void Simulation::update_queue_status() {
  for (std::size_t lane = 0; lane < lane_queue_.size(); ++lane) {
    for (int vid : lane_queue_[lane]) {
      Vehicle& veh = vehicles_[vid];
      const bool now_stopped = veh.v < config_.stop_speed;
      const int prev = stopped_lane_[vid];
      if (now_stopped) {
        if (prev != static_cast<int>(lane)) {
          if (prev >= 0) ++left_[prev];
          ++joined_[lane];
          stopped_lane_[vid] = static_cast<int>(lane);
        }
      } else if (prev >= 0) {
        ++left_[prev];
        stopped_lane_[vid] = -1;
      }
      veh.stopped = now_stopped;
    }
  }
}

int Simulation::spawn_from_flow() {
  while (next_release_ < release_order_.size() &&
         schedule_[release_order_[next_release_]].start_time <= clock_ + kEps) {
    const int idx = release_order_[next_release_++];
    const auto& entry = schedule_[idx];
    const int lane = network_->lane_for(entry.route[0], entry.route.size() > 1 ? entry.route[1] : kBoundary);
    if (pending_[lane].empty()) {
      pending_lanes_.insert(std::lower_bound(pending_lanes_.begin(), pending_lanes_.end(), lane), lane);
    }
    pending_[lane].push_back(idx);
  }

  int spawned = 0;
  for (std::size_t i = 0; i < pending_lanes_.size();) {
    const int lane = pending_lanes_[i];
    auto& waiting = pending_[lane];
    const Lane& info = network_->lane(lane);
    while (!waiting.empty()) {
      const auto& entry = schedule_[waiting.front()];
      const double v = std::min(entry.idm.v0, info.speed_limit);
      const auto& q = lane_queue_[lane];
      if (!q.empty()) {
        const Vehicle& tail = vehicles_[q.back()];
        if (tail.x - tail.idm.length < entry.idm.s0 + v * entry.idm.T) break;
      }
      Vehicle veh;
      veh.id = static_cast<int>(vehicles_.size());
      veh.schedule_index = waiting.front();
      veh.route = entry.route;
      veh.idm = entry.idm;
      veh.v = v;
      veh.entry_time = clock_;
      veh.leg_start = clock_;
      vehicles_.push_back(std::move(veh));
      stopped_lane_.push_back(-1);
      enter_lane(vehicles_.back().id, lane, 0.0);
      waiting.pop_front();
      ++spawned;
    }
    if (waiting.empty()) {
      pending_lanes_.erase(pending_lanes_.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return spawned;
}

int Simulation::place_vehicle(const std::vector<int>& route, std::size_t leg, double x, double v,
                              const IdmParams& idm) {
  network_->validate_route(route);
  if (leg >= route.size()) throw ValidationError("place_vehicle: leg out of range");
  const int lane = network_->lane_for(route[leg], leg + 1 < route.size() ? route[leg + 1] : kBoundary);
  const Lane& info = network_->lane(lane);
  if (x < 0.0 || x > info.length || v < 0.0 || v > info.speed_limit) {
    throw ValidationError("place_vehicle: position or speed outside lane bounds");
  }
  Vehicle veh;
  veh.id = static_cast<int>(vehicles_.size());
  veh.schedule_index = -1;
  veh.route = route;
  veh.leg = leg;
  veh.lane = lane;
  veh.x = x;
  veh.v = v;
  veh.idm = idm;
  veh.entry_time = clock_;
  veh.leg_start = clock_;
  veh.stopped = v < config_.stop_speed;
  auto& q = lane_queue_[lane];
  auto pos = std::find_if(q.begin(), q.end(), [&](int other) { return vehicles_[other].x < x; });
  q.insert(pos, veh.id);
  stopped_lane_.push_back(veh.stopped ? lane : -1);
  vehicles_.push_back(std::move(veh));
  return vehicles_.back().id;
}

std::vector<IntersectionMeasurement> Simulation::advance_decision_interval(std::span<const int> phases) {
  if (phases.size() != signals_.size()) {
    throw ValidationError("advance_decision_interval: expected " + std::to_string(signals_.size()) +
                          " phases, got " + std::to_string(phases.size()));
  }
  for (std::size_t i = 0; i < phases.size(); ++i) set_phase(static_cast<int>(i), phases[i]);
  reset_interval_counters();
  const int substeps = static_cast<int>(std::lround(config_.decision_interval / config_.dt));
  for (int k = 0; k < substeps; ++k) step(config_.dt);
  return measure_all();
}

LaneMeasurement Simulation::measure_lane(int lane) const {
  const Lane& info = network_->lane(lane);
  LaneMeasurement m;
  m.lane = lane;
  m.length = info.length;
  m.speed_limit = info.speed_limit;
  m.queue_joined = joined_[lane];
  m.queue_left = left_[lane];
  m.entered = entered_[lane];
  m.departed = departed_[lane];
  const auto& q = lane_queue_[lane];
  m.vehicles.reserve(q.size());
  for (int vid : q) {
    const Vehicle& veh = vehicles_[vid];
    const bool stopped = veh.v < config_.stop_speed;
    m.vehicles.push_back({veh.x, veh.v, veh.idm.length, stopped});
    (stopped ? m.stopped : m.moving) += 1;
  }
  std::tie(m.queue_tail, m.front_mover_distance) = queue_geometry(m.vehicles, m.length);
  return m;
}

IntersectionMeasurement Simulation::measure_intersection(int intersection) const {
  const auto& node = network_->intersection(intersection);
  IntersectionMeasurement m;
  m.intersection = intersection;
  m.phase = signals_.at(intersection).phase;
  m.in_yellow = in_yellow(intersection);
  for (int k = 0; k < kLanesPerIntersection; ++k) {
    m.incoming[k] = measure_lane(node.incoming_lanes[k]);
    m.outgoing[k] = measure_lane(node.outgoing_lanes[k]);
  }
  return m;
}

std::vector<IntersectionMeasurement> Simulation::measure_all() const {
  std::vector<IntersectionMeasurement> out;
  out.reserve(signals_.size());
  for (int i = 0; i < static_cast<int>(signals_.size()); ++i) out.push_back(measure_intersection(i));
  return out;
}

FlowLedger Simulation::ledger() const {
  FlowLedger l;
  l.released = static_cast<long>(next_release_);
  l.inserted = 0;
  for (const auto& veh : vehicles_) {
    if (veh.schedule_index >= 0) ++l.inserted;
  }
  l.arrived = arrived_;
  l.in_network = static_cast<long>(vehicles_.size()) - arrived_;
  l.deferred = 0;
  for (int lane : pending_lanes_) l.deferred += static_cast<long>(pending_[lane].size());
  return l;
}

std::vector<TripRecord> Simulation::trip_records() const {
  std::vector<TripRecord> out;
  out.reserve(vehicles_.size());
  for (const auto& veh : vehicles_) {
    TripRecord r;
    r.vehicle = veh.id;
    r.t_start = veh.entry_time;
    r.arrived = veh.exit_time >= 0.0;
    r.t_end = r.arrived ? std::min(veh.exit_time, config_.horizon) : config_.horizon;
    r.t_end = std::max(r.t_end, r.t_start);
    for (int link : veh.route) r.route_length += network_->link(link).length;
    out.push_back(r);
  }
  return out;
}

long Simulation::never_inserted() const {
  return static_cast<long>(schedule_.size()) - ledger().inserted;
}

std::vector<double> Simulation::intersection_travel_times() const {
  std::vector<double> sum = dwell_sum_;
  std::vector<long> count = dwell_count_;
  for (const auto& veh : vehicles_) {
    if (veh.exit_time >= 0.0) continue;
    const int node = network_->link(veh.route[veh.leg]).to;
    if (node == kBoundary) continue;
    sum[node] += clock_ - veh.leg_start;
    ++count[node];
  }
  std::vector<double> out(sum.size(), 0.0);
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (count[i] > 0) out[i] = sum[i] / static_cast<double>(count[i]);
  }
  return out;
}

double Simulation::mean_speed() const {
  double total = 0.0;
  long n = 0;
  for (const auto& q : lane_queue_) {
    for (int vid : q) {
      total += vehicles_[vid].v;
      ++n;
    }
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

}  // namespace tsc::traffic
