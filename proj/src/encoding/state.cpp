#include "tsc/encoding/state.hpp"

#include <algorithm>
#include <cmath>

#include "tsc/error.hpp"

namespace tsc::encoding {
namespace {

using traffic::Approach;
using traffic::kNumPhases;
using traffic::Turn;

double capacity(const LaneMeasurement& lane, const traffic::IdmParams& idm) {
  return lane.length / (idm.s0 + idm.length);
}

void push_phase(std::vector<double>& out, int phase) {
  for (int p = 0; p < kNumPhases; ++p) out.push_back(p == phase ? 1.0 : 0.0);
}

// Outgoing-lane slots reached from incoming slot `slot`.
std::array<int, 3> exit_slots(int slot) {
  const Approach side = traffic::exit_side(traffic::approach_of_slot(slot), traffic::turn_of_slot(slot));
  const int base = traffic::index_of(side) * traffic::kLanesPerApproach;
  return {base, base + 1, base + 2};
}

int count_near_stop_line(const LaneMeasurement& lane, double range, bool stopped_only) {
  int n = 0;
  for (const auto& v : lane.vehicles) {
    if (lane.length - v.x <= range && (!stopped_only || v.stopped)) ++n;
  }
  return n;
}

int count_near_entry(const LaneMeasurement& lane, double range) {
  int n = 0;
  for (const auto& v : lane.vehicles) n += v.x <= range;
  return n;
}

int dtse_cells(const traffic::RoadNetwork& net, const EncodingConfig& cfg) {
  double longest = 0.0;
  for (const auto& lane : net.lanes()) longest = std::max(longest, lane.length);
  return static_cast<int>(std::ceil(longest / cfg.dtse_cell - 1e-9));
}

}  // namespace

StateKind parse_state_kind(const std::string& name) {
  if (name == "VC" || name == "vc") return StateKind::VC;
  if (name == "GP" || name == "gp") return StateKind::GP;
  if (name == "EP" || name == "ep") return StateKind::EP;
  if (name == "ATS" || name == "ats") return StateKind::ATS;
  if (name == "DTSE" || name == "dtse") return StateKind::DTSE;
  if (name == "QDSE" || name == "qdse") return StateKind::QDSE;
  throw ValidationError("unknown state kind '" + name + "' (expected VC, GP, EP, ATS, DTSE or QDSE)");
}

std::string to_string(StateKind kind) {
  switch (kind) {
    case StateKind::VC: return "VC";
    case StateKind::GP: return "GP";
    case StateKind::EP: return "EP";
    case StateKind::ATS: return "ATS";
    case StateKind::DTSE: return "DTSE";
    case StateKind::QDSE: return "QDSE";
  }
  return "?";
}

std::vector<double> QdseVector::flatten(bool normalize, const traffic::IdmParams& idm) const {
  std::vector<double> out;
  out.reserve(kFeatures * kLanesPerIntersection);
  const std::array<const std::array<double, kLanesPerIntersection>*, 5> counts = {&queue, &joined, &left, &moving,
                                                                                   &front_group};
  for (const auto* feature : counts) {
    for (int l = 0; l < kLanesPerIntersection; ++l) {
      const double cap = lane_length[l] / (idm.s0 + idm.length);
      out.push_back(normalize ? (*feature)[l] / cap : (*feature)[l]);
    }
  }
  for (int l = 0; l < kLanesPerIntersection; ++l) {
    out.push_back(normalize ? front_distance[l] / lane_length[l] : front_distance[l]);
  }
  return out;
}

std::array<double, 6> qdse_lane(const LaneMeasurement& lane, double follow_window) {
  const auto [tail, distance] = traffic::queue_geometry(lane.vehicles, lane.length);
  int group = 0;
  bool found = false;
  double front_x = 0.0;
  for (const auto& v : lane.vehicles) {
    if (v.stopped || v.x > tail) continue;
    if (!found) {
      found = true;
      front_x = v.x;
    }
    if (front_x - v.x <= follow_window) ++group;
  }
  return {static_cast<double>(lane.stopped), static_cast<double>(lane.queue_joined),
          static_cast<double>(lane.queue_left), static_cast<double>(lane.moving), static_cast<double>(group),
          distance};
}

QdseVector compute_qdse(const IntersectionMeasurement& meas, double follow_window) {
  QdseVector q;
  for (int l = 0; l < kLanesPerIntersection; ++l) {
    const auto f = qdse_lane(meas.incoming[l], follow_window);
    q.queue[l] = f[0];
    q.joined[l] = f[1];
    q.left[l] = f[2];
    q.moving[l] = f[3];
    q.front_group[l] = f[4];
    q.front_distance[l] = f[5];
    q.lane_length[l] = meas.incoming[l].length;
  }
  return q;
}

int predict_delta_in(const LaneMeasurement& lane, bool green, const traffic::IdmParams& idm, double horizon) {
  if (green && lane.stopped == 0) return 0;
  const auto [tail, distance] = traffic::queue_geometry(lane.vehicles, lane.length);
  (void)distance;
  traffic::IdmParams p = idm;
  p.v0 = std::min(p.v0, lane.speed_limit);
  constexpr double kDt = 0.1;
  const int steps = static_cast<int>(std::lround(horizon / kDt));
  int count = 0;
  for (const auto& veh : lane.vehicles) {
    if (veh.stopped || veh.x > tail) continue;
    const double needed = tail - veh.x;
    double v = veh.v;
    double covered = 0.0;
    for (int k = 0; k < steps && covered < needed; ++k) {
      v = std::clamp(v + traffic::idm_accel(v, std::nullopt, p) * kDt, 0.0, lane.speed_limit);
      covered += v * kDt;
    }
    count += covered >= needed;
  }
  return count;
}

double effective_range(const traffic::RoadNetwork& net, const EncodingConfig& cfg) {
  return cfg.effective_range > 0.0 ? cfg.effective_range : net.max_speed_limit() * cfg.phase_duration;
}

int state_dim(StateKind kind, const traffic::RoadNetwork& net, const EncodingConfig& cfg) {
  switch (kind) {
    case StateKind::VC:
    case StateKind::GP:
    case StateKind::EP: return kNumPhases + kLanesPerIntersection;
    case StateKind::ATS: return kNumPhases + 2 * kLanesPerIntersection;
    case StateKind::DTSE: return kNumPhases + kLanesPerIntersection * dtse_cells(net, cfg);
    case StateKind::QDSE: return kNumPhases + QdseVector::kFeatures * kLanesPerIntersection;
  }
  throw ValidationError("unknown state kind");
}

std::vector<double> compute_state(StateKind kind, const IntersectionMeasurement& meas,
                                  const traffic::RoadNetwork& net, const EncodingConfig& cfg,
                                  const QdseVector* qdse) {
  std::vector<double> out;
  out.reserve(state_dim(kind, net, cfg));
  push_phase(out, meas.phase);
  const double range = effective_range(net, cfg);
  auto scale = [&](double value, const LaneMeasurement& lane) {
    return cfg.normalize ? value / capacity(lane, cfg.idm) : value;
  };
  auto pressure = [&](int slot, bool ranged) {
    const auto& in = meas.incoming[slot];
    const double n_in = ranged ? count_near_stop_line(in, range, false) : in.count();
    double n_out = 0.0;
    for (int o : exit_slots(slot)) {
      const auto& lane = meas.outgoing[o];
      n_out += ranged ? count_near_entry(lane, range) : lane.count();
    }
    return scale(n_in - n_out / traffic::kLanesPerApproach, in);
  };

  switch (kind) {
    case StateKind::VC:
      for (const auto& lane : meas.incoming) out.push_back(scale(lane.count(), lane));
      break;
    case StateKind::GP:
      for (int s = 0; s < kLanesPerIntersection; ++s) out.push_back(pressure(s, false));
      break;
    case StateKind::EP:
      for (int s = 0; s < kLanesPerIntersection; ++s) out.push_back(pressure(s, true));
      break;
    case StateKind::ATS:
      for (const auto& lane : meas.incoming) out.push_back(scale(count_near_stop_line(lane, range, true), lane));
      for (int s = 0; s < kLanesPerIntersection; ++s) out.push_back(pressure(s, true));
      break;
    case StateKind::DTSE: {
      const int cells = dtse_cells(net, cfg);
      for (const auto& lane : meas.incoming) {
        const std::size_t base = out.size();
        out.resize(base + cells, 0.0);
        for (const auto& v : lane.vehicles) {
          const int cell = std::clamp(static_cast<int>((lane.length - v.x) / cfg.dtse_cell), 0, cells - 1);
          out[base + cell] = 1.0;
        }
      }
      break;
    }
    case StateKind::QDSE: {
      const QdseVector q = qdse ? *qdse : compute_qdse(meas, cfg.follow_window);
      const auto flat = q.flatten(cfg.normalize, cfg.idm);
      out.insert(out.end(), flat.begin(), flat.end());
      break;
    }
  }
  return out;
}

double compute_reward(const IntersectionMeasurement& meas) {
  double total = 0.0;
  for (const auto& lane : meas.incoming) total += lane.stopped;
  for (const auto& lane : meas.outgoing) total += lane.stopped;
  return -total;
}

QdseVector apply_sensor_noise(QdseVector q, double sigma, std::mt19937_64& rng) {
  if (sigma < 0.0) throw ValidationError("noise sigma must be non-negative");
  if (sigma == 0.0) return q;
  for (int l = 0; l < kLanesPerIntersection; ++l) {
    std::normal_distribution<double> eps(0.0, sigma);
    q.front_distance[l] = std::clamp(q.front_distance[l] + eps(rng), 0.0, q.lane_length[l]);
  }
  return q;
}

std::array<double, traffic::kTrackedLanes> queue_targets(const IntersectionMeasurement& meas) {
  std::array<double, traffic::kTrackedLanes> out{};
  for (int l = 0; l < kLanesPerIntersection; ++l) {
    out[l] = meas.incoming[l].stopped;
    out[kLanesPerIntersection + l] = meas.outgoing[l].stopped;
  }
  return out;
}

}  // namespace tsc::encoding
