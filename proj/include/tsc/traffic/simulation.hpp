#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "tsc/traffic/idm.hpp"
#include "tsc/traffic/network.hpp"

namespace tsc::traffic {

struct SimConfig {
  double dt = 1.0;                  // sub-step, s
  double decision_interval = 5.0;   // s
  double yellow_duration = 2.0;     // s
  double stop_speed = 0.1;          // m/s, below this a vehicle counts as stopped
  double spawn_jitter = 0.0;        // s, uniform delay added to scheduled starts
  double horizon = 3600.0;          // s, t_end for vehicles still in the network
  std::uint64_t seed = 0;
};

/// One demand entry: a single vehicle with its route (link indices).
struct ScheduledVehicle {
  std::vector<int> route;
  double start_time = 0.0;
  IdmParams idm{};
};

struct Vehicle {
  int id = 0;
  int schedule_index = 0;
  std::vector<int> route;
  std::size_t leg = 0;  // index into route of the current link
  int lane = 0;
  double x = 0.0;       // front bumper position from lane start, m
  double v = 0.0;       // m/s
  double entry_time = 0.0;
  double exit_time = -1.0;  // < 0 while in the network
  double leg_start = 0.0;   // time the current link was entered
  IdmParams idm{};
  bool stopped = false;
};

struct VehicleSnapshot {
  double x = 0.0;
  double v = 0.0;
  double length = 0.0;
  bool stopped = false;
};

/// Per-lane readout. Interval counters cover the last decision interval.
struct LaneMeasurement {
  int lane = 0;
  double length = 0.0;
  double speed_limit = 0.0;
  int stopped = 0;
  int moving = 0;
  int queue_joined = 0;  // vehicles that became stopped on this lane
  int queue_left = 0;    // stopped vehicles that started moving or left the lane
  int entered = 0;       // vehicles that entered the lane (spawn or transfer)
  int departed = 0;      // vehicles that crossed the lane's end
  double queue_tail = 0.0;           // rear of the rearmost stopped vehicle, lane length if none
  double front_mover_distance = 0.0; // queue tail (or stop line) to foremost approaching mover
  std::vector<VehicleSnapshot> vehicles;  // stop line first

  int count() const { return stopped + moving; }
};

struct IntersectionMeasurement {
  int intersection = 0;
  int phase = kNoPhase;  // current phase, or the pending one during yellow
  bool in_yellow = false;
  std::array<LaneMeasurement, kLanesPerIntersection> incoming{};
  std::array<LaneMeasurement, kLanesPerIntersection> outgoing{};
};

struct TripRecord {
  int vehicle = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double route_length = 0.0;
  bool arrived = false;
};

struct FlowLedger {
  long released = 0;  // scheduled start <= clock
  long inserted = 0;
  long arrived = 0;
  long in_network = 0;
  long deferred = 0;  // released but waiting for entry space
};

/// Queue-tail geometry of one lane's vehicle list (stop line first):
/// returns {queue tail, distance to the foremost mover behind it}.
std::pair<double, double> queue_geometry(std::span<const VehicleSnapshot> vehicles, double lane_length);

/// Deterministic single-writer microscopic simulation.
class Simulation {
 public:
  Simulation(std::shared_ptr<const RoadNetwork> network, SimConfig config);

  const RoadNetwork& network() const { return *network_; }
  const SimConfig& config() const { return config_; }
  double clock() const { return clock_; }

  /// Replaces the demand and restarts the clock. Routes are validated here.
  void reset(std::vector<ScheduledVehicle> schedule);

  /// Requests `phase` for the coming decision interval. Keeping the current
  /// phase extends it; changing inserts yellow on movements that lose green.
  void set_phase(int intersection, int phase);

  /// Test hook: no movement (not even right turns) is green until the next set_phase.
  void set_all_red(int intersection);

  /// One integration sub-step of `dt` seconds, followed by spawning.
  void step(double dt);

  /// Applies `phases`, simulates one decision interval and returns the
  /// per-intersection measurements with this interval's counters.
  std::vector<IntersectionMeasurement> advance_decision_interval(std::span<const int> phases);

  /// Zeroes the per-lane interval counters (done by advance_decision_interval).
  void reset_interval_counters();

  /// Inserts released vehicles whose entry lane has room. Returns the count.
  int spawn_from_flow();

  LaneMeasurement measure_lane(int lane) const;
  IntersectionMeasurement measure_intersection(int intersection) const;
  std::vector<IntersectionMeasurement> measure_all() const;

  /// Green incoming-lane slots of `intersection` for the next sub-step.
  GreenMask green_mask(int intersection) const;
  int current_phase(int intersection) const { return signals_.at(intersection).phase; }
  bool in_yellow(int intersection) const { return signals_.at(intersection).yellow_remaining > 1e-9; }

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const std::deque<int>& lane_vehicles(int lane) const { return lane_queue_.at(lane); }
  FlowLedger ledger() const;
  std::size_t scheduled() const { return schedule_.size(); }

  /// One record per inserted vehicle; non-arrivals end at the horizon.
  std::vector<TripRecord> trip_records() const;
  long never_inserted() const;

  /// Mean dwell per intersection between entering one of its incoming links
  /// and crossing its stop line; in-progress dwells are cut at the clock.
  std::vector<double> intersection_travel_times() const;

  /// Mean speed over vehicles in the network (0 when empty).
  double mean_speed() const;

  /// Insert a vehicle directly on `lane` (scenario construction in tests).
  int place_vehicle(const std::vector<int>& route, std::size_t leg, double x, double v,
                    const IdmParams& idm);

 private:
  struct SignalState {
    int phase = kNoPhase;
    GreenMask during_yellow = kRightTurnMask;
    double yellow_remaining = 0.0;
    bool all_red = false;
  };
  struct LaneControl {
    int intersection = -1;
    int slot = -1;
  };
  struct Obstacle {
    bool present = false;
    bool stationary = false;  // signal or blocked stop line
    double gap = 0.0;
    double speed = 0.0;
  };

  bool lane_green(int lane) const;
  int target_lane(const Vehicle& veh) const;
  Obstacle head_obstacle(const Vehicle& veh) const;
  IdmParams effective_params(const Vehicle& veh) const;
  void transfer_heads();
  void update_queue_status();
  void exit_vehicle(int vid);
  void enter_lane(int vid, int lane, double x);

  std::shared_ptr<const RoadNetwork> network_;
  SimConfig config_;
  std::vector<LaneControl> lane_control_;
  std::vector<ScheduledVehicle> schedule_;
  std::vector<int> release_order_;
  std::size_t next_release_ = 0;
  std::vector<std::deque<int>> pending_;  // per entry lane, schedule indices
  std::vector<int> pending_lanes_;

  std::vector<Vehicle> vehicles_;
  std::vector<std::deque<int>> lane_queue_;  // per lane, stop line first
  std::vector<int> stopped_lane_;            // per vehicle, lane where counted stopped or -1
  std::vector<SignalState> signals_;
  std::vector<double> accel_;

  std::vector<int> joined_, left_, entered_, departed_;
  std::vector<double> dwell_sum_;
  std::vector<long> dwell_count_;
  long arrived_ = 0;
  double clock_ = 0.0;
};

}  // namespace tsc::traffic
