#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "tsc/traffic/idm.hpp"
#include "tsc/traffic/network.hpp"
#include "tsc/traffic/simulation.hpp"

namespace tsc::encoding {

using traffic::IntersectionMeasurement;
using traffic::kLanesPerIntersection;
using traffic::LaneMeasurement;

enum class StateKind { VC, GP, EP, ATS, DTSE, QDSE };

StateKind parse_state_kind(const std::string& name);  // throws ValidationError
std::string to_string(StateKind kind);

struct EncodingConfig {
  double follow_window = 50.0;   // m behind the foremost mover
  double phase_duration = 5.0;   // s, scales the effective range
  double dtse_cell = 6.0;        // m
  double effective_range = 0.0;  // m; 0 means max lane speed * phase_duration
  bool normalize = true;
  traffic::IdmParams idm{};      // s0 + length sets the per-lane capacity
};

/// Six per-lane features of the 12 incoming lanes, raw units.
struct QdseVector {
  static constexpr int kFeatures = 6;
  std::array<double, kLanesPerIntersection> queue{};           // stopped vehicles
  std::array<double, kLanesPerIntersection> joined{};          // queue joins last interval
  std::array<double, kLanesPerIntersection> left{};            // queue leaves last interval
  std::array<double, kLanesPerIntersection> moving{};
  std::array<double, kLanesPerIntersection> front_group{};     // movers near the foremost one
  std::array<double, kLanesPerIntersection> front_distance{};  // m, queue tail to foremost mover
  std::array<double, kLanesPerIntersection> lane_length{};

  /// Feature-major flattening [Q | N_in | N_out | N_r | N_fr | D_fr], 72 values.
  std::vector<double> flatten(bool normalize, const traffic::IdmParams& idm) const;
};

/// Features of one lane: {Q, N_in, N_out, N_r, N_fr, D_fr}.
std::array<double, 6> qdse_lane(const LaneMeasurement& lane, double follow_window);
QdseVector compute_qdse(const IntersectionMeasurement& meas, double follow_window);

/// Movers expected to reach the (frozen) queue tail within `horizon`, by
/// integrating free-road IDM from each mover's current speed.
int predict_delta_in(const LaneMeasurement& lane, bool green, const traffic::IdmParams& idm, double horizon);

/// Resolved effective range for EP/ATS on `net`.
double effective_range(const traffic::RoadNetwork& net, const EncodingConfig& cfg);

/// State dimension for `kind` (phase one-hot included).
int state_dim(StateKind kind, const traffic::RoadNetwork& net, const EncodingConfig& cfg);

/// State vector of one intersection. Every kind starts with the 8-way
/// phase one-hot. `qdse` overrides the QDSE features (e.g. after noise).
std::vector<double> compute_state(StateKind kind, const IntersectionMeasurement& meas,
                                  const traffic::RoadNetwork& net, const EncodingConfig& cfg,
                                  const QdseVector* qdse = nullptr);

/// Negative total of stopped vehicles over the 12 incoming and 12 outgoing lanes.
double compute_reward(const IntersectionMeasurement& meas);

/// Gaussian noise on D_fr only, clamped to [0, lane length].
QdseVector apply_sensor_noise(QdseVector q, double sigma, std::mt19937_64& rng);

/// Stopped counts of the 24 tracked lanes (incoming then outgoing).
std::array<double, traffic::kTrackedLanes> queue_targets(const IntersectionMeasurement& meas);

}  // namespace tsc::encoding
