#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tsc/encoding/env.hpp"
#include "tsc/traffic/simulation.hpp"

namespace tsc::control {

using PhaseScores = std::array<double, traffic::kNumPhases>;

struct ControllerDecision {
  std::vector<int> phases;
  std::vector<PhaseScores> scores;  // empty for controllers without scores
};

/// Index of the largest score; ties go to the lowest phase id.
int argmax_lowest(const PhaseScores& scores);

struct FixedTimePlan {
  std::vector<int> phases{0, 2, 1, 3};
  std::vector<double> splits{30.0, 30.0, 30.0, 30.0};  // s, multiples of the decision interval

  void validate(double decision_interval = 5.0) const;
  double cycle() const;
};

/// Phase active at `clock` under the cyclic plan.
int fixed_time_decide(double clock, const FixedTimePlan& plan);

/// Sum over the phase's movements of (incoming count - outgoing count).
PhaseScores max_pressure_scores(const traffic::IntersectionMeasurement& meas);
int max_pressure_decide(const traffic::IntersectionMeasurement& meas);

/// Sum over the phase's green lanes of queued vehicles plus movers within
/// `effective_range` of the stop line.
PhaseScores advanced_mp_scores(const traffic::IntersectionMeasurement& meas, double effective_range);
int advanced_mp_decide(const traffic::IntersectionMeasurement& meas, double effective_range);

/// A controller decides one phase per intersection from the environment's
/// latest measurements.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual void reset(std::uint64_t /*seed*/) {}
  virtual ControllerDecision decide(const encoding::Environment& env) = 0;
};

class FixedTimeController : public Controller {
 public:
  explicit FixedTimeController(FixedTimePlan plan = {});
  std::string name() const override { return "fixed-time"; }
  ControllerDecision decide(const encoding::Environment& env) override;

 private:
  FixedTimePlan plan_;
};

class MaxPressureController : public Controller {
 public:
  std::string name() const override { return "max-pressure"; }
  ControllerDecision decide(const encoding::Environment& env) override;
};

class AdvancedMpController : public Controller {
 public:
  explicit AdvancedMpController(double effective_range = 0.0) : range_(effective_range) {}
  std::string name() const override { return "advanced-mp"; }
  ControllerDecision decide(const encoding::Environment& env) override;

 private:
  double range_;  // 0: max lane speed * decision interval
};

/// Uniform random phases from a seeded stream.
class RandomController : public Controller {
 public:
  std::string name() const override { return "random"; }
  void reset(std::uint64_t seed) override { rng_.seed(seed); }
  ControllerDecision decide(const encoding::Environment& env) override;

 private:
  std::mt19937_64 rng_{0};
};

/// Builds a classical controller by config key: fixed-time, max-pressure, advanced-mp, random.
std::unique_ptr<Controller> make_controller(const std::string& kind);

/// CSV rows "step,intersection,phase,score0..score7".
std::string decisions_csv_row(int step, const ControllerDecision& d);

}  // namespace tsc::control
