#include "tsc/control/controllers.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "tsc/error.hpp"

namespace tsc::control {
namespace {

using traffic::kLanesPerIntersection;
using traffic::kNumPhases;

bool green(int phase, int slot) { return (traffic::standard_phases()[phase].green >> slot) & 1u; }

std::array<int, 3> exit_slots(int slot) {
  const auto side = traffic::exit_side(traffic::approach_of_slot(slot), traffic::turn_of_slot(slot));
  const int base = traffic::index_of(side) * traffic::kLanesPerApproach;
  return {base, base + 1, base + 2};
}

}  // namespace

int argmax_lowest(const PhaseScores& scores) {
  int best = 0;
  for (int p = 1; p < kNumPhases; ++p) {
    if (scores[p] > scores[best]) best = p;
  }
  return best;
}

void FixedTimePlan::validate(double decision_interval) const {
  if (phases.empty()) throw ValidationError("fixed-time plan is empty");
  if (phases.size() != splits.size()) throw ValidationError("fixed-time plan needs one split per phase");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i] < 0 || phases[i] >= kNumPhases) throw ValidationError("fixed-time plan phase id out of range");
    const double k = splits[i] / decision_interval;
    if (!(splits[i] > 0.0) || std::abs(k - std::round(k)) > 1e-9) {
      throw ValidationError("fixed-time split " + std::to_string(splits[i]) +
                            " s is not a positive multiple of the decision interval");
    }
  }
}

double FixedTimePlan::cycle() const { return std::accumulate(splits.begin(), splits.end(), 0.0); }

int fixed_time_decide(double clock, const FixedTimePlan& plan) {
  plan.validate();
  double t = std::fmod(clock, plan.cycle());
  if (t < 0) t += plan.cycle();
  for (std::size_t i = 0; i < plan.phases.size(); ++i) {
    if (t < plan.splits[i] - 1e-9) return plan.phases[i];
    t -= plan.splits[i];
  }
  return plan.phases.back();
}

PhaseScores max_pressure_scores(const traffic::IntersectionMeasurement& meas) {
  std::array<double, kLanesPerIntersection> movement_pressure{};
  for (int s = 0; s < kLanesPerIntersection; ++s) {
    double p = 0.0;
    for (int o : exit_slots(s)) p += meas.incoming[s].count() - meas.outgoing[o].count();
    movement_pressure[s] = p;
  }
  PhaseScores scores{};
  for (int ph = 0; ph < kNumPhases; ++ph) {
    for (int s = 0; s < kLanesPerIntersection; ++s) {
      if (green(ph, s)) scores[ph] += movement_pressure[s];
    }
  }
  return scores;
}

int max_pressure_decide(const traffic::IntersectionMeasurement& meas) {
  return argmax_lowest(max_pressure_scores(meas));
}

PhaseScores advanced_mp_scores(const traffic::IntersectionMeasurement& meas, double effective_range) {
  std::array<double, kLanesPerIntersection> demand{};
  for (int s = 0; s < kLanesPerIntersection; ++s) {
    const auto& lane = meas.incoming[s];
    for (const auto& v : lane.vehicles) {
      if (v.stopped || lane.length - v.x <= effective_range) demand[s] += 1.0;
    }
  }
  PhaseScores scores{};
  for (int ph = 0; ph < kNumPhases; ++ph) {
    for (int s = 0; s < kLanesPerIntersection; ++s) {
      if (green(ph, s)) scores[ph] += demand[s];
    }
  }
  return scores;
}

int advanced_mp_decide(const traffic::IntersectionMeasurement& meas, double effective_range) {
  return argmax_lowest(advanced_mp_scores(meas, effective_range));
}

FixedTimeController::FixedTimeController(FixedTimePlan plan) : plan_(std::move(plan)) { plan_.validate(); }

ControllerDecision FixedTimeController::decide(const encoding::Environment& env) {
  ControllerDecision d;
  d.phases.assign(env.num_agents(), fixed_time_decide(env.sim().clock(), plan_));
  return d;
}

ControllerDecision MaxPressureController::decide(const encoding::Environment& env) {
  ControllerDecision d;
  for (const auto& m : env.measurements()) {
    d.scores.push_back(max_pressure_scores(m));
    d.phases.push_back(argmax_lowest(d.scores.back()));
  }
  return d;
}

ControllerDecision AdvancedMpController::decide(const encoding::Environment& env) {
  const double range =
      range_ > 0.0 ? range_ : env.network().max_speed_limit() * env.config().sim.decision_interval;
  ControllerDecision d;
  for (const auto& m : env.measurements()) {
    d.scores.push_back(advanced_mp_scores(m, range));
    d.phases.push_back(argmax_lowest(d.scores.back()));
  }
  return d;
}

ControllerDecision RandomController::decide(const encoding::Environment& env) {
  ControllerDecision d;
  for (int i = 0; i < env.num_agents(); ++i) {
    std::uniform_int_distribution<int> pick(0, kNumPhases - 1);
    d.phases.push_back(pick(rng_));
  }
  return d;
}

std::unique_ptr<Controller> make_controller(const std::string& kind) {
  if (kind == "fixed-time" || kind == "fixed") return std::make_unique<FixedTimeController>();
  if (kind == "max-pressure" || kind == "maxpressure") return std::make_unique<MaxPressureController>();
  if (kind == "advanced-mp") return std::make_unique<AdvancedMpController>();
  if (kind == "random") return std::make_unique<RandomController>();
  throw ValidationError("unknown controller '" + kind + "' (expected fixed-time, max-pressure, advanced-mp, random)");
}

std::string decisions_csv_row(int step, const ControllerDecision& d) {
  std::ostringstream out;
  for (std::size_t i = 0; i < d.phases.size(); ++i) {
    out << step << ',' << i << ',' << d.phases[i];
    if (i < d.scores.size()) {
      for (double s : d.scores[i]) out << ',' << s;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace tsc::control
