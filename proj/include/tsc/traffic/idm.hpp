#pragma once

#include <optional>

namespace tsc::traffic {

/// Intelligent Driver Model parameters. Defaults follow CityFlow's vehicle
/// defaults so its datasets behave comparably.
struct IdmParams {
  double v0 = 11.111;     // desired speed, m/s
  double a_max = 2.0;     // maximum acceleration, m/s^2
  double b = 4.5;         // comfortable deceleration, m/s^2
  double s0 = 2.5;        // minimum standstill gap, m
  double T = 1.0;         // time headway, s
  double delta = 4.0;     // free-road exponent
  double length = 5.0;    // vehicle length, m

  /// Throws ValidationError when a parameter is non-positive or delta < 1.
  void validate() const;
};

/// Leader seen by a follower: bumper-to-bumper gap (m) and leader speed (m/s).
struct Leader {
  double gap;
  double speed;
};

/// IDM acceleration for speed `v` with an optional leader. The interaction
/// term vanishes without a leader. Throws DomainError on gap <= 0.
double idm_accel(double v, std::optional<Leader> leader, const IdmParams& p);

/// Desired dynamic gap s* = s0 + vT + v*dv / (2 sqrt(a_max b)), floored at s0.
double idm_desired_gap(double v, double dv, const IdmParams& p);

}  // namespace tsc::traffic
