#include "tsc/traffic/idm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsc/error.hpp"

namespace tsc::traffic {

void IdmParams::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ValidationError(std::string("IDM parameter ") + name + " must be positive, got " +
                            std::to_string(value));
    }
  };
  positive(v0, "v0");
  positive(a_max, "a_max");
  positive(b, "b");
  positive(s0, "s0");
  positive(T, "T");
  positive(length, "length");
  if (!(delta >= 1.0)) {
    throw ValidationError("IDM exponent delta must be >= 1, got " + std::to_string(delta));
  }
}

double idm_desired_gap(double v, double dv, const IdmParams& p) {
  const double dynamic = v * p.T + v * dv / (2.0 * std::sqrt(p.a_max * p.b));
  return p.s0 + std::max(0.0, dynamic);
}

double idm_accel(double v, std::optional<Leader> leader, const IdmParams& p) {
  const double free_term = std::pow(std::max(v, 0.0) / p.v0, p.delta);
  double interaction = 0.0;
  if (leader) {
    if (!(leader->gap > 0.0)) {
      throw DomainError("idm_accel: leader gap must be positive, got " +
                        std::to_string(leader->gap));
    }
    const double s_star = idm_desired_gap(v, v - leader->speed, p);
    const double ratio = s_star / leader->gap;
    interaction = ratio * ratio;
  }
  return p.a_max * (1.0 - free_term - interaction);
}

}  // namespace tsc::traffic
