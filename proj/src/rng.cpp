#include "qforma/rng.hpp"

#include <cmath>

#include "qforma/error.hpp"

namespace qforma {

double CounterRng::normal() {
  const double u1 = uniform01_open();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return radius * std::cos(6.283185307179586476925286766559 * u2);
}

double CounterRng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    fail(ErrorKind::domain, "gamma: shape and scale must be positive");
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^(1/a).
    const double g = gamma(shape + 1.0, scale);
    return g * std::pow(uniform01_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform01_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
      return d * v * scale;
  }
}

}  // namespace qforma
