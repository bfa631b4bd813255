#include <cmath>
#include <numbers>

#include "pqm/errors.hpp"
#include "pqm/solver.hpp"

namespace pqm::solver {

namespace {

// sin(pi y) with the argument reduced first, so integer y gives exactly 0.
double sin_pi(double y) {
  if (y < 0.0) return -sin_pi(-y);
  double r = std::fmod(y, 2.0);
  if (r == 0.0 || r == 1.0) return 0.0;
  double sign = 1.0;
  if (r > 1.0) {
    r -= 1.0;
    sign = -1.0;
  }
  if (r > 0.5) r = 1.0 - r;
  return sign * std::sin(std::numbers::pi * r);
}

}  // namespace

double heat_series_value(double a, std::span<const double> coefficients, double x, double t) {
  double u = 0.0;
  for (std::size_t m = 0; m < coefficients.size(); ++m) {
    const double n = static_cast<double>(m + 1);
    const double decay = std::exp(-a * (n * std::numbers::pi) * (n * std::numbers::pi) * t);
    u += coefficients[m] * decay * sin_pi(n * x);
  }
  return u;
}

SpaceTimeField heat_series_solution(double a, std::span<const double> coefficients, calculus::SpacePtr space,
                                    mesh::TimeGrid grid) {
  if (!(a >= 1.0 && std::isfinite(a))) throw ParameterError("diffusion coefficient must satisfy a >= 1");
  if (coefficients.empty()) throw ParameterError("need at least one series coefficient");
  for (double b : coefficients)
    if (!std::isfinite(b)) throw ParameterError("series coefficients must be finite");
  std::vector<double> xs(space->vertex_count());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& v = space->vertex(i);
    if (v.coords.empty()) throw ParameterError("vertex '" + v.id + "' has no coordinate");
    xs[i] = v.coords[0];
    if (!(xs[i] >= 0.0 && xs[i] <= 1.0)) throw ParameterError("vertex '" + v.id + "' lies outside [0, 1]");
  }
  std::vector<double> coeffs(coefficients.begin(), coefficients.end());
  return SpaceTimeField::sample(std::move(space), grid, [&](std::size_t i, double t) {
    return heat_series_value(a, coeffs, xs[i], t);
  });
}

}  // namespace pqm::solver
