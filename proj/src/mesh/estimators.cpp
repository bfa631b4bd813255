#include <algorithm>
#include <cmath>
#include <limits>

#include "pqm/errors.hpp"
#include "pqm/mesh.hpp"

namespace pqm::mesh {

namespace {

double ball_measure(const Space& space, std::size_t center, double radius) {
  double m = 0.0;
  const auto row = space.distances_from(center);
  for (std::size_t y = 0; y < row.size(); ++y)
    if (inside_open_ball(row[y], radius)) m += space.measure(y);
  return m;
}

void check_radii(std::span<const double> radii) {
  if (radii.empty()) throw ParameterError("radius sample set is empty");
  for (double r : radii)
    if (!(std::isfinite(r) && r > 0.0)) throw ParameterError("sampled radii must be positive");
}

}  // namespace

DoublingEstimate estimate_doubling(const Space& space, std::span<const double> radii) {
  check_radii(radii);
  DoublingEstimate best{1.0, 0, radii.front()};
  for (std::size_t x = 0; x < space.vertex_count(); ++x) {
    for (double r : radii) {
      const double ratio = ball_measure(space, x, 2.0 * r) / ball_measure(space, x, r);
      if (ratio > best.constant) best = {ratio, x, r};
    }
  }
  return best;
}

PoincareEstimate estimate_poincare(const Space& space, double p, double tau,
                                   std::span<const std::vector<double>> probes,
                                   std::span<const double> radii) {
  if (!(p >= 1.0 && std::isfinite(p))) throw ParameterError("Poincare exponent must satisfy 1 <= p < inf");
  if (!(tau >= 1.0)) throw ParameterError("Poincare dilation tau must be >= 1");
  check_radii(radii);

  const std::size_t n = space.vertex_count();
  PoincareEstimate best;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const auto& u = probes[k];
    if (u.size() != n) throw ParameterError("probe field must be defined on every vertex");
    const auto g = edge_slopes(space, u);

    for (std::size_t x = 0; x < n; ++x) {
      const auto row = space.distances_from(x);
      for (double r : radii) {
        double mass = 0.0, first = 0.0, scale = 0.0;
        for (std::size_t y = 0; y < n; ++y)
          if (inside_open_ball(row[y], r)) {
            mass += space.measure(y);
            first += space.measure(y) * u[y];
            scale = std::max(scale, std::abs(u[y]));
          }
        const double mean = first / mass;
        double deviation = 0.0;
        for (std::size_t y = 0; y < n; ++y)
          if (inside_open_ball(row[y], r)) deviation += space.measure(y) * std::abs(u[y] - mean);
        deviation /= mass;
        // a constant on the ball; the mean is only exact up to rounding
        if (deviation <= 1e-13 * scale) continue;

        const double outer = tau * r;
        double outer_mass = 0.0, energy = 0.0;
        for (std::size_t y = 0; y < n; ++y)
          if (inside_open_ball(row[y], outer)) outer_mass += space.measure(y);
        for (std::size_t e = 0; e < space.edge_count(); ++e) {
          const auto& ed = space.edge(e);
          if (inside_open_ball(row[ed.u], outer) && inside_open_ball(row[ed.v], outer))
            energy += std::pow(g[e], p) * ed.measure;
        }
        const double rhs = r * std::pow(energy / outer_mass, 1.0 / p);
        const double required =
            rhs > 0.0 ? deviation / rhs : std::numeric_limits<double>::infinity();
        if (required > best.constant) best = {required, k, x, r};
      }
    }
  }
  return best;
}

}  // namespace pqm::mesh
