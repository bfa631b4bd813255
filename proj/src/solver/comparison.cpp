#include <algorithm>
#include <cmath>

#include "pqm/errors.hpp"
#include "pqm/solver.hpp"

namespace pqm::solver {

double chi_value(double h, double t_prime, double t) {
  if (t <= h) return 0.0;
  if (t <= 2.0 * h) return (t - h) / h;
  if (t <= t_prime - h) return 1.0;
  // Written around t' so that chi(t') is exactly 1/2.
  if (t <= t_prime + h) return std::max(0.0, 0.5 - (t - t_prime) / (2.0 * h));
  return 0.0;
}

CutoffProfile chi_cutoff(double h, double t_prime, const mesh::TimeGrid& grid) {
  if (!(h > 0.0 && 2.0 * h < t_prime - 2.0 * h && t_prime + h < grid.horizon()))
    throw ParameterError("cutoff geometry needs 0 < 2h < t' - 2h and t' + h < T");
  CutoffProfile c{h, t_prime, std::vector<double>(grid.slices())};
  for (std::size_t k = 0; k < grid.slices(); ++k) c.values[k] = chi_value(h, t_prime, grid.time(k));
  return c;
}

ComparisonReport comparison_check(const SpaceTimeField& u, const SpaceTimeField& v, double tol) {
  if (!u.same_cylinder(v)) throw ParameterError("u and v live on different cylinders");
  if (!(tol >= 0.0)) throw ParameterError("tolerance must be nonnegative");
  const auto& space = u.space();
  for (std::size_t k = 0; k < u.slice_count(); ++k)
    for (std::size_t b : space.boundary()) {
      const double ex = v(k, b) - u(k, b);
      if (ex > tol)
        throw PreconditionError("boundary ordering violated: (v - u)_+ = " + std::to_string(ex) + " at slice " +
                                std::to_string(k) + ", boundary vertex '" + space.vertex(b).id + "'");
    }
  ComparisonReport r{0.0, 0, 0, tol, true};
  for (std::size_t k = 0; k < u.slice_count(); ++k)
    for (std::size_t i = 0; i < u.vertex_count(); ++i) {
      const double ex = std::max(v(k, i) - u(k, i), 0.0);
      if (ex > r.max_excess) {
        r.max_excess = ex;
        r.slice = k;
        r.vertex = i;
      }
    }
  r.pass = r.max_excess <= tol;
  return r;
}

double initial_condition_residual(const SpaceTimeField& u, const SpaceTimeField& v, double h) {
  if (!u.same_cylinder(v)) throw ParameterError("u and v live on different cylinders");
  const auto& grid = u.grid();
  if (!(h > 0.0 && h <= grid.horizon())) throw ParameterError("residual window needs 0 < h <= T");
  double sum = 0.0;
  for (std::size_t k = 0; k < grid.slices() && grid.time(k) < h * (1.0 - 1e-12); ++k)
    for (std::size_t i = 0; i < u.vertex_count(); ++i) {
      const double ex = std::max(v(k, i) - u(k, i), 0.0);
      sum += u.space().measure(i) * ex * ex * grid.dt();
    }
  return sum / h;
}

}  // namespace pqm::solver
