#include <cmath>

#include "pqm/calculus.hpp"
#include "pqm/errors.hpp"

namespace pqm::calculus {

namespace {

void check_exponent(double p) {
  if (!(p >= 1.0 && std::isfinite(p))) throw ParameterError("exponent must satisfy 1 <= p < inf");
}

void check_region(const NodeSet* region, std::size_t vertices, std::size_t slices) {
  if (region && (region->vertices() != vertices || region->slices() != slices))
    throw ParameterError("region does not match the field's cylinder");
}

}  // namespace

EdgeField edge_gradient(const SpaceTimeField& u) {
  const auto& space = u.space();
  const std::size_t m = space.edge_count();
  std::vector<double> g(m * u.slice_count());
  for (std::size_t k = 0; k < u.slice_count(); ++k) {
    const auto s = u.slice(k);
    for (std::size_t e = 0; e < m; ++e) {
      const auto& ed = space.edge(e);
      g[k * m + e] = std::abs(s[ed.u] - s[ed.v]) / ed.length;
    }
  }
  return {u.space_ptr(), u.grid(), std::move(g)};
}

double lp_norm(const SpaceTimeField& f, double p, const NodeSet* region) {
  check_exponent(p);
  check_region(region, f.vertex_count(), f.slice_count());
  const auto& space = f.space();
  double sum = 0.0;
  for (std::size_t k = 0; k < f.slice_count(); ++k) {
    const double w = f.grid().weight(k);
    for (std::size_t i = 0; i < f.vertex_count(); ++i)
      if (!region || region->contains(k, i)) sum += std::pow(std::abs(f(k, i)), p) * space.measure(i) * w;
  }
  return std::pow(sum, 1.0 / p);
}

double lp_norm(const EdgeField& f, double p, const NodeSet* region) {
  check_exponent(p);
  const auto& space = f.space();
  check_region(region, space.vertex_count(), f.slice_count());
  double sum = 0.0;
  for (std::size_t k = 0; k < f.slice_count(); ++k) {
    const double w = f.grid().weight(k);
    for (std::size_t e = 0; e < f.edge_count(); ++e)
      if (!region || region->contains_edge(space, k, e)) sum += std::pow(f(k, e), p) * space.edge(e).measure * w;
  }
  return std::pow(sum, 1.0 / p);
}

double newtonian_norm(const mesh::Space& space, std::span<const double> slice, double p) {
  check_exponent(p);
  if (slice.size() != space.vertex_count()) throw ParameterError("slice has wrong size");
  double mass = 0.0;
  for (std::size_t i = 0; i < slice.size(); ++i) mass += std::pow(std::abs(slice[i]), p) * space.measure(i);
  const auto g = mesh::edge_slopes(space, slice);
  double energy = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) energy += std::pow(g[e], p) * space.edge(e).measure;
  return std::pow(mass, 1.0 / p) + std::pow(energy, 1.0 / p);
}

std::vector<bool> zero_boundary_check(const SpaceTimeField& u, double tol) {
  if (!(tol >= 0.0)) throw ParameterError("tolerance must be nonnegative");
  std::vector<bool> ok(u.slice_count(), true);
  for (std::size_t k = 0; k < u.slice_count(); ++k)
    for (std::size_t b : u.space().boundary())
      if (std::abs(u(k, b)) > tol) ok[k] = false;
  return ok;
}

SpaceTimeField time_derivative(const SpaceTimeField& phi) {
  const std::size_t n = phi.vertex_count();
  const std::size_t last = phi.slice_count() - 1;
  const double dt = phi.grid().dt();
  std::vector<double> d(phi.values().size());
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = (phi(1, i) - phi(0, i)) / dt;
    d[last * n + i] = (phi(last, i) - phi(last - 1, i)) / dt;
  }
  for (std::size_t k = 1; k < last; ++k)
    for (std::size_t i = 0; i < n; ++i) d[k * n + i] = (phi(k + 1, i) - phi(k - 1, i)) / (2.0 * dt);
  return {phi.space_ptr(), phi.grid(), std::move(d)};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("slope fit needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ParameterError("slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / denom;
}

ConvergenceReport gradient_convergence_report(const SpaceTimeField& u,
                                              std::span<const std::size_t> shift_steps,
                                              std::span<const double> widths, double p,
                                              double window_lo, double window_hi) {
  check_exponent(p);
  if (!(0.0 <= window_lo && window_lo < window_hi && window_hi <= 1.0))
    throw ParameterError("time window fractions must satisfy 0 <= lo < hi <= 1");

  const auto& space = u.space();
  const auto& grid = u.grid();
  const std::size_t N = grid.steps();
  ConvergenceReport report;
  report.p = p;
  report.window_first = static_cast<std::size_t>(std::ceil(window_lo * static_cast<double>(N)));
  report.window_last = static_cast<std::size_t>(std::floor(window_hi * static_cast<double>(N)));

  // Window: slices [first, last], edges away from the spatial boundary.
  auto window_norm = [&](auto&& difference_at) {
    double sum = 0.0;
    for (std::size_t k = report.window_first; k <= report.window_last; ++k)
      for (std::size_t e = 0; e < space.edge_count(); ++e) {
        const auto& ed = space.edge(e);
        if (space.is_boundary(ed.u) || space.is_boundary(ed.v)) continue;
        const double g = std::abs(difference_at(k, ed.u) - difference_at(k, ed.v)) / ed.length;
        sum += std::pow(g, p) * ed.measure * grid.dt();
      }
    return std::pow(sum, 1.0 / p);
  };

  for (std::size_t j : shift_steps) {
    if (j == 0) throw ParameterError("shifts must be positive grid multiples");
    const double s = static_cast<double>(j) * grid.dt();
    if (j > report.window_first) {
      report.shifts.push_back({s, 0.0, true});
      continue;
    }
    const double norm = window_norm([&](std::size_t k, std::size_t i) { return u(k - j, i) - u(k, i); });
    report.shifts.push_back({s, norm, false});
  }

  for (double eps : widths) {
    const MollifierKernel kernel(eps, grid.dt());
    const std::size_t J = kernel.reach();
    if (J > report.window_first || report.window_last + J > N) {
      report.widths.push_back({eps, 0.0, true});
      continue;
    }
    const auto smooth = mollify_time(u, kernel);
    const double norm =
        window_norm([&](std::size_t k, std::size_t i) { return smooth.field(k, i) - u(k, i); });
    report.widths.push_back({eps, norm, false});
  }

  auto fit = [](const std::vector<ConvergenceRow>& rows) -> std::optional<double> {
    std::vector<double> x, y;
    for (const auto& r : rows)
      if (!r.skipped && r.norm > 0.0) {
        x.push_back(r.parameter);
        y.push_back(r.norm);
      }
    if (x.size() < 2) return std::nullopt;
    return loglog_slope(x, y);
  };
  report.shift_slope = fit(report.shifts);
  report.width_slope = fit(report.widths);
  return report;
}

}  // namespace pqm::calculus
