#include <algorithm>
#include <cmath>

#include "pqm/errors.hpp"
#include "pqm/quasimin.hpp"

namespace pqm::quasimin {

namespace {

inline double power(double x, double p) { return p == 2.0 ? x * x : std::pow(x, p); }

void check_exponent(double p) {
  if (!(p > 1.0 && std::isfinite(p))) throw ParameterError("exponent must satisfy 1 < p < inf");
}

std::string node_name(const mesh::Space& space, std::size_t k, std::size_t i) {
  return "(slice " + std::to_string(k) + ", vertex '" + space.vertex(i).id + "')";
}

void require_admissible(const mesh::Space& space, const NodeSet& set, RegionTag tag) {
  const std::size_t last = set.slices() - 1;
  for (std::size_t k = 0; k < set.slices(); ++k)
    for (std::size_t i = 0; i < set.vertices(); ++i)
      if (set.contains(k, i) && (k == 0 || k == last || space.is_boundary(i)))
        throw PreconditionError(to_string(tag) + " region is not compactly contained in the cylinder: node " +
                                node_name(space, k, i) + " lies on the parabolic boundary or final slice");
}

void require_contains_nonzero(const SpaceTimeField& phi, const NodeSet& set, RegionTag tag) {
  for (std::size_t k = 0; k < phi.slice_count(); ++k)
    for (std::size_t i = 0; i < phi.vertex_count(); ++i)
      if (phi(k, i) != 0.0 && !set.contains(k, i))
        throw PreconditionError("{phi != 0} is not contained in the " + to_string(tag) + " region: phi is nonzero at " +
                                node_name(phi.space(), k, i));
}

void require_sign(const SpaceTimeField& phi, Variant variant) {
  if (variant == Variant::Quasiminimizer) return;
  for (double v : phi.values()) {
    if (variant == Variant::Super && v < 0.0)
      throw PreconditionError("super variant needs a nonnegative test function");
    if (variant == Variant::Sub && v > 0.0)
      throw PreconditionError("sub variant needs a nonpositive test function");
  }
}

}  // namespace

std::string to_string(ConstantsMode mode) {
  switch (mode) {
    case ConstantsMode::Given: return "given";
    case ConstantsMode::DerivedMinK: return "derived-min-K";
    case ConstantsMode::DerivedFixedAlpha: return "derived-fixed-alpha";
  }
  return "?";
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Quasiminimizer: return "quasiminimizer";
    case Variant::Super: return "super";
    case Variant::Sub: return "sub";
  }
  return "?";
}

QuasiminConstants QuasiminConstants::make(double alpha, double K, ConstantsMode mode) {
  if (!(std::isfinite(alpha) && alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (!(std::isfinite(K) && K >= 1.0)) throw ParameterError("K must be >= 1");
  return {alpha, K, mode};
}

EnergyTerms energy_terms_on(const SpaceTimeField& u, const SpaceTimeField& phi,
                            const SpaceTimeField& phi_t, const NodeSet& set, double p) {
  const auto& space = u.space();
  const double dt = u.grid().dt();
  EnergyTerms t;
  for (std::size_t k = 0; k < u.slice_count(); ++k) {
    for (std::size_t i = 0; i < u.vertex_count(); ++i)
      if (set.contains(k, i)) {
        t.A += u(k, i) * phi_t(k, i) * space.measure(i) * dt;
        ++t.nodes;
      }
    for (std::size_t e = 0; e < space.edge_count(); ++e) {
      if (!set.contains_edge(space, k, e)) continue;
      const auto& ed = space.edge(e);
      const double gu = std::abs(u(k, ed.u) - u(k, ed.v)) / ed.length;
      const double gw = std::abs((u(k, ed.u) + phi(k, ed.u)) - (u(k, ed.v) + phi(k, ed.v))) / ed.length;
      t.B += power(gu, p) * ed.measure * dt;
      t.C += power(gw, p) * ed.measure * dt;
      ++t.edges;
    }
  }
  return t;
}

EnergyTerms energy_terms(const SpaceTimeField& u, const SpaceTimeField& phi, const RegionForm& region,
                         double p) {
  check_exponent(p);
  if (!u.same_cylinder(phi)) throw ParameterError("u and phi live on different cylinders");
  const NodeSet set = resolve_region(phi, region);
  if (set.vertices() != u.vertex_count() || set.slices() != u.slice_count())
    throw ParameterError("region does not match the cylinder");
  require_admissible(u.space(), set, region.tag);
  require_contains_nonzero(phi, set, region.tag);
  auto terms = energy_terms_on(u, phi, calculus::time_derivative(phi), set, p);
  terms.tag = region.tag;
  return terms;
}

double default_tolerance(const mesh::Space& space, const mesh::TimeGrid& grid, const EnergyTerms& terms) {
  return 10.0 * (space.max_edge_length() + grid.dt()) * (terms.B + terms.C);
}

MarginReport check_inequality(const SpaceTimeField& u, const SpaceTimeField& phi,
                              const QuasiminConstants& constants, double p, const RegionForm& form,
                              std::optional<double> tol, Variant variant) {
  require_sign(phi, variant);
  const auto terms = energy_terms(u, phi, form, p);
  MarginReport r{terms, constants, variant, p, 0.0, 0.0, false, calculus::digest(u), calculus::digest(phi)};
  r.tol = tol ? *tol : default_tolerance(u.space(), u.grid(), terms);
  if (!(r.tol >= 0.0)) throw ParameterError("tolerance must be nonnegative");
  r.margin = constants.K * terms.C - (constants.alpha * terms.A + terms.B);
  r.pass = r.margin >= -r.tol;
  return r;
}

SpaceTimeField truncate_test(const SpaceTimeField& phi, unsigned i) {
  if (i == 0) throw ParameterError("truncation index must be >= 1");
  const double c = 1.0 / static_cast<double>(i);
  std::vector<double> out(phi.values().begin(), phi.values().end());
  for (double& v : out) {
    const double pos = std::max(v - c, 0.0);
    const double neg = std::max(-(v + c), 0.0);
    v = pos - neg;
  }
  return {phi.space_ptr(), phi.grid(), std::move(out)};
}

MollifiedMarginReport mollified_inequality_check(const SpaceTimeField& u, const SpaceTimeField& phi,
                                                 const calculus::MollifierKernel& kernel,
                                                 const QuasiminConstants& constants, double p,
                                                 std::optional<double> tol) {
  check_exponent(p);
  if (!u.same_cylinder(phi)) throw ParameterError("u and phi live on different cylinders");
  require_sign(phi, Variant::Super);
  const NodeSet set = nonzero_set(phi);
  require_admissible(u.space(), set, RegionTag::NonzeroSet);

  const auto& space = u.space();
  const auto& grid = u.grid();
  const std::size_t J = kernel.reach();
  const std::size_t N = grid.steps();
  const double dt = grid.dt();
  if (std::abs(kernel.dt() - dt) > 1e-12 * dt) throw ParameterError("kernel built for a different time step");
  for (std::size_t k = 0; k < u.slice_count(); ++k)
    for (std::size_t i = 0; i < u.vertex_count(); ++i)
      if (set.contains(k, i) && (k < J + 1 || k + J + 1 > N))
        throw PreconditionError("mollifier half-width too large: the kernel window around slice " +
                                std::to_string(k) + " leaves the time grid");

  MollifiedMarginReport r{};
  r.nodes = set.size();
  if (r.nodes == 0) {
    r.tol = tol.value_or(0.0);
    r.pass = true;
    return r;
  }

  const auto smooth = calculus::mollify_time(u, kernel).field;
  const auto Jd = static_cast<std::ptrdiff_t>(J);
  double gradient_sum = 0.0, shifted_sum = 0.0, time_sum = 0.0;
  for (std::size_t k = 0; k < u.slice_count(); ++k) {
    for (std::size_t i = 0; i < u.vertex_count(); ++i) {
      if (!set.contains(k, i)) continue;
      const double du = (smooth(k + 1, i) - smooth(k - 1, i)) / (2.0 * dt);
      time_sum += du * phi(k, i) * space.measure(i) * dt;
    }
    for (std::size_t e = 0; e < space.edge_count(); ++e) {
      if (!set.contains_edge(space, k, e)) continue;
      const auto& ed = space.edge(e);
      double g_avg = 0.0, shifted_avg = 0.0;
      for (std::ptrdiff_t j = -Jd; j <= Jd; ++j) {
        const double w = kernel.weight(j);
        const auto ks = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) - j);
        const double gu = std::abs(u(ks, ed.u) - u(ks, ed.v)) / ed.length;
        const double gs =
            std::abs((u(ks, ed.u) + phi(k, ed.u)) - (u(ks, ed.v) + phi(k, ed.v))) / ed.length;
        g_avg += w * power(gu, p);
        shifted_avg += w * power(gs, p);
      }
      gradient_sum += g_avg * ed.measure * dt;
      shifted_sum += shifted_avg * ed.measure * dt;
    }
  }
  r.time_term = -constants.alpha * time_sum;
  r.gradient_term = gradient_sum;
  r.rhs = constants.K * shifted_sum;
  r.margin = r.rhs - (r.time_term + r.gradient_term);
  EnergyTerms scale;
  scale.B = gradient_sum;
  scale.C = shifted_sum;
  r.tol = tol ? *tol : default_tolerance(space, grid, scale);
  r.pass = r.margin >= -r.tol;
  return r;
}

}  // namespace pqm::quasimin
