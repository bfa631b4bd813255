#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "pqm/errors.hpp"
#include "pqm/solver.hpp"

namespace pqm::solver {

namespace {

struct Problem {
  const mesh::Space& space;
  std::span<const double> prev;
  double p;
  double dt;
  double kappa;
  std::vector<std::ptrdiff_t> slot;  // unknown index per vertex, -1 on the boundary
  std::size_t unknowns = 0;
};

// Edge potential (1/p) ((s^2 + kappa^2)^(p/2)) and its first two
// derivatives in s. p = 2 is kept exactly quadratic.
struct EdgeTerms {
  double value, first, second;
};

EdgeTerms edge_terms(double s, double p, double kappa) {
  if (p == 2.0) return {0.5 * s * s, s, 1.0};
  const double q = s * s + kappa * kappa;
  const double qp = std::pow(q, 0.5 * p - 1.0);
  return {q * qp / p, qp * s, qp / q * ((p - 1.0) * s * s + kappa * kappa)};
}

double functional(const Problem& pr, std::span<const double> w) {
  double J = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - pr.prev[i];
    J += pr.space.measure(i) * d * d / (2.0 * pr.dt);
  }
  for (const auto& e : pr.space.edges()) {
    const double s = (w[e.u] - w[e.v]) / e.length;
    J += e.measure * edge_terms(s, pr.p, pr.kappa).value;
  }
  return J;
}

Eigen::VectorXd gradient(const Problem& pr, std::span<const double> w) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pr.unknowns));
  for (std::size_t i = 0; i < w.size(); ++i)
    if (pr.slot[i] >= 0) g[pr.slot[i]] += pr.space.measure(i) * (w[i] - pr.prev[i]) / pr.dt;
  for (const auto& e : pr.space.edges()) {
    const double s = (w[e.u] - w[e.v]) / e.length;
    const double flux = e.measure * edge_terms(s, pr.p, pr.kappa).first / e.length;
    if (pr.slot[e.u] >= 0) g[pr.slot[e.u]] += flux;
    if (pr.slot[e.v] >= 0) g[pr.slot[e.v]] -= flux;
  }
  return g;
}

// With `lagged` the edge weight is psi'(s)/s instead of psi''(s). For p < 2
// that weight dominates psi'' and the quadratic model majorizes J, so the
// full step always descends; Newton overshoots by 1/(p-1) where |s| >> kappa.
Eigen::SparseMatrix<double> hessian(const Problem& pr, std::span<const double> w, bool lagged = false) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(pr.unknowns + 4 * pr.space.edge_count());
  for (std::size_t i = 0; i < w.size(); ++i)
    if (pr.slot[i] >= 0) trips.emplace_back(pr.slot[i], pr.slot[i], pr.space.measure(i) / pr.dt);
  for (const auto& e : pr.space.edges()) {
    const double s = (w[e.u] - w[e.v]) / e.length;
    double curv = edge_terms(s, pr.p, pr.kappa).second;
    if (lagged) curv = std::pow(s * s + pr.kappa * pr.kappa, 0.5 * pr.p - 1.0);
    const double c = e.measure * curv / (e.length * e.length);
    const auto a = pr.slot[e.u], b = pr.slot[e.v];
    if (a >= 0) trips.emplace_back(a, a, c);
    if (b >= 0) trips.emplace_back(b, b, c);
    if (a >= 0 && b >= 0) {
      trips.emplace_back(a, b, -c);
      trips.emplace_back(b, a, -c);
    }
  }
  const auto n = static_cast<Eigen::Index>(pr.unknowns);
  Eigen::SparseMatrix<double> H(n, n);
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

// Mass-scaled gradient: an upper bound on the distance to the minimizer in
// the mass norm, since the Hessian dominates M/dt.
double residual(const Problem& pr, const Eigen::VectorXd& g) {
  double r = 0.0;
  for (std::size_t i = 0; i < pr.slot.size(); ++i)
    if (pr.slot[i] >= 0) r = std::max(r, pr.dt * std::abs(g[pr.slot[i]]) / pr.space.measure(i));
  return r;
}

std::vector<double> moved(const Problem& pr, std::span<const double> w, const Eigen::VectorXd& d, double t) {
  std::vector<double> out(w.begin(), w.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (pr.slot[i] >= 0) out[i] += t * d[pr.slot[i]];
  return out;
}

// Backtracking Armijo search along d; empty on failure. The decrease must be
// strict, otherwise steps below the rounding level of J pass trivially.
std::optional<std::vector<double>> line_search(const Problem& pr, std::span<const double> w,
                                               const Eigen::VectorXd& g, const Eigen::VectorXd& d) {
  const double J0 = functional(pr, w);
  const double slope = g.dot(d);
  if (!(slope < 0.0)) return std::nullopt;
  for (double t = 1.0; t > 1e-12; t *= 0.5) {
    auto trial = moved(pr, w, d, t);
    const double J = functional(pr, trial);
    if (J < J0 && J <= J0 + 1e-4 * t * slope) return trial;
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(StartMode m) { return m == StartMode::Previous ? "previous" : "zero"; }

StartMode start_from_string(const std::string& s) {
  if (s == "previous") return StartMode::Previous;
  if (s == "zero") return StartMode::Zero;
  throw ParameterError("unknown start mode '" + s + "' (previous | zero)");
}

double step_functional(const mesh::Space& space, std::span<const double> w, std::span<const double> prev,
                       double p, double dt, double kappa) {
  Problem pr{space, prev, p, dt, kappa, {}, 0};
  return functional(pr, w);
}

double slice_energy(const mesh::Space& space, std::span<const double> slice, double p) {
  double E = 0.0;
  for (const auto& e : space.edges()) {
    const double g = std::abs(slice[e.u] - slice[e.v]) / e.length;
    E += e.measure * (p == 2.0 ? g * g : std::pow(g, p));
  }
  return E;
}

StepResult p_parabolic_step(const mesh::Space& space, std::span<const double> prev,
                            std::span<const double> boundary, double p, double dt, const StepOptions& options) {
  const std::size_t n = space.vertex_count();
  if (!(p > 1.0 && std::isfinite(p))) throw ParameterError("exponent must satisfy 1 < p < inf");
  if (!(dt > 0.0 && std::isfinite(dt))) throw ParameterError("time step must be positive");
  if (!(options.tol > 0.0)) throw ParameterError("inner tolerance must be positive");
  if (options.max_iterations < 1) throw ParameterError("max iterations must be >= 1");
  if (prev.size() != n || boundary.size() != n) throw ParameterError("slice length does not match the space");

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(prev[i])) throw ParameterError("previous slice has a non-finite value");
    scale = std::max(scale, std::abs(prev[i]));
    if (space.is_boundary(i)) {
      if (!std::isfinite(boundary[i])) throw ParameterError("boundary data has a non-finite value");
      scale = std::max(scale, std::abs(boundary[i]));
    }
  }

  Problem pr{space, prev, p, dt, p == 2.0 ? 0.0 : 1e-8 * (scale > 0.0 ? scale : 1.0), std::vector<std::ptrdiff_t>(n, -1), 0};
  for (std::size_t i = 0; i < n; ++i)
    if (!space.is_boundary(i)) pr.slot[i] = static_cast<std::ptrdiff_t>(pr.unknowns++);

  StepResult res;
  res.kappa = pr.kappa;
  std::vector<double> w(n);
  std::vector<double> start(prev.begin(), prev.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (space.is_boundary(i)) start[i] = w[i] = boundary[i];
    else w[i] = options.start == StartMode::Previous ? prev[i] : 0.0;
  }
  res.J_initial = functional(pr, start);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analysed = false;
  Eigen::VectorXd g = gradient(pr, w);
  res.residual = residual(pr, g);
  while (res.residual > options.tol) {
    if (res.iterations >= options.max_iterations)
      throw ConvergenceError("implicit step did not converge in " + std::to_string(options.max_iterations) +
                                 " iterations (residual " + std::to_string(res.residual) + ")",
                             w, res.residual, res.iterations);
    ++res.iterations;

    std::optional<std::vector<double>> next;
    const auto H = hessian(pr, w);
    if (!analysed) {
      ldlt.analyzePattern(H);
      analysed = true;
    }
    ldlt.factorize(H);
    if (ldlt.info() == Eigen::Success) {
      const Eigen::VectorXd d = ldlt.solve(-g);
      if (ldlt.info() == Eigen::Success && d.allFinite()) {
        next = line_search(pr, w, g, d);
        if (!next) {
          // At the rounding floor J no longer resolves the decrease; accept
          // the full Newton step when it shrinks the gradient.
          auto full = moved(pr, w, d, 1.0);
          if (residual(pr, gradient(pr, full)) < res.residual) next = std::move(full);
        }
      }
    }
    if (pr.p < 2.0) {
      ldlt.factorize(hessian(pr, w, true));
      if (ldlt.info() == Eigen::Success) {
        const Eigen::VectorXd d = ldlt.solve(-g);
        if (ldlt.info() == Eigen::Success && d.allFinite()) {
          auto full = moved(pr, w, d, 1.0);
          const double Jl = functional(pr, full);
          if (Jl < functional(pr, w) && (!next || Jl < functional(pr, *next))) next = std::move(full);
        }
      }
    }
    if (!next) {
      Eigen::VectorXd d(static_cast<Eigen::Index>(pr.unknowns));
      for (std::size_t i = 0; i < n; ++i)
        if (pr.slot[i] >= 0) d[pr.slot[i]] = -dt * g[pr.slot[i]] / space.measure(i);
      next = line_search(pr, w, g, d);
      ++res.gradient_steps;
    }
    if (!next)
      throw ConvergenceError("implicit step stalled (residual " + std::to_string(res.residual) + ")", w,
                             res.residual, res.iterations);
    w = std::move(*next);
    g = gradient(pr, w);
    res.residual = residual(pr, g);
  }
  res.J_final = functional(pr, w);
  res.slice = std::move(w);
  return res;
}

SolveResult solve_p_parabolic(calculus::SpacePtr space, mesh::TimeGrid grid, const SolveConfig& config) {
  const std::size_t n = space->vertex_count();
  if (config.initial.size() != n) throw ParameterError("initial data must have one value per vertex");
  for (double v : config.initial)
    if (!std::isfinite(v)) throw ParameterError("initial data must be finite");

  std::vector<double> values(n * grid.slices());
  std::copy(config.initial.begin(), config.initial.end(), values.begin());
  RunMetadata meta;
  meta.energy.push_back(slice_energy(*space, config.initial, config.p));

  std::vector<double> boundary(config.initial);
  for (std::size_t k = 1; k < grid.slices(); ++k) {
    if (config.boundary)
      for (std::size_t b : space->boundary()) boundary[b] = config.boundary(b, grid.time(k));
    const std::span<const double> prev(values.data() + (k - 1) * n, n);
    const auto step = p_parabolic_step(*space, prev, boundary, config.p, grid.dt(), config.step);
    std::copy(step.slice.begin(), step.slice.end(), values.begin() + static_cast<std::ptrdiff_t>(k * n));
    meta.total_iterations += step.iterations;
    meta.max_iterations = std::max(meta.max_iterations, step.iterations);
    meta.gradient_steps += step.gradient_steps;
    meta.max_residual = std::max(meta.max_residual, step.residual);
    meta.kappa_max = std::max(meta.kappa_max, step.kappa);
    meta.energy.push_back(slice_energy(*space, step.slice, config.p));
  }
  return {SpaceTimeField(std::move(space), grid, std::move(values)), std::move(meta)};
}

}  // namespace pqm::solver
