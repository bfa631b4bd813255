#pragma once

// Implicit variational time stepping for the graph p-parabolic equation,
// analytic heat solutions on the unit interval, structure constants, and
// the comparison-principle checks.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqm/calculus.hpp"
#include "pqm/quasimin.hpp"

namespace pqm::solver {

using calculus::SpaceTimeField;

// --- Implicit step ---------------------------------------------------------

enum class StartMode { Previous, Zero };
std::string to_string(StartMode m);
StartMode start_from_string(const std::string& s);

struct StepOptions {
  double tol = 1e-11;          ///< on the mass-scaled gradient, max_i dt*|dJ/dw_i|/mu_i
  int max_iterations = 200;
  StartMode start = StartMode::Previous;
};

struct StepResult {
  std::vector<double> slice;
  int iterations = 0;
  int gradient_steps = 0;  ///< fallback steps taken when Newton made no progress
  double residual = 0.0;
  double kappa = 0.0;
  double J_initial = 0.0;  ///< functional at the previous slice (boundary enforced)
  double J_final = 0.0;
};

/// J(w) = sum mu (w - prev)^2 / (2 dt) + (1/p) sum m ((dw/l)^2 + kappa^2)^(p/2).
double step_functional(const mesh::Space& space, std::span<const double> w, std::span<const double> prev,
                       double p, double dt, double kappa = 0.0);

/// Minimizes J over slices equal to `boundary` on boundary vertices (other
/// entries of `boundary` are ignored). Damped Newton with a gradient-descent
/// fallback. Throws ConvergenceError carrying the last iterate.
StepResult p_parabolic_step(const mesh::Space& space, std::span<const double> prev,
                            std::span<const double> boundary, double p, double dt,
                            const StepOptions& options = {});

struct SolveConfig {
  double p = 2.0;
  std::vector<double> initial;  ///< one value per vertex
  /// Boundary value at (vertex, time); empty means the initial values are held.
  std::function<double(std::size_t, double)> boundary;
  StepOptions step;
};

struct RunMetadata {
  int total_iterations = 0;
  int max_iterations = 0;
  int gradient_steps = 0;
  double max_residual = 0.0;
  double kappa_max = 0.0;
  std::vector<double> energy;  ///< sum m |du/l|^p per slice
};

struct SolveResult {
  SpaceTimeField u;
  RunMetadata meta;
};

SolveResult solve_p_parabolic(calculus::SpacePtr space, mesh::TimeGrid grid, const SolveConfig& config);

/// Sum over edges of m |du/l|^p for one slice.
double slice_energy(const mesh::Space& space, std::span<const double> slice, double p);

// --- Heat series -------------------------------------------------------------

/// sum b_n exp(-a (n pi)^2 t) sin(n pi x); sin(n pi x) is exactly 0 when n x is an integer.
double heat_series_value(double a, std::span<const double> coefficients, double x, double t);

/// Samples the series on a space whose vertices carry a first coordinate in [0, 1].
SpaceTimeField heat_series_solution(double a, std::span<const double> coefficients,
                                    calculus::SpacePtr space, mesh::TimeGrid grid);

// --- Structure constants -------------------------------------------------------

struct StructureConstants {
  double c1;
  double c2;
  double p;

  /// 0 < c1 <= c2 < inf, 1 < p < inf.
  static StructureConstants make(double c1, double c2, double p);
};

enum class StructureMode { MinK, FixedAlpha };

/// Young split with parameter s: alpha(s) = p / (p c1 - c2 (p-1) s) and
/// K(s) = c2 s^(1-p) / (p c1 - c2 (p-1) s), valid for 0 < s < p c1 / (c2 (p-1)).
struct YoungSplit {
  double alpha;
  double K;
};
YoungSplit young_split(const StructureConstants& sc, double s);

/// MinK: s = c1/c2, giving (p/c1, (c2/c1)^p). FixedAlpha: the s that yields
/// the requested alpha; needs alpha > 1/c1.
quasimin::QuasiminConstants constants_from_structure(const StructureConstants& sc, StructureMode mode,
                                                     std::optional<double> alpha = std::nullopt);

// --- Comparison ------------------------------------------------------------------

struct CutoffProfile {
  double h;
  double t_prime;
  std::vector<double> values;  ///< one per time slice
};

/// 0 on [0, h], (t-h)/h on [h, 2h], 1 on [2h, t'-h], (t'+h-t)/(2h) on [t'-h, t'+h], 0 after.
double chi_value(double h, double t_prime, double t);
/// Needs 0 < 2h < t' - 2h and t' + h < T.
CutoffProfile chi_cutoff(double h, double t_prime, const mesh::TimeGrid& grid);

struct ComparisonReport {
  double max_excess;  ///< max (v - u)_+
  std::size_t slice;  ///< location of the maximum
  std::size_t vertex;
  double tol;
  bool pass;
};

/// u the super field, v the sub field. Throws PreconditionError when
/// (v - u)_+ exceeds tol on the spatial boundary of some slice.
ComparisonReport comparison_check(const SpaceTimeField& u, const SpaceTimeField& v, double tol);

/// (1/h) sum_{t_k < h} sum_x mu_x (v - u)_+^2 dt.
double initial_condition_residual(const SpaceTimeField& u, const SpaceTimeField& v, double h);

}  // namespace pqm::solver
