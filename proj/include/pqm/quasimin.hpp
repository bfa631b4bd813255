#pragma once

// The parabolic quasiminimizer energy inequality
//
//     alpha * A + B <= K * C,
//     A = sum u * dphi/dt dnu,  B = sum g_u^p dnu,  C = sum g_{u+phi}^p dnu,
//
// evaluated over discrete space-time regions, its equivalent region forms,
// the time-mollified form, and numerical estimation of the smallest K.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pqm/calculus.hpp"

namespace pqm::quasimin {

using calculus::NodeSet;
using calculus::SpaceTimeField;

enum class RegionTag { OpenSet, MeasurableSet, NonzeroSet, Support };

std::string to_string(RegionTag tag);

/// Region of integration. OpenSet and MeasurableSet carry an explicit node
/// set; NonzeroSet and Support are derived from the test function.
struct RegionForm {
  RegionTag tag;
  std::optional<NodeSet> set;

  static RegionForm open_set(NodeSet s) { return {RegionTag::OpenSet, std::move(s)}; }
  static RegionForm measurable_set(NodeSet s) { return {RegionTag::MeasurableSet, std::move(s)}; }
  static RegionForm nonzero_set() { return {RegionTag::NonzeroSet, std::nullopt}; }
  static RegionForm support() { return {RegionTag::Support, std::nullopt}; }
};

// Discrete compact containment: no spatial boundary vertex and neither the
// first nor the last time slice.
bool is_admissible(const mesh::Space& space, const NodeSet& set);
NodeSet interior(const mesh::Space& space, const mesh::TimeGrid& grid);

/// {phi != 0}.
NodeSet nonzero_set(const SpaceTimeField& phi);
/// Nodes within one step (a spatial edge or a time step) of the set,
/// intersected with the admissible interior.
NodeSet dilate(const mesh::Space& space, const NodeSet& set);
/// Discrete support: the one-step closure of {phi != 0} inside the interior.
/// It holds every node where phi or its central time difference is nonzero
/// and both endpoints of every edge along which phi varies.
NodeSet support_set(const SpaceTimeField& phi);
/// Two-step enclosure; an open set compactly containing the support.
NodeSet open_enclosure(const SpaceTimeField& phi);

/// The node set a region form denotes for the given test function.
NodeSet resolve_region(const SpaceTimeField& phi, const RegionForm& form);

struct EnergyTerms {
  double A = 0.0;  ///< sum over region nodes of u * dphi/dt * mu * dt
  double B = 0.0;  ///< sum over region edges of g_u^p * m_e * dt
  double C = 0.0;  ///< sum over region edges of g_{u+phi}^p * m_e * dt
  RegionTag tag = RegionTag::OpenSet;
  std::size_t nodes = 0;
  std::size_t edges = 0;
};

/// Throws PreconditionError when the region is not admissible or does not
/// contain {phi != 0}.
EnergyTerms energy_terms(const SpaceTimeField& u, const SpaceTimeField& phi,
                         const RegionForm& region, double p);

/// Same sums over an explicit node set, without containment checks.
EnergyTerms energy_terms_on(const SpaceTimeField& u, const SpaceTimeField& phi,
                            const SpaceTimeField& phi_t, const NodeSet& set, double p);

enum class ConstantsMode { Given, DerivedMinK, DerivedFixedAlpha };
std::string to_string(ConstantsMode mode);

struct QuasiminConstants {
  double alpha;
  double K;
  ConstantsMode mode;

  /// Validates alpha > 0 and K >= 1.
  static QuasiminConstants make(double alpha, double K, ConstantsMode mode = ConstantsMode::Given);
};

/// Quasiminimizer: phi unrestricted. Super: phi >= 0. Sub: phi <= 0.
enum class Variant { Quasiminimizer, Super, Sub };
std::string to_string(Variant v);

struct MarginReport {
  EnergyTerms terms;
  QuasiminConstants constants;
  Variant variant;
  double p;
  double tol;
  double margin;  ///< K*C - (alpha*A + B)
  bool pass;      ///< margin >= -tol
  std::string u_digest;
  std::string phi_digest;
};

/// 10 * (h + dt) * (B + C), h the largest edge length.
double default_tolerance(const mesh::Space& space, const mesh::TimeGrid& grid, const EnergyTerms& terms);

MarginReport check_inequality(const SpaceTimeField& u, const SpaceTimeField& phi,
                              const QuasiminConstants& constants, double p, const RegionForm& form,
                              std::optional<double> tol = std::nullopt,
                              Variant variant = Variant::Quasiminimizer);

struct ChainLink {
  std::string name;
  double lhs;
  double rhs;
  bool holds;  ///< lhs <= rhs, or lhs == rhs for identities, up to rounding
};

struct FormsReport {
  MarginReport open_set;
  MarginReport measurable_set;
  MarginReport nonzero_set;
  MarginReport support;
  std::vector<ChainLink> chain;
  bool chain_holds;
  bool all_pass;
};

/// Evaluates the inequality on the open enclosure, on {phi != 0} taken as a
/// measurable set, on the nonzero set and on the support, and verifies the
/// exact relations linking the four margins:
///   measurable == nonzero (same set),
///   nonzero <= support + (B + alpha * A) on support \ {phi != 0},
///   open == support + (K - 1) * B on open \ support  (phi vanishes there).
FormsReport check_all_forms(const SpaceTimeField& u, const SpaceTimeField& phi,
                            const QuasiminConstants& constants, double p,
                            std::optional<double> tol = std::nullopt,
                            Variant variant = Variant::Quasiminimizer);

/// psi_i = (phi - 1/i)_+ - (phi + 1/i)_-.
SpaceTimeField truncate_test(const SpaceTimeField& phi, unsigned i);

struct MollifiedMarginReport {
  double time_term;      ///< -alpha * sum d(u_eps)/dt * phi
  double gradient_term;  ///< sum (g_u^p)_eps
  double rhs;            ///< K * sum over shifts of eta(s) g^p_{u(t-s)+phi(t)}
  double margin;
  bool pass;
  double tol;
  std::size_t nodes;
};

/// The inequality after time mollification, over {phi != 0}; needs phi >= 0
/// and every kernel window around the nonzero set inside the grid.
MollifiedMarginReport mollified_inequality_check(const SpaceTimeField& u, const SpaceTimeField& phi,
                                                 const calculus::MollifierKernel& kernel,
                                                 const QuasiminConstants& constants, double p,
                                                 std::optional<double> tol = std::nullopt);

// --- Test families -------------------------------------------------------

enum class Sign { Nonnegative, Nonpositive, Unrestricted };
std::string to_string(Sign s);
Sign sign_from_string(const std::string& s);

struct Range {
  double lo;
  double hi;
};

struct FamilySpec {
  std::size_t count = 1;
  Range spatial_width{0.1, 0.3};   ///< half-width of the spatial hat (graph distance)
  Range temporal_width{0.1, 0.3};  ///< half-width of the temporal hat (time units)
  Range amplitude{0.05, 0.5};      ///< magnitude range
  Sign sign = Sign::Unrestricted;
  std::uint64_t seed = 0;
};

/// phi(x, t) = amplitude * hat(d(center, x) / spatial_radius)
///                       * hat((t - time_center) / time_radius).
struct BumpParams {
  std::size_t center;
  double spatial_radius;
  double time_center;
  double time_radius;
  double amplitude;

  bool operator==(const BumpParams&) const = default;
};

/// Builds bump fields and checks that their nonzero set stays away from the
/// boundary vertices, their neighbours, and the first/last two slices, so
/// that the discrete support is itself admissible.
class BumpBuilder {
 public:
  BumpBuilder(calculus::SpacePtr space, mesh::TimeGrid grid);

  bool admissible(const BumpParams& b) const;
  SpaceTimeField build(const BumpParams& b) const;

  const calculus::SpacePtr& space_ptr() const noexcept { return space_; }
  const mesh::TimeGrid& grid() const noexcept { return grid_; }

 private:
  calculus::SpacePtr space_;
  mesh::TimeGrid grid_;
  std::vector<char> forbidden_;
};

struct TestFamily {
  FamilySpec spec;
  std::vector<BumpParams> params;
  std::vector<SpaceTimeField> members;
};

/// Deterministic under spec.seed (bit-identical across runs and platforms).
TestFamily generate_test_family(calculus::SpacePtr space, mesh::TimeGrid grid, const FamilySpec& spec);

/// mt19937_64 with explicit bit-to-real transforms. The standard
/// distributions are implementation-defined; these are not, so families
/// replay exactly on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }  ///< [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

struct KEstimate {
  double K = 1.0;          ///< max(1, best ratio)
  double ratio = 0.0;      ///< best (alpha*A + B)/C found
  bool inconclusive = false;  ///< every family member had C == 0
  bool unbounded = false;     ///< some member had C == 0 and alpha*A + B > 0
  std::size_t best_member = 0;
  std::size_t evaluations = 0;
  std::vector<double> member_ratios;  ///< NaN where C == 0
  BumpParams witness_params{};
  std::optional<SpaceTimeField> witness;
  EnergyTerms witness_terms;
};

/// sup over explored phi of (alpha*A + B) / C on the support of phi,
/// refined by coordinate search from the best family member. `budget`
/// counts search proposals after the family sweep.
KEstimate estimate_min_K(const SpaceTimeField& u, double alpha, double p, const TestFamily& family,
                         std::size_t budget);

// --- Staircase -------------------------------------------------------------

enum class StaircaseReading {
  Harmonic,  ///< slope 1/i on (i-1, i]: continuous
  Printed,   ///< slope 1/k on every segment, as typeset
};

/// u(x) = (x - (i-1)) * slope_i + sum_{j<i} 1/j on (i-1, i], time-constant,
/// on the uniform mesh of [0, L] with `density` cells per unit length.
SpaceTimeField staircase_function(double length, std::size_t density, mesh::TimeGrid grid,
                                  StaircaseReading reading = StaircaseReading::Harmonic,
                                  double printed_k = 1.0);

/// Value of the staircase at a point.
double staircase_value(double x, StaircaseReading reading = StaircaseReading::Harmonic,
                       double printed_k = 1.0);

}  // namespace pqm::quasimin
