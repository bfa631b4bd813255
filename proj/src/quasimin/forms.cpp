#include <algorithm>
#include <cmath>

#include "pqm/errors.hpp"
#include "pqm/quasimin.hpp"

namespace pqm::quasimin {

namespace {

// Rounding slack for the exact identities: the sums are built from the same
// per-node and per-edge summands, so only reassociation error separates them.
double slack(std::initializer_list<double> magnitudes) {
  double s = 0.0;
  for (double m : magnitudes) s += std::abs(m);
  return 1e-12 * (s + 1e-300);
}

}  // namespace

FormsReport check_all_forms(const SpaceTimeField& u, const SpaceTimeField& phi,
                            const QuasiminConstants& constants, double p, std::optional<double> tol,
                            Variant variant) {
  const NodeSet nz = nonzero_set(phi);
  const NodeSet open = open_enclosure(phi);

  // One tolerance for all four forms, scaled on the largest region, so the
  // verdicts are comparable.
  if (!tol) {
    const auto big = energy_terms(u, phi, RegionForm::open_set(open), p);
    tol = default_tolerance(u.space(), u.grid(), big);
  }

  FormsReport r{
      check_inequality(u, phi, constants, p, RegionForm::open_set(open), tol, variant),
      check_inequality(u, phi, constants, p, RegionForm::measurable_set(nz), tol, variant),
      check_inequality(u, phi, constants, p, RegionForm::nonzero_set(), tol, variant),
      check_inequality(u, phi, constants, p, RegionForm::support(), tol, variant),
      {},
      true,
      false};

  const double a = constants.alpha, K = constants.K;
  const auto& N = r.nonzero_set.terms;
  const auto& S = r.support.terms;
  const auto& U = r.open_set.terms;

  {
    const double lhs = r.measurable_set.margin, rhs = r.nonzero_set.margin;
    r.chain.push_back({"measurable == nonzero", lhs, rhs,
                       std::abs(lhs - rhs) <= slack({K * N.C, a * N.A, N.B})});
  }
  {
    // Terms on supp(phi) \ {phi != 0}: nodes where phi = 0 but its time
    // difference need not be, and edges leaving {phi != 0}.
    const double extra = (S.B - N.B) + a * (S.A - N.A);
    const double lhs = r.nonzero_set.margin, rhs = r.support.margin + extra;
    r.chain.push_back({"nonzero <= support + extra terms on support \\ nonzero", lhs, rhs,
                       lhs <= rhs + slack({K * S.C, a * S.A, S.B, K * N.C, a * N.A, N.B})});
  }
  {
    // On open \ supp(phi) both phi and its time difference vanish, so the
    // only contribution is (K - 1) * B there.
    const double lhs = r.open_set.margin, rhs = r.support.margin + (K - 1.0) * (U.B - S.B);
    r.chain.push_back({"open == support + (K - 1) * B on open \\ support", lhs, rhs,
                       std::abs(lhs - rhs) <= slack({K * U.C, a * U.A, K * U.B, K * S.C, a * S.A, S.B})});
  }
  r.chain.push_back({"support pass => open pass", r.support.pass ? 1.0 : 0.0, r.open_set.pass ? 1.0 : 0.0,
                     !r.support.pass || r.open_set.pass});

  for (const auto& link : r.chain) r.chain_holds = r.chain_holds && link.holds;
  r.all_pass = r.open_set.pass && r.measurable_set.pass && r.nonzero_set.pass && r.support.pass;
  return r;
}

}  // namespace pqm::quasimin
