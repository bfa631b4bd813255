#include <cmath>

#include "pqm/errors.hpp"
#include "pqm/solver.hpp"

namespace pqm::solver {

StructureConstants StructureConstants::make(double c1, double c2, double p) {
  if (!(std::isfinite(c1) && c1 > 0.0)) throw ParameterError("c1 must be positive");
  if (!(std::isfinite(c2) && c2 >= c1)) throw ParameterError("c2 must satisfy c1 <= c2 < inf");
  if (!(std::isfinite(p) && p > 1.0)) throw ParameterError("exponent must satisfy 1 < p < inf");
  return {c1, c2, p};
}

YoungSplit young_split(const StructureConstants& sc, double s) {
  const double lambda_p = sc.p * sc.c1 - sc.c2 * (sc.p - 1.0) * s;  // p times the absorbed coercivity
  if (!(s > 0.0 && lambda_p > 0.0)) throw ParameterError("Young parameter outside (0, p c1 / (c2 (p - 1)))");
  return {sc.p / lambda_p, sc.c2 * std::pow(s, 1.0 - sc.p) / lambda_p};
}

quasimin::QuasiminConstants constants_from_structure(const StructureConstants& sc, StructureMode mode,
                                                     std::optional<double> alpha) {
  using quasimin::ConstantsMode;
  const double p = sc.p, c1 = sc.c1, c2 = sc.c2;
  if (mode == StructureMode::MinK) {
    // At s = c1/c2 the split collapses to the closed forms below.
    return quasimin::QuasiminConstants::make(p / c1, std::pow(c2 / c1, p), ConstantsMode::DerivedMinK);
  }
  if (!alpha) throw ParameterError("fixed-alpha mode needs alpha");
  const double a = *alpha;
  if (!(std::isfinite(a) && a > 1.0 / c1))
    throw ParameterError("absorption impossible: fixed-alpha mode needs alpha > 1/c1");
  const double s = p * (c1 - 1.0 / a) / (c2 * (p - 1.0));
  const double K = a * c2 * std::pow(s, 1.0 - p) / p;
  return quasimin::QuasiminConstants::make(a, K < 1.0 ? 1.0 : K, ConstantsMode::DerivedFixedAlpha);
}

}  // namespace pqm::solver
