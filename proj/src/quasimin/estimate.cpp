#include <algorithm>
#include <cmath>
#include <limits>

#include "pqm/errors.hpp"
#include "pqm/quasimin.hpp"

namespace pqm::quasimin {

namespace {

struct Eval {
  double ratio;  // -inf when inadmissible or C == 0
  bool zero_C;
  bool unbounded;
  EnergyTerms terms;
};

Eval evaluate(const SpaceTimeField& u, const SpaceTimeField& phi, double alpha, double p) {
  const auto region = RegionForm::open_set(support_set(phi));
  const auto t = energy_terms(u, phi, region, p);
  const double num = alpha * t.A + t.B;
  if (t.C > 0.0) return {num / t.C, false, false, t};
  return {-std::numeric_limits<double>::infinity(), true, num > 0.0, t};
}

bool sign_ok(double amp, Sign s) {
  if (amp == 0.0 || !std::isfinite(amp)) return false;
  if (s == Sign::Nonnegative) return amp > 0.0;
  if (s == Sign::Nonpositive) return amp < 0.0;
  return true;
}

}  // namespace

KEstimate estimate_min_K(const SpaceTimeField& u, double alpha, double p, const TestFamily& family,
                         std::size_t budget) {
  if (budget < 1) throw ParameterError("budget must be >= 1");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (family.members.empty()) throw ParameterError("test family is empty");
  if (family.params.size() != family.members.size()) throw ParameterError("family params and members disagree");

  KEstimate est;
  est.member_ratios.assign(family.members.size(), std::numeric_limits<double>::quiet_NaN());
  bool found = false;
  Eval best{};
  for (std::size_t m = 0; m < family.members.size(); ++m) {
    const auto e = evaluate(u, family.members[m], alpha, p);
    ++est.evaluations;
    if (e.unbounded) est.unbounded = true;
    if (e.zero_C) continue;
    est.member_ratios[m] = e.ratio;
    if (!found || e.ratio > best.ratio) {  // strict: ties keep the lowest index
      best = e;
      est.best_member = m;
      found = true;
    }
  }

  if (!found) {
    est.inconclusive = true;
    est.K = est.unbounded ? std::numeric_limits<double>::infinity() : 1.0;
    est.ratio = est.unbounded ? std::numeric_limits<double>::infinity() : 0.0;
    return est;
  }

  // Coordinate search from the best member. Each coordinate is tried up and
  // down; a sweep without improvement halves every step.
  BumpBuilder builder(u.space_ptr(), u.grid());
  BumpParams x = family.params[est.best_member];
  SpaceTimeField witness = family.members[est.best_member];
  double step[4] = {0.25 * std::abs(x.amplitude), 0.25 * x.spatial_radius, 0.25 * x.time_radius,
                    0.25 * x.time_radius};
  const double floor_step[4] = {step[0] * 1e-9, step[1] * 1e-9, step[2] * 1e-9, step[3] * 1e-9};

  std::size_t proposals = 0;
  auto try_candidate = [&](const BumpParams& c) {
    ++proposals;
    if (!sign_ok(c.amplitude, family.spec.sign) || !builder.admissible(c)) return false;
    auto phi = builder.build(c);
    const auto e = evaluate(u, phi, alpha, p);
    ++est.evaluations;
    if (e.unbounded) est.unbounded = true;
    if (e.zero_C || !(e.ratio > best.ratio)) return false;
    best = e;
    x = c;
    witness = std::move(phi);
    return true;
  };

  while (proposals < budget) {
    bool improved = false;
    for (int coord = 0; coord < 5 && proposals < budget; ++coord) {
      if (coord == 4) {
        for (const auto& inc : u.space().neighbours(x.center)) {
          if (proposals >= budget) break;
          BumpParams c = x;
          c.center = inc.other;
          if (try_candidate(c)) {
            improved = true;
            break;
          }
        }
        continue;
      }
      for (double dir : {1.0, -1.0}) {
        if (proposals >= budget) break;
        BumpParams c = x;
        double* field = coord == 0 ? &c.amplitude
                        : coord == 1 ? &c.spatial_radius
                        : coord == 2 ? &c.time_center
                                     : &c.time_radius;
        *field += dir * step[coord];
        if (try_candidate(c)) {
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      bool alive = false;
      for (int c = 0; c < 4; ++c) {
        step[c] *= 0.5;
        alive = alive || step[c] > floor_step[c];
      }
      if (!alive) break;
    }
  }

  est.ratio = best.ratio;
  est.K = est.unbounded ? std::numeric_limits<double>::infinity() : std::max(1.0, best.ratio);
  est.witness_params = x;
  est.witness_terms = best.terms;
  est.witness = std::move(witness);
  return est;
}

}  // namespace pqm::quasimin
