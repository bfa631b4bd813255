#pragma once

// Seeded property trials shared by the unit suite and the acceptance binary.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "pqm/calculus.hpp"
#include "pqm/quasimin.hpp"
#include "pqm/solver.hpp"

namespace props {

using pqm::calculus::EdgeField;
using pqm::calculus::SpacePtr;
using pqm::calculus::SpaceTimeField;
using pqm::quasimin::Rng;

/// Random connected graph: a random tree plus a few chords.
inline SpacePtr random_space(Rng& rng, std::size_t n) {
  std::vector<pqm::mesh::Vertex> vs;
  std::vector<pqm::mesh::Edge> es;
  for (std::size_t i = 0; i < n; ++i) {
    vs.push_back({"v" + std::to_string(i), rng.uniform(0.1, 2.0), {static_cast<double>(i)}});
    if (i > 0) es.push_back({rng.index(i), i, rng.uniform(0.2, 1.5), rng.uniform(0.1, 1.0)});
  }
  const std::size_t extra = rng.index(n);
  for (std::size_t c = 0; c < extra; ++c) {
    const std::size_t a = rng.index(n), b = rng.index(n);
    if (a != b) es.push_back({a, b, rng.uniform(0.2, 1.5), rng.uniform(0.1, 1.0)});
  }
  return std::make_shared<const pqm::mesh::Space>(std::move(vs), std::move(es), std::vector<std::size_t>{0, n - 1});
}

inline SpaceTimeField random_field(Rng& rng, const SpacePtr& s, pqm::mesh::TimeGrid g) {
  return SpaceTimeField::sample(s, g, [&](std::size_t, double) { return rng.uniform(-2.0, 2.0); });
}

/// Random test function vanishing off the admissible interior; some nodes
/// are left exactly zero.
inline SpaceTimeField random_test(Rng& rng, const SpacePtr& s, pqm::mesh::TimeGrid g) {
  const auto inner = pqm::quasimin::interior(*s, g);
  return SpaceTimeField::sample(s, g, [&](std::size_t i, double t) {
    const auto k = static_cast<std::size_t>(std::llround(t / g.dt()));
    if (!inner.contains(k, i) || rng.coin()) return 0.0;
    return rng.uniform(-1.0, 1.0);
  });
}

struct Tally {
  std::map<std::string, std::size_t> trials;
  std::map<std::string, std::size_t> failures;

  void record(const std::string& name, bool ok) {
    ++trials[name];
    if (!ok) ++failures[name];
  }
  std::size_t total_trials() const {
    std::size_t n = 0;
    for (const auto& [_, v] : trials) n += v;
    return n;
  }
  std::size_t total_failures() const {
    std::size_t n = 0;
    for (const auto& [_, v] : failures) n += v;
    return n;
  }
};

inline void gradient_trial(Rng& rng, Tally& t) {
  const auto s = random_space(rng, 3 + rng.index(6));
  const pqm::mesh::TimeGrid g(1.0, 2 + rng.index(4));
  const auto u = random_field(rng, s, g), v = random_field(rng, s, g);
  const auto gu = pqm::calculus::edge_gradient(u), gv = pqm::calculus::edge_gradient(v);
  const auto guv = pqm::calculus::edge_gradient(u + v);
  const double c = rng.uniform(-3.0, 3.0);
  const auto gc = pqm::calculus::edge_gradient(c * u);
  bool sub = true, hom = true, loc = true;
  for (std::size_t j = 0; j < gu.values().size(); ++j) {
    const double scale = 1e-13 * (1.0 + gu.values()[j] + gv.values()[j]);
    sub = sub && guv.values()[j] <= gu.values()[j] + gv.values()[j] + scale;
    hom = hom && std::abs(gc.values()[j] - std::abs(c) * gu.values()[j]) <= 1e-13 * (1.0 + std::abs(c) * gu.values()[j]);
  }
  // locality: changing u at one vertex only moves the gradient on incident edges
  const std::size_t x = rng.index(s->vertex_count());
  const std::size_t k = rng.index(g.slices());
  std::vector<double> w(u.values().begin(), u.values().end());
  w[k * s->vertex_count() + x] += 1.0;
  const auto gw = pqm::calculus::edge_gradient(SpaceTimeField(s, g, w));
  for (std::size_t kk = 0; kk < g.slices(); ++kk)
    for (std::size_t e = 0; e < s->edge_count(); ++e) {
      const bool touches = kk == k && (s->edge(e).u == x || s->edge(e).v == x);
      if (!touches) loc = loc && gw(kk, e) == gu(kk, e);
    }
  t.record("gradient subadditivity", sub);
  t.record("gradient homogeneity", hom);
  t.record("gradient locality", loc);
}

inline void truncation_trial(Rng& rng, Tally& t) {
  const auto s = random_space(rng, 3 + rng.index(5));
  const pqm::mesh::TimeGrid g(1.0, 3 + rng.index(3));
  const auto phi = random_test(rng, s, g);
  const unsigned i = 1 + static_cast<unsigned>(rng.index(20));
  const auto psi = pqm::quasimin::truncate_test(phi, i);
  bool ok = true;
  for (std::size_t j = 0; j < phi.values().size(); ++j) {
    const double f = phi.values()[j], q = psi.values()[j];
    ok = ok && std::abs(q) <= std::abs(f);           // dominated
    ok = ok && (q == 0.0 || (q > 0.0) == (f > 0.0));  // same sign
    ok = ok && std::abs(f - q) <= 1.0 / i + 1e-15;     // uniform approximation
    ok = ok && (f != 0.0 || q == 0.0);                 // support shrinks
  }
  t.record("truncation", ok);
}

inline void cutoff_trial(Rng& rng, Tally& t) {
  const double h = rng.uniform(0.01, 0.1);
  const double tp = rng.uniform(4.5 * h, 1.0);
  const double tt = rng.uniform(0.0, tp + 2 * h);
  const double c = pqm::solver::chi_value(h, tp, tt);
  bool ok = pqm::solver::chi_value(h, tp, 2 * h) == 1.0 && pqm::solver::chi_value(h, tp, tp) == 0.5;
  ok = ok && c >= 0.0 && c <= 1.0 && pqm::solver::chi_value(h, tp, h) == 0.0;
  t.record("cutoff values", ok);
}

inline void margin_trial(Rng& rng, Tally& t) {
  const std::size_t n = 5 + rng.index(4);
  const auto s = std::make_shared<const pqm::mesh::Space>(pqm::mesh::build_interval_mesh(n, 1.0));
  const pqm::mesh::TimeGrid g(1.0, 4 + rng.index(4));
  const auto u = random_field(rng, s, g);
  const auto phi = random_test(rng, s, g);
  const double alpha = rng.uniform(0.1, 3.0);
  const double K1 = rng.uniform(1.0, 3.0), K2 = K1 + rng.uniform(0.0, 2.0);
  const auto form = pqm::quasimin::RegionForm::support();
  const auto r1 = pqm::quasimin::check_inequality(u, phi, pqm::quasimin::QuasiminConstants::make(alpha, K1), 2.0, form, 0.0);
  const auto r2 = pqm::quasimin::check_inequality(u, phi, pqm::quasimin::QuasiminConstants::make(alpha, K2), 2.0, form, 0.0);
  t.record("margin monotone in K", r2.margin >= r1.margin && (!r1.pass || r2.pass));
}

/// Runs `rounds` rounds; each round contributes one trial per property
/// (three for the gradient, two for the margin), seven trials in all.
inline Tally run_all(std::uint64_t seed, std::size_t rounds) {
  Rng rng(seed);
  Tally t;
  for (std::size_t r = 0; r < rounds; ++r) {
    gradient_trial(rng, t);
    truncation_trial(rng, t);
    cutoff_trial(rng, t);
    margin_trial(rng, t);
    margin_trial(rng, t);
  }
  return t;
}

}  // namespace props
