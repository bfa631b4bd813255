// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pqm/cli.hpp"
#include "pqm/errors.hpp"
#include "properties.hpp"

using namespace pqm;
using calculus::SpacePtr;
using calculus::SpaceTimeField;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SpacePtr interval(std::size_t n) {
  return std::make_shared<const mesh::Space>(mesh::build_interval_mesh(n, 1.0));
}

std::vector<double> vertex_values(const mesh::Space& s, const std::function<double(double)>& f) {
  std::vector<double> v;
  for (const auto& x : s.vertices()) v.push_back(f(x.coords[0]));
  return v;
}

double sin_pi(double x) { return solver::heat_series_value(1.0, std::vector<double>{1.0}, x, 0.0); }

double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.values().size(); ++j) d = std::max(d, std::abs(a.values()[j] - b.values()[j]));
  return d;
}

SpaceTimeField solve(const SpacePtr& s, mesh::TimeGrid g, double p, std::vector<double> init,
                     solver::StartMode start = solver::StartMode::Previous) {
  solver::SolveConfig sc;
  sc.p = p;
  sc.initial = std::move(init);
  sc.step.start = start;
  return solver::solve_p_parabolic(s, g, sc).u;
}

// --- 1 -----------------------------------------------------------------------------

Outcome counterexample() {
  const auto out = fs::path("acceptance_out") / "counterexample";
  const cli::json doc = {{"a", 2.0},
                         {"n", 65},
                         {"T", 1.0},
                         {"steps", 256},
                         {"alpha", 2.0},
                         {"slack", 0.05},
                         {"gap", 0.2},
                         {"margin", 0.02},
                         {"ceiling_pad", 0.05},
                         {"budget", 500},
                         {"tolerance", 0.0},
                         {"family", {{"count", 200}, {"spatial_width", {0.1, 0.3}}, {"temporal_width", {0.05, 0.2}}}},
                         {"seed", 1},
                         {"output", out.string()}};
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = cli::run_command("counterexample", cli::Config::from_json(doc));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto j = report.to_json();
  std::string failed;
  double K = NAN, gap = NAN;
  for (const auto& c : j.at("checks")) {
    if (!c.at("pass").get<bool>()) failed += " [" + c.at("name").get<std::string>() + "]";
    if (c.contains("K") && c.at("K").is_number() && c.contains("ceiling")) K = c.at("K").get<double>();
    if (c.contains("gap") && c.contains("value")) gap = c.at("value").get<double>();
  }
  return {report.status() == "PASS" && secs <= 60.0,
          fmt("status %s, K_est(v) %.4f, max|u-v| %.4f, %.2f s%s", report.status().c_str(), K, gap, secs,
              failed.c_str())};
}

// --- 2 -----------------------------------------------------------------------------

Outcome constants_anchors() {
  using namespace solver;
  bool ok = true;
  const auto fa = constants_from_structure(StructureConstants::make(2, 2, 2), StructureMode::FixedAlpha, 2.0);
  ok = ok && fa.alpha == 2.0 && fa.K == 4.0 / 3.0;
  std::string d = fmt("fixed-alpha(2): K = %.17g", fa.K);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto m = constants_from_structure(StructureConstants::make(1, 1, p), StructureMode::MinK);
    ok = ok && m.alpha == p && m.K == 1.0;
    d += fmt("; min-K p=%g: (%.17g, %.17g)", p, m.alpha, m.K);
  }
  return {ok, d};
}

// --- 3 -----------------------------------------------------------------------------

Outcome solutions_are_quasiminimizers() {
  const auto s = interval(33);
  const mesh::TimeGrid g(0.5, 64);  // dt = 1/128
  quasimin::FamilySpec spec;
  spec.count = 100;
  spec.seed = 5;
  spec.spatial_width = {0.1, 0.3};
  spec.temporal_width = {0.05, 0.15};
  const auto fam = quasimin::generate_test_family(s, g, spec);
  bool ok = true;
  std::string d;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto u = solve(s, g, p, vertex_values(*s, sin_pi));
    const auto c = quasimin::QuasiminConstants::make(p, 1.05);
    std::size_t fails = 0;
    double worst = INFINITY;
    for (const auto& phi : fam.members) {
      const auto r = quasimin::check_inequality(u, phi, c, p, quasimin::RegionForm::support(), 0.0);
      fails += !r.pass;
      worst = std::min(worst, r.margin / std::max(r.terms.C, 1e-300));
    }
    ok = ok && fails == 0;
    d += fmt("%sp=%g: %zu/100 fail, min margin/C %.4f", d.empty() ? "" : "; ", p, fails, worst);
  }
  return {ok, d};
}

// --- 4, 5 --------------------------------------------------------------------------

Outcome comparison() {
  const auto s = interval(33);
  const mesh::TimeGrid g(0.25, 32);
  const auto upper = vertex_values(*s, [](double x) { return sin_pi(x) + 0.1 * x * (1 - x); });
  const auto lower = vertex_values(*s, sin_pi);
  bool ok = true;
  std::string d;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto u = solve(s, g, p, upper), v = solve(s, g, p, lower);
    const auto r = solver::comparison_check(u, v, 1e-3);
    ok = ok && r.pass;
    d += fmt("p=%g max(v-u)+ %.2e; ", p, r.max_excess);
  }
  // p = 2 against the linear implicit step, slice by slice
  const auto u2 = solve(s, g, 2.0, upper);
  std::vector<double> w = upper;
  double diff = 0.0;
  for (std::size_t k = 1; k < g.slices(); ++k) {
    w = oracle::implicit_heat_step(*s, w, upper.front(), upper.back(), g.dt());
    for (std::size_t i = 0; i < w.size(); ++i) diff = std::max(diff, std::abs(w[i] - u2(k, i)));
  }
  ok = ok && diff <= 1e-8;
  return {ok, d + fmt("p=2 vs tridiagonal oracle %.2e", diff)};
}

Outcome uniqueness() {
  const auto s = interval(33);
  const mesh::TimeGrid g(0.25, 32);
  const auto init = vertex_values(*s, [](double x) { return sin_pi(x) + 0.1 * x * (1 - x); });
  bool ok = true;
  std::string d;
  for (double p : {1.5, 2.0, 3.0}) {
    const double diff = max_abs_diff(solve(s, g, p, init, solver::StartMode::Previous),
                                     solve(s, g, p, init, solver::StartMode::Zero));
    ok = ok && diff <= 1e-6;
    d += fmt("%sp=%g %.2e", d.empty() ? "" : "; ", p, diff);
  }
  return {ok, d};
}

// --- 6 -----------------------------------------------------------------------------

Outcome solver_oracles() {
  const auto s = interval(33);
  const auto prev = vertex_values(*s, [](double x) { return std::exp(x) * (1 - x) + 0.3 * std::cos(7 * x); });
  std::vector<double> bc(33, 0.0);
  bc[0] = prev[0];
  bc[32] = prev[32];
  const auto step = solver::p_parabolic_step(*s, prev, bc, 2.0, 1e-3);
  const auto ref = oracle::implicit_heat_step(*s, prev, bc[0], bc[32], 1e-3);
  double sd = 0.0;
  for (std::size_t i = 0; i < 33; ++i) sd = std::max(sd, std::abs(step.slice[i] - ref[i]));

  // Errors against the heat series. The same mode under implicit time
  // stepping, (1 + pi^2 dt)^-k sin(pi x), is printed alongside: it removes
  // the O(dt) part, which does not shrink under spatial halving.
  const mesh::TimeGrid g(0.5, 5000);
  double err[2], cont[2];
  const std::size_t ns[2] = {9, 17};
  for (int r = 0; r < 2; ++r) {
    const auto sp = interval(ns[r]);
    const auto u = solve(sp, g, 2.0, vertex_values(*sp, sin_pi));
    err[r] = cont[r] = 0.0;
    for (std::size_t k = 0; k < g.slices(); ++k)
      for (std::size_t i = 0; i < sp->vertex_count(); ++i) {
        const double x = sp->vertex(i).coords[0];
        const double mode = std::pow(1.0 + pi * pi * g.dt(), -static_cast<double>(k)) * sin_pi(x);
        err[r] = std::max(err[r], std::abs(u(k, i) - mode));
        cont[r] = std::max(cont[r], std::abs(u(k, i) - solver::heat_series_value(1.0, std::vector<double>{1.0}, x, g.time(k))));
      }
  }
  const double ratio = cont[0] / cont[1];
  return {sd <= 1e-10 && ratio >= 3.2 && ratio <= 4.8,
          fmt("step vs tridiagonal %.2e; series errors n=9 %.3e, n=17 %.3e, ratio %.3f (time-discrete mode ratio %.3f)", sd,
              cont[0], cont[1], ratio, err[0] / err[1])};
}

// --- 7 -----------------------------------------------------------------------------

Outcome characterization() {
  quasimin::Rng rng(77);
  std::size_t chain_fail = 0;
  {
    const auto s = interval(5);
    const mesh::TimeGrid g(1.0, 7);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto u = props::random_field(rng, s, g);
      const auto phi = props::random_test(rng, s, g);
      const auto c = quasimin::QuasiminConstants::make(rng.uniform(0.1, 3.0), rng.uniform(1.0, 3.0));
      chain_fail += !quasimin::check_all_forms(u, phi, c, 2.0).chain_holds;
    }
  }
  // 4 x 4: the interior is 2 vertices x 2 slices; enumerate every admissible
  // set containing {phi != 0}. Passing on all of them must imply passing on
  // the support.
  std::size_t premise = 0, brute_fail = 0;
  {
    const auto s = interval(4);
    const mesh::TimeGrid g(1.0, 3);
    const auto inner = quasimin::interior(*s, g);
    std::vector<std::pair<std::size_t, std::size_t>> nodes;
    for (std::size_t k = 0; k < g.slices(); ++k)
      for (std::size_t i = 0; i < 4; ++i)
        if (inner.contains(k, i)) nodes.push_back({k, i});
    for (int trial = 0; trial < 1000; ++trial) {
      const auto u = props::random_field(rng, s, g);
      const auto phi = props::random_test(rng, s, g);
      const auto c = quasimin::QuasiminConstants::make(rng.uniform(0.1, 2.0), rng.uniform(1.0, 6.0));
      const auto nz = quasimin::nonzero_set(phi);
      bool all = true;
      for (unsigned mask = 0; mask < (1u << nodes.size()) && all; ++mask) {
        calculus::NodeSet U(4, g.slices());
        for (std::size_t b = 0; b < nodes.size(); ++b)
          if (mask >> b & 1u) U.insert(nodes[b].first, nodes[b].second);
        if (!nz.subset_of(U)) continue;
        all = quasimin::check_inequality(u, phi, c, 2.0, quasimin::RegionForm::open_set(U), 0.0).pass;
      }
      if (!all) continue;
      ++premise;
      brute_fail += !quasimin::check_inequality(u, phi, c, 2.0, quasimin::RegionForm::support(), 0.0).pass;
    }
  }
  return {chain_fail == 0 && brute_fail == 0 && premise > 0,
          fmt("chain violations %zu/1000; brute force: %zu instances pass every enclosing set, %zu fail on the support",
              chain_fail, premise, brute_fail)};
}

// --- 8 -----------------------------------------------------------------------------

Outcome mollification() {
  const auto s = interval(33);
  const mesh::TimeGrid g(1.0, 256);
  double worst = 0.0;
  std::vector<double> widths;
  for (double m : {8.0, 4.0, 2.0}) {
    widths.push_back(m * g.dt());
    const calculus::MollifierKernel k(widths.back(), g.dt());
    double sum = 0.0;
    for (double w : k.weights()) sum += w;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  const auto u = SpaceTimeField::sample(s, g, [&](std::size_t i, double t) {
    return sin_pi(s->vertex(i).coords[0]) * std::sin(2.0 * t);
  });
  const std::vector<std::size_t> shifts{8, 4, 2};
  const auto r = calculus::gradient_convergence_report(u, shifts, widths, 2.0);
  const bool ok = worst <= 1e-14 && r.shift_slope && r.width_slope && *r.shift_slope >= 0.9 && *r.width_slope >= 0.9;
  return {ok, fmt("kernel sum error %.1e; slopes shift %.3f, width %.3f", worst, r.shift_slope.value_or(NAN),
                  r.width_slope.value_or(NAN))};
}

// --- 9 -----------------------------------------------------------------------------

Outcome invariants() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto t = props::run_all(20240601, 1500);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {t.total_failures() == 0 && t.total_trials() >= 10000 && secs <= 120.0,
          fmt("%zu trials over %zu properties, %zu failures, %.2f s", t.total_trials(), t.trials.size(),
              t.total_failures(), secs)};
}

// --- 10 ----------------------------------------------------------------------------

Outcome diagnostics() {
  const auto s = mesh::build_interval_mesh(101, 1.0);
  const double diam = s.diameter();
  const std::vector<double> radii{diam / 20, diam / 10, diam / 5};
  const double C = mesh::estimate_doubling(s, radii).constant;
  const std::vector<std::vector<double>> probes{vertex_values(s, [](double x) { return x; }),
                                                vertex_values(s, [](double x) { return x * x; }),
                                                vertex_values(s, sin_pi)};
  const double P = mesh::estimate_poincare(s, 2.0, 1.0, probes, mesh::critical_radii(s, 1.0)).constant;
  return {C >= 2.0 && C <= 2.3 && std::isfinite(P) && P <= 1.0, fmt("C_mu %.4f, P0 %.4f", C, P)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"counterexample reproduction", counterexample},
      {"constants anchors", constants_anchors},
      {"solutions satisfy the inequality", solutions_are_quasiminimizers},
      {"comparison principle", comparison},
      {"uniqueness", uniqueness},
      {"solver oracle equivalence", solver_oracles},
      {"characterization consistency", characterization},
      {"mollification", mollification},
      {"structural invariants", invariants},
      {"space diagnostics", diagnostics},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %zu %s: %s  (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%s: %zu criteria, %d failed\n", failures ? "FAIL" : "PASS", criteria.size(), failures);
  return failures ? 1 : 0;
}
