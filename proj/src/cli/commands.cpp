#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>

#include "pqm/cli.hpp"
#include "pqm/errors.hpp"

namespace pqm::cli {

namespace fs = std::filesystem;
using calculus::SpaceTimeField;
using quasimin::RegionForm;

namespace {

struct Context {
  const Config& cfg;
  fs::path out;
  Report& report;
};

using Command = std::function<void(Context&)>;

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json margin_json(const quasimin::MarginReport& m) {
  return {{"form", quasimin::to_string(m.terms.tag)},
          {"A", m.terms.A},
          {"B", m.terms.B},
          {"C", m.terms.C},
          {"alpha", m.constants.alpha},
          {"K", m.constants.K},
          {"margin", m.margin},
          {"tol", m.tol},
          {"pass", m.pass},
          {"u_digest", m.u_digest},
          {"phi_digest", m.phi_digest}};
}

json bump_json(const quasimin::BumpParams& b, const mesh::Space& space) {
  return {{"center", space.vertex(b.center).id},
          {"spatial_radius", b.spatial_radius},
          {"time_center", b.time_center},
          {"time_radius", b.time_radius},
          {"amplitude", b.amplitude}};
}

quasimin::BumpParams bump_from_json(const json& j, const mesh::Space& space) {
  if (!j.is_object()) throw LoadError({"config.phi.bump: must be an object"});
  std::vector<std::string> issues;
  auto get = [&](const char* k) {
    if (!j.contains(k) || !j.at(k).is_number()) {
      issues.push_back(std::string("config.phi.bump.") + k + ": missing number");
      return 0.0;
    }
    return j.at(k).get<double>();
  };
  quasimin::BumpParams b{};
  std::string id = j.contains("center") && j.at("center").is_string() ? j.at("center").get<std::string>()
                   : j.contains("center") && j.at("center").is_number_integer() ? std::to_string(j.at("center").get<long long>())
                                                                                 : "";
  const auto idx = space.index_of(id);
  if (!idx) issues.push_back("config.phi.bump.center: unknown vertex id '" + id + "'");
  b.center = idx.value_or(0);
  b.spatial_radius = get("spatial_radius");
  b.time_center = get("time_center");
  b.time_radius = get("time_radius");
  b.amplitude = get("amplitude");
  if (!issues.empty()) throw LoadError(std::move(issues));
  return b;
}

template <class T>
std::vector<T> list_or(const Config& cfg, const std::string& key, std::vector<T> fallback) {
  if (!cfg.has(key)) return fallback;
  const auto& v = cfg.at(key);
  if (!v.is_array()) throw LoadError({"config." + key + ": must be an array"});
  std::vector<T> out;
  for (const auto& e : v) {
    if constexpr (std::is_integral_v<T>) {
      if (!e.is_number_integer() || e.get<long long>() < 0)
        throw LoadError({"config." + key + ": entries must be nonnegative integers"});
    } else {
      if (!e.is_number()) throw LoadError({"config." + key + ": entries must be numbers"});
    }
    out.push_back(e.get<T>());
  }
  return out;
}

json family_json(const quasimin::FamilySpec& f) {
  return {{"count", f.count},
          {"spatial_width", {f.spatial_width.lo, f.spatial_width.hi}},
          {"temporal_width", {f.temporal_width.lo, f.temporal_width.hi}},
          {"amplitude", {f.amplitude.lo, f.amplitude.hi}},
          {"sign", quasimin::to_string(f.sign)},
          {"seed", f.seed}};
}

calculus::SpacePtr space_or_interval(const Config& cfg, std::size_t n) {
  if (cfg.has("space")) return make_space(cfg.at("space"), cfg);
  if (cfg.has("n")) return make_space(json{{"interval", {{"n", cfg.at("n")}}}}, cfg);
  return std::make_shared<const mesh::Space>(mesh::build_interval_mesh(n, 1.0));
}

mesh::TimeGrid grid_or(const Config& cfg, double T, std::size_t steps) {
  if (cfg.has("grid")) return make_grid(cfg.at("grid"));
  json g = {{"T", cfg.number("T", T)}};
  if (cfg.has("dt")) g["dt"] = cfg.at("dt");
  else g["steps"] = cfg.has("steps") ? cfg.at("steps") : json(steps);
  return make_grid(g);
}

std::optional<double> optional_number(const Config& cfg, const std::string& key) {
  if (!cfg.has(key) || cfg.at(key).is_null()) return std::nullopt;
  return cfg.number(key);
}

fs::path write_phi(const Context& ctx, const SpaceTimeField& phi, const std::string& name = "witness_phi.csv") {
  const auto path = ctx.out / name;
  calculus::write_field_file(path.string(), phi);
  ctx.report.artifact(name, path);
  return path;
}

double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b, std::size_t* slice = nullptr,
                    std::size_t* vertex = nullptr) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.slice_count(); ++k)
    for (std::size_t i = 0; i < a.vertex_count(); ++i) {
      const double d = std::abs(a(k, i) - b(k, i));
      if (d > m) {
        m = d;
        if (slice) *slice = k;
        if (vertex) *vertex = i;
      }
    }
  return m;
}

json location(const SpaceTimeField& f, std::size_t k, std::size_t i) {
  return {{"slice", k}, {"time", f.grid().time(k)}, {"vertex", f.space().vertex(i).id}};
}

// --- diagnose-space ---------------------------------------------------------

void diagnose_space(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto space = make_space(cfg.at("space"), cfg);
  const double diam = space->diameter() > 0.0 ? space->diameter() : 1.0;
  const auto radii = list_or<double>(cfg, "radii", {diam / 20.0, diam / 10.0, diam / 5.0});
  const double p = cfg.number("p", 2.0);
  const double tau = cfg.number("tau", 1.0);

  std::vector<std::vector<double>> probes;
  json probe_names = json::array();
  bool coords = true;
  for (const auto& v : space->vertices()) coords = coords && !v.coords.empty();
  if (cfg.has("probes")) {
    for (const auto& spec : cfg.at("probes")) {
      probes.push_back(make_vertex_function(spec, *space));
      probe_names.push_back(spec);
    }
  } else if (coords) {
    for (const json& spec : {json{{"linear", 1.0}}, json{{"square", 1.0}}, json{{"sine", json::array({1.0})}}}) {
      probes.push_back(make_vertex_function(spec, *space));
      probe_names.push_back(spec);
    }
  } else {
    const auto d = space->distances_from(0);
    probes.emplace_back(d.begin(), d.end());
    probe_names.push_back("distance from first vertex");
  }
  const auto p_radii = list_or<double>(cfg, "poincare_radii", mesh::critical_radii(*space, tau));

  const auto dbl = mesh::estimate_doubling(*space, radii);
  const auto poi = mesh::estimate_poincare(*space, p, tau, probes, p_radii);
  ctx.report.set("doubling", {{"constant", dbl.constant},
                              {"radii", radii},
                              {"attained_at", {{"center", space->vertex(dbl.center).id}, {"radius", dbl.radius}}}});
  ctx.report.set("poincare", {{"constant", finite_or_null(poi.constant)},
                              {"p", p},
                              {"tau", tau},
                              {"probes", probe_names},
                              {"radii_count", p_radii.size()},
                              {"attained_at",
                               {{"probe", poi.probe}, {"center", space->vertex(poi.center).id}, {"radius", poi.radius}}}});
  ctx.report.set("space", {{"vertices", space->vertex_count()},
                           {"edges", space->edge_count()},
                           {"total_measure", space->total_measure()},
                           {"diameter", space->diameter()}});

  json wit = {{"doubling", {{"center", space->vertex(dbl.center).id}, {"radius", dbl.radius}}},
              {"poincare", {{"probe", poi.probe}, {"center", space->vertex(poi.center).id}, {"radius", poi.radius}}}};
  ctx.report.check("poincare finite", std::isfinite(poi.constant), {{"value", finite_or_null(poi.constant)}});
  if (cfg.has("expect")) {
    const auto& e = cfg.at("expect");
    if (e.contains("doubling")) {
      const auto lo = e.at("doubling").at(0).get<double>(), hi = e.at("doubling").at(1).get<double>();
      ctx.report.check("doubling in expected range", dbl.constant >= lo && dbl.constant <= hi,
                       {{"value", dbl.constant}, {"range", {lo, hi}}});
    }
    if (e.contains("poincare_max")) {
      const double hi = e.at("poincare_max").get<double>();
      ctx.report.check("poincare below bound", poi.constant <= hi, {{"value", finite_or_null(poi.constant)}, {"max", hi}});
    }
  }
  if (!ctx.report.passed()) ctx.report.witness(wit);
}

// --- counterexample -----------------------------------------------------------

void counterexample(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double a = cfg.number("a", 2.0);
  if (!(a >= 1.0)) throw ParameterError("counterexample needs a >= 1");
  const auto space = space_or_interval(cfg, 65);
  const auto grid = grid_or(cfg, 1.0, 256);
  const double alpha = cfg.number("alpha", 2.0);
  const double slack = cfg.number("slack", 0.05);
  const double gap_min = cfg.number("gap", 0.2);
  const double margin = cfg.number("margin", 0.02);
  const double ceiling_pad = cfg.number("ceiling_pad", 0.05);
  const auto budget = static_cast<std::size_t>(cfg.number("budget", 500));
  const auto tol = optional_number(cfg, "tolerance");
  const auto coeffs = list_or<double>(cfg, "coefficients", {1.0});

  const double K_target = a * a / (2.0 * a - 1.0);
  ctx.report.set("K_target", K_target);
  ctx.report.set("a", a);
  if (a == 1.0) {
    ctx.report.vacuous("a = 1 makes v identical to u; there is nothing to separate");
    return;
  }

  const auto u = solver::heat_series_solution(1.0, coeffs, space, grid);
  const auto v = solver::heat_series_solution(a, coeffs, space, grid);
  const auto family = quasimin::generate_test_family(space, grid, make_family_spec(cfg.at("family"), cfg.seed()));
  ctx.report.set("family", family_json(family.spec));
  const auto constants = quasimin::QuasiminConstants::make(alpha, K_target * (1.0 + slack), quasimin::ConstantsMode::Given);

  std::optional<std::size_t> first_fail;
  for (const auto* f : {&u, &v}) {
    const std::string who = f == &u ? "u" : "v";
    std::size_t violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < family.members.size(); ++m) {
      const auto& phi = family.members[m];
      const auto r = quasimin::check_inequality(*f, phi, constants, 2.0, RegionForm::open_set(quasimin::support_set(phi)), tol);
      worst = std::min(worst, r.margin + r.tol);
      if (!r.pass) {
        ++violations;
        if (!first_fail) {
          first_fail = m;
          write_phi(ctx, phi);
          ctx.report.witness({{"field", who}, {"member", m}, {"bump", bump_json(family.params[m], *space)}, {"report", margin_json(r)}});
        }
      }
    }
    ctx.report.check(who + " passes at K = K_target * (1 + slack)", violations == 0,
                     {{"violations", violations}, {"members", family.members.size()}, {"K", constants.K},
                      {"worst_margin_plus_tol", worst}});
  }

  // Parabolic boundary data: first slice and boundary vertices, compared bitwise.
  bool identical = true;
  for (std::size_t i = 0; i < space->vertex_count(); ++i) identical = identical && u(0, i) == v(0, i);
  for (std::size_t k = 0; k < grid.slices(); ++k)
    for (std::size_t b : space->boundary())
      identical = identical && u(k, b) == v(k, b) && std::signbit(u(k, b)) == std::signbit(v(k, b));
  ctx.report.check("boundary and initial data bit-identical", identical);

  std::size_t gk = 0, gi = 0;
  const double gap = max_abs_diff(u, v, &gk, &gi);
  ctx.report.check("max |u - v| exceeds gap", gap >= gap_min,
                   {{"value", gap}, {"gap", gap_min}, {"at", location(u, gk, gi)}});

  // Gap profile at the slice nearest t = 0.1.
  const auto kp = static_cast<std::size_t>(std::min<double>(std::llround(0.1 / grid.dt()), static_cast<double>(grid.steps())));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < space->vertex_count(); ++i) {
    const double x = space->vertex(i).coords.empty() ? static_cast<double>(i) : space->vertex(i).coords[0];
    rows.push_back({x, u(kp, i), v(kp, i), std::abs(u(kp, i) - v(kp, i))});
  }
  const auto table = ctx.out / "gap_profile.csv";
  write_table(table, {"x", "u", "v", "gap"}, rows);
  ctx.report.artifact("gap_profile", table);
  ctx.report.set("gap_profile_time", grid.time(kp));

  const auto est = quasimin::estimate_min_K(v, alpha, 2.0, family, budget);
  const double ceiling = K_target + ceiling_pad;
  const bool est_ok = est.K > 1.0 + margin && est.K <= ceiling;
  json ed = {{"K", finite_or_null(est.K)},         {"ratio", finite_or_null(est.ratio)},
             {"lower", 1.0 + margin},              {"ceiling", ceiling},
             {"evaluations", est.evaluations},     {"best_member", est.best_member},
             {"inconclusive", est.inconclusive},   {"unbounded", est.unbounded},
             {"witness_bump", bump_json(est.witness_params, *space)}};
  if (est.witness) {
    const auto path = write_phi(ctx, *est.witness, "estimate_witness_phi.csv");
    ed["witness_file"] = path.generic_string();
  }
  ctx.report.check("estimate_min_K(v) in (1 + margin, K_target + pad]", est_ok, ed);
  if (!est_ok && !first_fail) ctx.report.witness({{"estimate", ed}});
  if (gap < gap_min && !first_fail) ctx.report.witness({{"gap_at", location(u, gk, gi)}});
}

// --- comparison-suite ---------------------------------------------------------------

void comparison_suite(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto space = space_or_interval(cfg, 33);
  const auto grid = grid_or(cfg, 0.25, 32);
  const auto ps = list_or<double>(cfg, "p_values", {1.5, 2.0, 3.0});
  const double tol = cfg.number("tolerance", 1e-3);
  const double uniq_tol = cfg.number("uniqueness_tol", 1e-6);
  const auto fractions = list_or<double>(cfg, "residual_h_fractions", {8.0, 16.0, 32.0});
  const double lift = cfg.number("residual_lift", 0.05);
  const json upper_spec = cfg.has("upper") ? cfg.at("upper") : json{{"sine", json::array({1.0})}, {"parabola", 0.1}};
  const json lower_spec = cfg.has("lower") ? cfg.at("lower") : json{{"sine", json::array({1.0})}};
  const auto inner = make_step_options(cfg.has("inner") ? &cfg.at("inner") : nullptr);

  auto solve = [&](const json& init, double p, solver::StartMode start, double rate) {
    solver::SolveConfig sc;
    sc.p = p;
    sc.initial = make_vertex_function(init, *space);
    sc.step = inner;
    sc.step.start = start;
    if (rate != 0.0) {
      std::vector<double> base = sc.initial;
      sc.boundary = [base, rate](std::size_t b, double t) { return base[b] + rate * t; };
    }
    return solver::solve_p_parabolic(space, grid, sc).u;
  };

  std::vector<std::vector<double>> rows;
  json per_p = json::array();
  json wit = json::object();
  for (double p : ps) {
    const auto u = solve(upper_spec, p, inner.start, 0.0);
    const auto v = solve(lower_spec, p, inner.start, 0.0);
    const auto cmp = solver::comparison_check(u, v, tol);
    ctx.report.check("comparison p=" + json(p).dump(), cmp.pass,
                     {{"max_excess", cmp.max_excess}, {"tol", tol}, {"at", location(u, cmp.slice, cmp.vertex)}});
    if (!cmp.pass && wit.empty()) wit = {{"p", p}, {"comparison_at", location(u, cmp.slice, cmp.vertex)}};

    const auto w0 = solve(lower_spec, p, solver::StartMode::Previous, 0.0);
    const auto w1 = solve(lower_spec, p, solver::StartMode::Zero, 0.0);
    std::size_t uk = 0, ui = 0;
    const double diff = max_abs_diff(w0, w1, &uk, &ui);
    ctx.report.check("uniqueness p=" + json(p).dump(), diff <= uniq_tol,
                     {{"max_difference", diff}, {"tol", uniq_tol}, {"at", location(w0, uk, ui)}});
    if (diff > uniq_tol && wit.empty()) wit = {{"p", p}, {"uniqueness_at", location(w0, uk, ui)}};

    // Same initial slice, boundary lifted by lift * t: (v - u)_+ grows like t.
    const auto lifted = solve(lower_spec, p, inner.start, lift);
    std::vector<double> res;
    for (double f : fractions) {
      const double h = grid.horizon() / f;
      res.push_back(solver::initial_condition_residual(w0, lifted, h));
      rows.push_back({p, h, res.back()});
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < res.size(); ++i) decreasing = decreasing && res[i] < res[i - 1];
    ctx.report.check("initial residual decreasing p=" + json(p).dump(), decreasing, {{"residuals", res}});
    if (!decreasing && wit.empty()) wit = {{"p", p}, {"residuals", res}};
    per_p.push_back({{"p", p}, {"max_excess", cmp.max_excess}, {"uniqueness_difference", diff}, {"residuals", res}});
  }
  ctx.report.set("per_p", per_p);
  const auto table = ctx.out / "residual_vs_h.csv";
  write_table(table, {"p", "h", "residual"}, rows);
  ctx.report.artifact("residual_vs_h", table);
  if (!ctx.report.passed()) ctx.report.witness(wit);
}

// --- estimate-k ------------------------------------------------------------------------

void estimate_k(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto space = make_space(cfg.at("space"), cfg);
  const auto grid = make_grid(cfg.at("grid"));
  const auto u = make_field(cfg.at("field"), space, grid, cfg);
  const double alpha = cfg.number("alpha");
  const double p = cfg.number("p", 2.0);
  const auto budget = static_cast<std::size_t>(cfg.number("budget", 500));
  const auto family = quasimin::generate_test_family(space, grid, make_family_spec(cfg.at("family"), cfg.seed()));
  ctx.report.set("family", family_json(family.spec));
  const auto est = quasimin::estimate_min_K(u, alpha, p, family, budget);

  json r = {{"K", finite_or_null(est.K)},
            {"ratio", finite_or_null(est.ratio)},
            {"inconclusive", est.inconclusive},
            {"unbounded", est.unbounded},
            {"evaluations", est.evaluations},
            {"best_member", est.best_member},
            {"alpha", alpha},
            {"p", p}};
  if (est.witness) {
    r["witness_bump"] = bump_json(est.witness_params, *space);
    r["witness_terms"] = {{"A", est.witness_terms.A}, {"B", est.witness_terms.B}, {"C", est.witness_terms.C}};
    r["witness_file"] = write_phi(ctx, *est.witness).generic_string();
  }
  ctx.report.set("estimate", r);
  ctx.report.check("estimate computed", !est.inconclusive, {{"inconclusive", est.inconclusive}});
  if (cfg.has("expect")) {
    const auto& e = cfg.at("expect");
    if (e.contains("K_min"))
      ctx.report.check("K above K_min", est.K > e.at("K_min").get<double>(), {{"K", finite_or_null(est.K)}, {"K_min", e.at("K_min")}});
    if (e.contains("K_max"))
      ctx.report.check("K at most K_max", est.K <= e.at("K_max").get<double>(), {{"K", finite_or_null(est.K)}, {"K_max", e.at("K_max")}});
  }
  if (!ctx.report.passed()) ctx.report.witness(r);
}

// --- check -------------------------------------------------------------------------------

void check(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto space = make_space(cfg.at("space"), cfg);
  const auto grid = make_grid(cfg.at("grid"));
  const auto u = make_field(cfg.at("field"), space, grid, cfg);
  const double p = cfg.number("p", 2.0);
  const auto constants = make_constants(cfg.at("constants"), p);
  const auto tol = optional_number(cfg, "tolerance");
  const std::string form = cfg.string("form", "support");
  const std::string variant_name = cfg.string("variant", "quasiminimizer");
  quasimin::Variant variant = quasimin::Variant::Quasiminimizer;
  if (variant_name == "super") variant = quasimin::Variant::Super;
  else if (variant_name == "sub") variant = quasimin::Variant::Sub;
  else if (variant_name != "quasiminimizer")
    throw LoadError({"config.variant: must be quasiminimizer | super | sub"});

  std::vector<SpaceTimeField> phis;
  std::vector<json> labels;
  if (cfg.has("phi")) {
    const auto& ph = cfg.at("phi");
    if (ph.contains("file")) {
      phis.push_back(calculus::read_field_file(cfg.resolve(ph.at("file").get<std::string>()).string(), space, grid));
      labels.push_back({{"file", ph.at("file")}});
    } else if (ph.contains("bump")) {
      const auto b = bump_from_json(ph.at("bump"), *space);
      phis.push_back(quasimin::BumpBuilder(space, grid).build(b));
      labels.push_back({{"bump", bump_json(b, *space)}});
    } else if (ph.contains("family_index")) {
      const auto fam = quasimin::generate_test_family(space, grid, make_family_spec(cfg.at("family"), cfg.seed()));
      ctx.report.set("family", family_json(fam.spec));
      const auto idx = ph.at("family_index").get<std::size_t>();
      if (idx >= fam.members.size()) throw LoadError({"config.phi.family_index: out of range"});
      phis.push_back(fam.members[idx]);
      labels.push_back({{"member", idx}, {"bump", bump_json(fam.params[idx], *space)}});
    } else {
      throw LoadError({"config.phi: needs one of file | bump | family_index"});
    }
  } else {
    const auto fam = quasimin::generate_test_family(space, grid, make_family_spec(cfg.at("family"), cfg.seed()));
    ctx.report.set("family", family_json(fam.spec));
    for (std::size_t m = 0; m < fam.members.size(); ++m) {
      phis.push_back(fam.members[m]);
      labels.push_back({{"member", m}, {"bump", bump_json(fam.params[m], *space)}});
    }
  }

  json results = json::array();
  std::size_t failures = 0;
  for (std::size_t m = 0; m < phis.size(); ++m) {
    const auto& phi = phis[m];
    json entry = labels[m];
    bool ok = true;
    if (form == "all") {
      const auto fr = quasimin::check_all_forms(u, phi, constants, p, tol, variant);
      entry["open_set"] = margin_json(fr.open_set);
      entry["measurable_set"] = margin_json(fr.measurable_set);
      entry["nonzero_set"] = margin_json(fr.nonzero_set);
      entry["support"] = margin_json(fr.support);
      json chain = json::array();
      for (const auto& l : fr.chain) chain.push_back({{"name", l.name}, {"lhs", l.lhs}, {"rhs", l.rhs}, {"holds", l.holds}});
      entry["chain"] = chain;
      ok = fr.all_pass && fr.chain_holds;
    } else {
      RegionForm rf = RegionForm::support();
      if (form == "nonzero") rf = RegionForm::nonzero_set();
      else if (form == "open") rf = RegionForm::open_set(quasimin::open_enclosure(phi));
      else if (form == "measurable") rf = RegionForm::measurable_set(quasimin::nonzero_set(phi));
      else if (form != "support") throw LoadError({"config.form: must be support | nonzero | open | measurable | all"});
      const auto r = quasimin::check_inequality(u, phi, constants, p, rf, tol, variant);
      entry["report"] = margin_json(r);
      ok = r.pass;
    }
    entry["pass"] = ok;
    if (!ok && failures++ == 0) {
      const auto path = write_phi(ctx, phi);
      json w = entry;
      w["phi_file"] = path.generic_string();
      ctx.report.witness(w);
    }
    results.push_back(entry);
  }
  ctx.report.set("constants", {{"alpha", constants.alpha}, {"K", constants.K}, {"mode", quasimin::to_string(constants.mode)}});
  ctx.report.set("form", form);
  ctx.report.set("variant", variant_name);
  ctx.report.set("tests", results);
  ctx.report.check("inequality holds for every test function", failures == 0,
                   {{"failures", failures}, {"tested", phis.size()}});
}

// --- solve ---------------------------------------------------------------------------------

void solve(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto space = make_space(cfg.at("space"), cfg);
  const auto grid = make_grid(cfg.at("grid"));
  const auto sc = make_solve_config(cfg.doc(), *space);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = solver::solve_p_parabolic(space, grid, sc);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto field_path = ctx.out / "u.csv";
  calculus::write_field_file(field_path.string(), res.u);
  ctx.report.artifact("field", field_path);

  json meta = {{"p", sc.p},
               {"total_iterations", res.meta.total_iterations},
               {"max_iterations_per_step", res.meta.max_iterations},
               {"gradient_steps", res.meta.gradient_steps},
               {"max_residual", res.meta.max_residual},
               {"kappa", res.meta.kappa_max},
               {"inner_tol", sc.step.tol},
               {"start", solver::to_string(sc.step.start)},
               {"digest", calculus::digest(res.u)}};
  ctx.report.set("metadata", meta);
  meta["timing"] = {{"seconds", secs}};
  const auto meta_path = ctx.out / "solve_metadata.json";
  std::ofstream(meta_path) << meta.dump(2) << '\n';
  ctx.report.artifact("metadata", meta_path);

  bool zero_boundary = !sc.boundary || cfg.at("boundary").value("rate", 0.0) == 0.0;
  if (zero_boundary)
    for (std::size_t b : space->boundary()) zero_boundary = zero_boundary && res.u(1, b) == 0.0 && sc.initial[b] == 0.0;
  if (zero_boundary) {
    bool mono = true;
    std::size_t at = 0;
    for (std::size_t k = 1; k < res.meta.energy.size(); ++k)
      if (res.meta.energy[k] > res.meta.energy[k - 1] * (1.0 + 1e-12) + 1e-300 && mono) {
        mono = false;
        at = k;
      }
    ctx.report.check("energy nonincreasing", mono, {{"first_increase_slice", mono ? json(nullptr) : json(at)}});
  }
  if (cfg.has("reference")) {
    const auto& ref = cfg.at("reference");
    const auto exact = make_field(json{{"heat", ref.at("heat")}}, space, grid, cfg);
    std::size_t k = 0, i = 0;
    const double err = max_abs_diff(res.u, exact, &k, &i);
    const double bound = ref.at("max_error").get<double>();
    ctx.report.check("max error against heat series", err <= bound, {{"error", err}, {"bound", bound}, {"at", location(res.u, k, i)}});
    if (err > bound) ctx.report.witness({{"max_error_at", location(res.u, k, i)}});
  }
  ctx.report.check("solver converged", true, {{"max_residual", res.meta.max_residual}});
}

// --- mollify-report ------------------------------------------------------------------------

void mollify_report(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto space = make_space(cfg.at("space"), cfg);
  const auto grid = make_grid(cfg.at("grid"));
  const auto u = make_field(cfg.at("field"), space, grid, cfg);
  const double p = cfg.number("p", 2.0);
  const auto shifts = list_or<std::size_t>(cfg, "shift_steps", {8, 4, 2});
  const auto width_steps = list_or<double>(cfg, "width_steps", {8.0, 4.0, 2.0});
  const double min_slope = cfg.number("min_slope", 0.9);
  const double lo = cfg.number("window_lo", 0.25), hi = cfg.number("window_hi", 0.75);

  std::vector<double> widths;
  json kernels = json::array();
  double worst_sum = 0.0;
  for (double w : width_steps) {
    widths.push_back(w * grid.dt());
    const calculus::MollifierKernel k(widths.back(), grid.dt());
    double s = 0.0;
    for (double x : k.weights()) s += x;
    worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    kernels.push_back({{"epsilon", widths.back()}, {"reach", k.reach()}, {"weight_sum_error", std::abs(s - 1.0)}});
  }
  ctx.report.check("kernel weights sum to 1", worst_sum <= 1e-14, {{"worst_error", worst_sum}});

  const auto rep = calculus::gradient_convergence_report(u, shifts, widths, p, lo, hi);
  std::vector<std::vector<double>> rows;
  json shift_rows = json::array(), width_rows = json::array();
  for (const auto& r : rep.shifts) {
    rows.push_back({0.0, r.parameter, r.norm, r.skipped ? 1.0 : 0.0});
    shift_rows.push_back({{"s", r.parameter}, {"norm", r.norm}, {"skipped", r.skipped}});
  }
  for (const auto& r : rep.widths) {
    rows.push_back({1.0, r.parameter, r.norm, r.skipped ? 1.0 : 0.0});
    width_rows.push_back({{"epsilon", r.parameter}, {"norm", r.norm}, {"skipped", r.skipped}});
  }
  const auto table = ctx.out / "convergence.csv";
  write_table(table, {"kind", "parameter", "norm", "skipped"}, rows);
  ctx.report.artifact("convergence", table);
  ctx.report.set("kernels", kernels);
  ctx.report.set("shifts", shift_rows);
  ctx.report.set("widths", width_rows);
  ctx.report.set("window", {{"first_slice", rep.window_first}, {"last_slice", rep.window_last}});

  auto slope_check = [&](const std::string& name, const std::optional<double>& s, const json& rws) {
    const bool ok = s && *s >= min_slope;
    ctx.report.check(name, ok, {{"slope", s ? json(*s) : json(nullptr)}, {"min", min_slope}});
    if (!ok) ctx.report.witness({{"rows", rws}, {"table", table.generic_string()}});
  };
  bool all_zero = true;
  for (const auto& r : rep.shifts) all_zero = all_zero && (r.skipped || r.norm == 0.0);
  for (const auto& r : rep.widths) all_zero = all_zero && (r.skipped || r.norm == 0.0);
  if (all_zero) {
    ctx.report.set("note", "all norms vanish; slopes undefined");
    return;
  }
  slope_check("shift slope", rep.shift_slope, shift_rows);
  slope_check("width slope", rep.width_slope, width_rows);
}

// --- staircase --------------------------------------------------------------------------------

void staircase(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto lengths = list_or<double>(cfg, "lengths", {1.0, 2.0, 4.0, 8.0});
  const auto density = static_cast<std::size_t>(cfg.number("density", 16));
  const std::string reading_name = cfg.string("reading", "harmonic");
  quasimin::StaircaseReading reading = quasimin::StaircaseReading::Harmonic;
  if (reading_name == "printed") reading = quasimin::StaircaseReading::Printed;
  else if (reading_name != "harmonic") throw LoadError({"config.reading: must be harmonic | printed"});
  const double printed_k = cfg.number("printed_k", 1.0);
  const auto grid = grid_or(cfg, 1.0, 16);
  const double alpha = cfg.number("alpha", 1.0);
  const double p = cfg.number("p", 2.0);
  const auto budget = static_cast<std::size_t>(cfg.number("budget", 300));
  const auto fspec = make_family_spec(cfg.at("family"), cfg.seed());
  ctx.report.set("family", family_json(fspec));

  std::vector<std::vector<double>> rows;
  json per = json::array();
  std::vector<double> Ks;
  std::vector<std::optional<SpaceTimeField>> witnesses;
  // Test functions on (0, L) stay admissible on any longer interval, and the
  // staircase agrees there, so each family also carries the earlier members
  // and witnesses. Vertex indices line up because the density is shared.
  std::vector<quasimin::BumpParams> carried;
  for (double L : lengths) {
    const auto u = quasimin::staircase_function(L, density, grid, reading, printed_k);
    auto fam = quasimin::generate_test_family(u.space_ptr(), grid, fspec);
    const auto fresh = fam.params;
    const quasimin::BumpBuilder builder(u.space_ptr(), grid);
    for (const auto& b : carried)
      if (b.center < u.vertex_count() && builder.admissible(b)) {
        fam.params.push_back(b);
        fam.members.push_back(builder.build(b));
      }
    const auto est = quasimin::estimate_min_K(u, alpha, p, fam, budget);
    carried.insert(carried.end(), fresh.begin(), fresh.end());
    if (est.witness) carried.push_back(est.witness_params);
    Ks.push_back(est.K);
    witnesses.push_back(est.witness);
    rows.push_back({L, est.K, est.ratio});
    per.push_back({{"L", L},
                   {"K", finite_or_null(est.K)},
                   {"ratio", finite_or_null(est.ratio)},
                   {"inconclusive", est.inconclusive},
                   {"witness_bump", bump_json(est.witness_params, u.space())}});
  }
  ctx.report.set("sweep", per);
  ctx.report.set("reading", reading_name);
  const auto table = ctx.out / "k_vs_L.csv";
  write_table(table, {"L", "K", "ratio"}, rows);
  ctx.report.artifact("k_vs_L", table);

  std::optional<std::size_t> drop;
  for (std::size_t i = 1; i < Ks.size() && !drop; ++i)
    if (Ks[i] < Ks[i - 1] - 1e-9) drop = i;
  ctx.report.check("K estimates nondecreasing in L", !drop, {{"K", per}});
  if (drop) {
    json w = {{"L_before", lengths[*drop - 1]}, {"L_after", lengths[*drop]}};
    if (witnesses[*drop - 1]) w["phi_file"] = write_phi(ctx, *witnesses[*drop - 1]).generic_string();
    ctx.report.witness(w);
  }
}

const std::map<std::string, Command>& registry() {
  static const std::map<std::string, Command> r = {
      {"diagnose-space", diagnose_space}, {"counterexample", counterexample}, {"comparison-suite", comparison_suite},
      {"estimate-k", estimate_k},         {"check", check},                   {"solve", solve},
      {"mollify-report", mollify_report}, {"staircase", staircase},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, _] : registry()) n.push_back(k);
    return n;
  }();
  return names;
}

Report run_command(const std::string& command, const Config& cfg) {
  const auto it = registry().find(command);
  if (it == registry().end()) throw ParameterError("unknown command '" + command + "'");
  Report report(command, cfg);
  const auto out = cfg.output_dir(command);
  fs::create_directories(out);
  Context ctx{cfg, out, report};
  const auto t0 = std::chrono::steady_clock::now();
  it->second(ctx);
  report.timing(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  std::ofstream(out / "report.json") << report.to_json().dump(2) << '\n';
  return report;
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = Config::load(inv.config, inv.seed, inv.out);
    const auto report = run_command(inv.command, cfg);
    out << inv.command << ": " << report.status() << " (" << (cfg.output_dir(inv.command) / "report.json").generic_string()
        << ")\n";
    return report.status() == "FAIL" ? 1 : 0;
  } catch (const LoadError& e) {
    err << e.what() << '\n';
  } catch (const ConvergenceError& e) {
    err << "solver error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 2;
}

}  // namespace pqm::cli
