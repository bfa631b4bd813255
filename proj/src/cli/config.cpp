#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pqm/cli.hpp"
#include "pqm/errors.hpp"

namespace pqm::cli {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw LoadError({msg}); }

void strip_annotations(json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      if (!it.key().empty() && it.key()[0] == '_') it = j.erase(it);
      else {
        strip_annotations(*it);
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& e : j) strip_annotations(e);
  }
}

void collect_files(const json& j, const fs::path& base, const std::string& where, std::vector<std::string>& issues) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string path = where + "." + it.key();
      if (it.key() == "file") {
        if (!it->is_string()) issues.push_back(path + ": must be a string path");
        else if (!fs::exists(base / it->get<std::string>()))
          issues.push_back(path + ": referenced file '" + it->get<std::string>() + "' does not exist");
      } else {
        collect_files(*it, base, path, issues);
      }
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) collect_files(j[i], base, where + "[" + std::to_string(i) + "]", issues);
  }
}

const json& member(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where + ": missing key '" + key + "'");
  return j.at(key);
}

double num(const json& j, const std::string& key, const std::string& where, std::optional<double> fallback = {}) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    fail(where + ": missing number '" + key + "'");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) fail(where + "." + key + ": must be a number");
  return v.get<double>();
}

std::size_t count(const json& j, const std::string& key, const std::string& where,
                  std::optional<std::size_t> fallback = {}) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    fail(where + ": missing integer '" + key + "'");
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(where + "." + key + ": must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where + ": must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(where + ": must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

quasimin::Range range(const json& j, const std::string& key, const std::string& where, quasimin::Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = numbers(j.at(key), where + "." + key);
  if (v.size() != 2) fail(where + "." + key + ": must be [lo, hi]");
  return {v[0], v[1]};
}

std::string only_key(const json& spec, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!spec.is_object() || spec.size() != 1) {
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : " | ") + a;
    fail(where + ": must be an object with exactly one of " + list);
  }
  const std::string key = spec.begin().key();
  for (const char* a : allowed)
    if (key == a) return key;
  fail(where + ": unknown kind '" + key + "'");
}

double first_coord(const mesh::Vertex& v) {
  if (v.coords.empty()) fail("vertex '" + v.id + "' has no coordinate; closed-form data needs coords");
  return v.coords[0];
}

}  // namespace

Config::Config(json doc, fs::path base_dir, std::string source)
    : doc_(std::move(doc)), base_(std::move(base_dir)), source_(std::move(source)) {
  strip_annotations(doc_);
}

Config Config::load(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
  std::ifstream in(path);
  if (!in) throw LoadError({"cannot open config file '" + path + "'"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError({"config '" + path + "' is not valid JSON: " + std::string(e.what())});
  }
  if (!doc.is_object()) throw LoadError({"config '" + path + "' must be a JSON object"});
  if (seed) doc["seed"] = *seed;
  if (out) doc["output"] = *out;
  Config cfg(std::move(doc), fs::path(path).parent_path(), path);
  std::vector<std::string> issues;
  collect_files(cfg.doc_, cfg.base_, "config", issues);
  if (!issues.empty()) throw LoadError(std::move(issues));
  return cfg;
}

Config Config::from_json(json doc, fs::path base_dir) {
  Config cfg(std::move(doc), std::move(base_dir), "<inline>");
  std::vector<std::string> issues;
  collect_files(cfg.doc_, cfg.base_, "config", issues);
  if (!issues.empty()) throw LoadError(std::move(issues));
  return cfg;
}

std::string Config::digest() const {
  const std::string text = doc_.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const json& Config::at(const std::string& key) const { return member(doc_, key, "config"); }

double Config::number(const std::string& key, std::optional<double> fallback) const {
  return num(doc_, key, "config", fallback);
}

std::string Config::string(const std::string& key, std::optional<std::string> fallback) const {
  if (!doc_.contains(key)) {
    if (fallback) return *fallback;
    fail("config: missing string '" + key + "'");
  }
  if (!doc_.at(key).is_string()) fail("config." + key + ": must be a string");
  return doc_.at(key).get<std::string>();
}

std::uint64_t Config::seed() const {
  if (!doc_.contains("seed")) fail("config: 'seed' is mandatory for randomized experiments (or pass --seed)");
  const auto& s = doc_.at("seed");
  if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
    fail("config.seed: must be a nonnegative integer");
  return s.get<std::uint64_t>();
}

fs::path Config::output_dir(const std::string& command) const {
  if (doc_.contains("output")) {
    if (!doc_.at("output").is_string()) fail("config.output: must be a string");
    return doc_.at("output").get<std::string>();
  }
  return fs::path("out") / command;
}

fs::path Config::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : base_ / p;
}

calculus::SpacePtr make_space(const json& spec, const Config& cfg) {
  const std::string where = "config.space";
  const auto kind = only_key(spec, where, {"interval", "file", "weighted_path", "single_vertex"});
  const auto& body = spec.at(kind);
  if (kind == "file") {
    if (!body.is_string()) fail(where + ".file: must be a string path");
    return std::make_shared<const mesh::Space>(mesh::load_space_file(cfg.resolve(body.get<std::string>()).string()));
  }
  if (kind == "interval") {
    const auto n = count(body, "n", where + ".interval");
    const double L = num(body, "length", where + ".interval", 1.0);
    try {
      return std::make_shared<const mesh::Space>(mesh::build_interval_mesh(n, L));
    } catch (const ParameterError& e) {
      fail(where + ".interval: " + e.what());
    }
  }
  if (kind == "single_vertex") {
    const double m = num(body, "measure", where + ".single_vertex", 1.0);
    return std::make_shared<const mesh::Space>(std::vector<mesh::Vertex>{{"0", m, {0.0}}},
                                               std::vector<mesh::Edge>{}, std::vector<std::size_t>{});
  }
  // weighted_path: vertex measures given explicitly, unit-free edge length.
  const auto measures = numbers(member(body, "measures", where + ".weighted_path"), where + ".weighted_path.measures");
  const double len = num(body, "edge_length", where + ".weighted_path", 1.0);
  if (measures.empty()) fail(where + ".weighted_path.measures: must not be empty");
  std::vector<mesh::Vertex> vs;
  std::vector<mesh::Edge> es;
  for (std::size_t i = 0; i < measures.size(); ++i) {
    vs.push_back({std::to_string(i), measures[i], {static_cast<double>(i) * len}});
    if (i > 0) es.push_back({i - 1, i, len, len});
  }
  std::vector<std::size_t> boundary{0};
  if (measures.size() > 1) boundary.push_back(measures.size() - 1);
  return std::make_shared<const mesh::Space>(std::move(vs), std::move(es), std::move(boundary));
}

mesh::TimeGrid make_grid(const json& spec) {
  const std::string where = "config.grid";
  const double T = num(spec, "T", where);
  std::size_t steps = 0;
  if (spec.contains("steps")) {
    steps = count(spec, "steps", where);
  } else {
    const double dt = num(spec, "dt", where);
    if (!(dt > 0.0)) fail(where + ".dt: must be positive");
    const double ratio = T / dt;
    steps = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) fail(where + ": T must be a multiple of dt");
  }
  try {
    return mesh::TimeGrid(T, steps);
  } catch (const ParameterError& e) {
    fail(where + ": " + e.what());
  }
}

std::vector<double> make_vertex_function(const json& spec, const mesh::Space& space) {
  const std::string where = "vertex function";
  if (!spec.is_object() || spec.empty()) fail(where + ": must be a non-empty object");
  std::vector<double> out(space.vertex_count(), 0.0);
  for (auto it = spec.begin(); it != spec.end(); ++it) {
    const std::string& key = it.key();
    if (key == "sine") {
      const auto b = numbers(*it, where + ".sine");
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += solver::heat_series_value(1.0, b, first_coord(space.vertex(i)), 0.0);
      continue;
    }
    if (!it->is_number()) fail(where + "." + key + ": must be a number");
    const double c = it->get<double>();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (key == "constant") {
        out[i] += c;
        continue;
      }
      const double x = first_coord(space.vertex(i));
      if (key == "parabola") out[i] += c * x * (1.0 - x);
      else if (key == "linear") out[i] += c * x;
      else if (key == "square") out[i] += c * x * x;
      else fail(where + ": unknown term '" + key + "' (sine | parabola | linear | square | constant)");
    }
  }
  return out;
}

solver::StepOptions make_step_options(const json* spec) {
  solver::StepOptions o;
  if (!spec) return o;
  const std::string where = "config.inner";
  o.tol = num(*spec, "tol", where, o.tol);
  o.max_iterations = static_cast<int>(count(*spec, "max_iterations", where, static_cast<std::size_t>(o.max_iterations)));
  if (spec->contains("start")) {
    if (!spec->at("start").is_string()) fail(where + ".start: must be a string");
    try {
      o.start = solver::start_from_string(spec->at("start").get<std::string>());
    } catch (const ParameterError& e) {
      fail(where + ".start: " + e.what());
    }
  }
  return o;
}

solver::SolveConfig make_solve_config(const json& spec, const mesh::Space& space) {
  const std::string where = "solve";
  solver::SolveConfig sc;
  sc.p = num(spec, "p", where);
  sc.initial = make_vertex_function(member(spec, "initial", where), space);
  if (spec.contains("boundary")) {
    const auto& b = spec.at("boundary");
    const double c = num(b, "constant", where + ".boundary", 0.0);
    const double rate = num(b, "rate", where + ".boundary", 0.0);
    sc.boundary = [c, rate](std::size_t, double t) { return c + rate * t; };
  }
  sc.step = make_step_options(spec.contains("inner") ? &spec.at("inner") : nullptr);
  return sc;
}

calculus::SpaceTimeField make_field(const json& spec, calculus::SpacePtr space, mesh::TimeGrid grid,
                                    const Config& cfg) {
  const std::string where = "field";
  const auto kind = only_key(spec, where, {"heat", "file", "solve", "separable", "constant"});
  const auto& body = spec.at(kind);
  if (kind == "heat") {
    const double a = num(body, "a", where + ".heat", 1.0);
    const auto b = body.contains("coefficients") ? numbers(body.at("coefficients"), where + ".heat.coefficients")
                                                  : std::vector<double>{1.0};
    return solver::heat_series_solution(a, b, std::move(space), grid);
  }
  if (kind == "file") {
    if (!body.is_string()) fail(where + ".file: must be a string path");
    return calculus::read_field_file(cfg.resolve(body.get<std::string>()).string(), std::move(space), grid);
  }
  if (kind == "solve") {
    auto sc = make_solve_config(body, *space);
    return solver::solve_p_parabolic(std::move(space), grid, sc).u;
  }
  if (kind == "constant") {
    if (!body.is_number()) fail(where + ".constant: must be a number");
    const std::vector<double> slice(space->vertex_count(), body.get<double>());
    return calculus::SpaceTimeField::constant_in_time(std::move(space), grid, slice);
  }
  const auto f = make_vertex_function(member(body, "space", where + ".separable"), *space);
  const auto& tspec = member(body, "time", where + ".separable");
  if (!tspec.is_string()) fail(where + ".separable.time: must be a string");
  const std::string tk = tspec.get<std::string>();
  std::function<double(double)> g;
  if (tk == "sin") g = [](double t) { return std::sin(t); };
  else if (tk == "linear") g = [](double t) { return t; };
  else if (tk == "square") g = [](double t) { return t * t; };
  else if (tk == "one") g = [](double) { return 1.0; };
  else fail(where + ".separable.time: unknown profile '" + tk + "' (sin | linear | square | one)");
  return calculus::SpaceTimeField::sample(std::move(space), grid, [&](std::size_t i, double t) { return f[i] * g(t); });
}

quasimin::FamilySpec make_family_spec(const json& spec, std::uint64_t seed) {
  const std::string where = "config.family";
  quasimin::FamilySpec fs;
  fs.count = count(spec, "count", where);
  if (fs.count == 0) fail(where + ".count: must be >= 1");
  fs.spatial_width = range(spec, "spatial_width", where, fs.spatial_width);
  fs.temporal_width = range(spec, "temporal_width", where, fs.temporal_width);
  fs.amplitude = range(spec, "amplitude", where, fs.amplitude);
  if (spec.contains("sign")) {
    if (!spec.at("sign").is_string()) fail(where + ".sign: must be a string");
    try {
      fs.sign = quasimin::sign_from_string(spec.at("sign").get<std::string>());
    } catch (const ParameterError& e) {
      fail(where + ".sign: " + e.what());
    }
  }
  fs.seed = seed;
  return fs;
}

quasimin::QuasiminConstants make_constants(const json& spec, double p) {
  const std::string where = "config.constants";
  try {
    if (spec.contains("structure")) {
      const auto& s = spec.at("structure");
      const auto sc = solver::StructureConstants::make(num(s, "c1", where + ".structure"),
                                                       num(s, "c2", where + ".structure"),
                                                       num(s, "p", where + ".structure", p));
      const std::string mode = s.contains("mode") && s.at("mode").is_string() ? s.at("mode").get<std::string>() : "min-K";
      if (mode == "min-K") return solver::constants_from_structure(sc, solver::StructureMode::MinK);
      if (mode == "fixed-alpha")
        return solver::constants_from_structure(sc, solver::StructureMode::FixedAlpha, num(s, "alpha", where + ".structure"));
      fail(where + ".structure.mode: must be 'min-K' or 'fixed-alpha'");
    }
    return quasimin::QuasiminConstants::make(num(spec, "alpha", where), num(spec, "K", where));
  } catch (const ParameterError& e) {
    fail(where + ": " + e.what());
  }
}

}  // namespace pqm::cli
