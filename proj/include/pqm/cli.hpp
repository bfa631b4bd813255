#pragma once

// Experiment runner: JSON configs in, JSON reports and CSV tables out.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqm/calculus.hpp"
#include "pqm/quasimin.hpp"
#include "pqm/solver.hpp"

namespace pqm::cli {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

/// A loaded config document. Keys starting with '_' are annotations and
/// are ignored; relative file paths resolve against the config's directory.
class Config {
 public:
  Config(json doc, std::filesystem::path base_dir, std::string source);

  /// Reads the document, applies the command-line overrides, and checks
  /// that every referenced "file" exists. Throws LoadError.
  static Config load(const std::string& path, std::optional<std::uint64_t> seed,
                     std::optional<std::string> out);
  static Config from_json(json doc, std::filesystem::path base_dir = ".");

  const json& doc() const noexcept { return doc_; }
  const std::string& source() const noexcept { return source_; }
  /// FNV-1a of the canonical dump, after overrides, annotations removed.
  std::string digest() const;

  bool has(const std::string& key) const { return doc_.contains(key); }
  const json& at(const std::string& key) const;
  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  /// Mandatory for randomized experiments.
  std::uint64_t seed() const;
  std::filesystem::path output_dir(const std::string& command) const;
  std::filesystem::path resolve(const std::string& path) const;

 private:
  json doc_;
  std::filesystem::path base_;
  std::string source_;
};

// Builders from config fragments; each throws LoadError naming the key path.
calculus::SpacePtr make_space(const json& spec, const Config& cfg);
mesh::TimeGrid make_grid(const json& spec);
/// {"sine": [b1, ...], "parabola": c, "linear": c, "constant": c}, summed.
std::vector<double> make_vertex_function(const json& spec, const mesh::Space& space);
/// {"heat": ...} | {"file": ...} | {"solve": ...} | {"separable": ...}
calculus::SpaceTimeField make_field(const json& spec, calculus::SpacePtr space, mesh::TimeGrid grid,
                                    const Config& cfg);
quasimin::FamilySpec make_family_spec(const json& spec, std::uint64_t seed);
quasimin::QuasiminConstants make_constants(const json& spec, double p);
solver::StepOptions make_step_options(const json* spec);
solver::SolveConfig make_solve_config(const json& spec, const mesh::Space& space);

/// PASS/FAIL document for one command run.
class Report {
 public:
  Report(std::string command, const Config& cfg);

  void check(const std::string& name, bool pass, json details = json::object());
  void set(const std::string& key, json value) { results_[key] = std::move(value); }
  void artifact(const std::string& key, const std::filesystem::path& path);
  void witness(json w) { witness_ = std::move(w); }
  void vacuous(std::string why) { vacuous_ = std::move(why); }
  void timing(double seconds) { seconds_ = seconds; }

  bool passed() const;
  std::string status() const;
  json to_json() const;

 private:
  std::string command_;
  std::string digest_;
  std::optional<std::uint64_t> seed_;
  json checks_ = json::array();
  json results_ = json::object();
  json artifacts_ = json::object();
  json witness_;
  std::optional<std::string> vacuous_;
  double seconds_ = 0.0;
};

/// CSV table with a header row; values printed with round-trip precision.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

const std::vector<std::string>& command_names();

/// Runs one command: writes `<out>/report.json` and returns the report.
Report run_command(const std::string& command, const Config& cfg);

struct Invocation {
  std::string command;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

/// Exit status: 0 PASS, 1 FAIL, 2 usage/load/runtime error.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace pqm::cli
