#include <cstdio>
#include <fstream>

#include "pqm/cli.hpp"
#include "pqm/errors.hpp"

namespace pqm::cli {

Report::Report(std::string command, const Config& cfg) : command_(std::move(command)), digest_(cfg.digest()) {
  if (cfg.has("seed")) seed_ = cfg.seed();
}

void Report::check(const std::string& name, bool pass, json details) {
  details["name"] = name;
  details["pass"] = pass;
  checks_.push_back(std::move(details));
}

void Report::artifact(const std::string& key, const std::filesystem::path& path) {
  artifacts_[key] = path.generic_string();
}

bool Report::passed() const {
  for (const auto& c : checks_)
    if (!c.at("pass").get<bool>()) return false;
  return true;
}

std::string Report::status() const {
  if (vacuous_) return "VACUOUS";
  return passed() ? "PASS" : "FAIL";
}

json Report::to_json() const {
  json j;
  j["tool"] = "pqm";
  j["version"] = kToolVersion;
  j["command"] = command_;
  j["config_digest"] = digest_;
  j["seed"] = seed_ ? json(*seed_) : json(nullptr);
  j["status"] = status();
  j["checks"] = checks_;
  j["results"] = results_;
  j["artifacts"] = artifacts_;
  if (!witness_.is_null()) j["witness"] = witness_;
  if (vacuous_) j["vacuous_reason"] = *vacuous_;
  j["timing"] = {{"seconds", seconds_}};
  return j;
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write table '" + path.string() + "'");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  char buf[40];
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace pqm::cli
