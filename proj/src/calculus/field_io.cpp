#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pqm/calculus.hpp"
#include "pqm/errors.hpp"

namespace pqm::calculus {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  return cells;
}

}  // namespace

void write_field_csv(std::ostream& out, const SpaceTimeField& f) {
  out << "time_index,vertex_id,value\n";
  char buf[40];
  for (std::size_t k = 0; k < f.slice_count(); ++k)
    for (std::size_t i = 0; i < f.vertex_count(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", f(k, i));
      out << k << ',' << f.space().vertex(i).id << ',' << buf << '\n';
    }
}

void write_field_file(const std::string& path, const SpaceTimeField& f) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write field file '" + path + "'");
  write_field_csv(out, f);
}

SpaceTimeField read_field_csv(std::istream& in, SpacePtr space, mesh::TimeGrid grid) {
  const std::size_t n = space->vertex_count();
  std::vector<double> values(n * grid.slices(), 0.0);
  std::vector<char> seen(values.size(), 0);
  std::vector<std::string> issues;

  std::string line;
  if (!std::getline(in, line)) throw LoadError({"field file is empty (header line is mandatory)"});
  const auto header = split(line);
  if (header != std::vector<std::string>{"time_index", "vertex_id", "value"})
    issues.push_back("line 1: header must be 'time_index,vertex_id,value'");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    const auto cells = split(line);
    if (cells.size() != 3) {
      issues.push_back(where + ": expected 3 columns");
      continue;
    }
    std::size_t k = 0;
    auto [kp, kec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), k);
    if (kec != std::errc() || kp != cells[0].data() + cells[0].size() || k >= grid.slices()) {
      issues.push_back(where + ": bad time index '" + cells[0] + "'");
      continue;
    }
    auto idx = space->index_of(cells[1]);
    if (!idx) {
      issues.push_back(where + ": unknown vertex id '" + cells[1] + "'");
      continue;
    }
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      issues.push_back(where + ": bad value '" + cells[2] + "'");
      continue;
    }
    const std::size_t slot = k * n + *idx;
    if (seen[slot]) issues.push_back(where + ": duplicate entry");
    seen[slot] = 1;
    values[slot] = v;
  }

  std::size_t missing = 0;
  for (std::size_t s = 0; s < seen.size(); ++s)
    if (!seen[s] && ++missing <= 20)
      issues.push_back("missing (slice " + std::to_string(s / n) + ", vertex '" + space->vertex(s % n).id + "')");
  if (missing > 20) issues.push_back("... " + std::to_string(missing - 20) + " more missing entries");
  if (!issues.empty()) throw LoadError(std::move(issues));
  return {std::move(space), grid, std::move(values)};
}

SpaceTimeField read_field_file(const std::string& path, SpacePtr space, mesh::TimeGrid grid) {
  std::ifstream in(path);
  if (!in) throw LoadError({"cannot open field file '" + path + "'"});
  return read_field_csv(in, std::move(space), grid);
}

}  // namespace pqm::calculus
