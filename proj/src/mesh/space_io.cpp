#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "pqm/errors.hpp"
#include "pqm/mesh.hpp"

namespace pqm::mesh {

using nlohmann::json;

namespace {

std::string id_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  return {};
}

}  // namespace

Space load_space_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError({std::string("malformed JSON: ") + e.what()});
  }

  std::vector<std::string> issues;
  if (!doc.is_object()) throw LoadError({"space document must be a JSON object"});
  for (const char* key : {"vertices", "edges", "boundary"})
    if (!doc.contains(key) || !doc[key].is_array())
      issues.push_back(std::string("missing array '") + key + "'");
  if (!issues.empty()) throw LoadError(std::move(issues));

  std::vector<Vertex> vertices;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < doc["vertices"].size(); ++i) {
    const auto& jv = doc["vertices"][i];
    Vertex v;
    v.id = jv.contains("id") ? id_string(jv["id"]) : "";
    if (!jv.contains("measure") || !jv["measure"].is_number()) {
      issues.push_back("vertices[" + std::to_string(i) + "]: missing numeric 'measure'");
    } else {
      v.measure = jv["measure"].get<double>();
    }
    if (jv.contains("coords")) {
      if (jv["coords"].is_array()) {
        for (const auto& c : jv["coords"]) {
          if (c.is_number()) v.coords.push_back(c.get<double>());
          else issues.push_back("vertices[" + std::to_string(i) + "]: non-numeric coordinate");
        }
      } else {
        issues.push_back("vertices[" + std::to_string(i) + "]: 'coords' must be an array");
      }
    }
    index.emplace(v.id, i);
    vertices.push_back(std::move(v));
  }

  auto lookup = [&](const json& j, const std::string& where) -> std::optional<std::size_t> {
    auto it = index.find(id_string(j));
    if (it == index.end()) {
      issues.push_back(where + ": unknown vertex id '" + id_string(j) + "'");
      return std::nullopt;
    }
    return it->second;
  };

  std::vector<Edge> edges;
  for (std::size_t e = 0; e < doc["edges"].size(); ++e) {
    const auto& je = doc["edges"][e];
    const std::string where = "edges[" + std::to_string(e) + "]";
    if (!je.contains("u") || !je.contains("v") || !je.contains("length") || !je.contains("measure") ||
        !je["length"].is_number() || !je["measure"].is_number()) {
      issues.push_back(where + ": needs 'u', 'v', numeric 'length' and 'measure'");
      continue;
    }
    auto u = lookup(je["u"], where);
    auto v = lookup(je["v"], where);
    if (u && v) edges.push_back({*u, *v, je["length"].get<double>(), je["measure"].get<double>()});
  }

  std::vector<std::size_t> boundary;
  for (std::size_t b = 0; b < doc["boundary"].size(); ++b)
    if (auto i = lookup(doc["boundary"][b], "boundary[" + std::to_string(b) + "]")) boundary.push_back(*i);

  auto structural = Space::validate(vertices, edges, boundary);
  issues.insert(issues.end(), structural.begin(), structural.end());
  if (!issues.empty()) throw LoadError(std::move(issues));
  return Space(std::move(vertices), std::move(edges), std::move(boundary));
}

Space load_space_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError({"cannot open space file '" + path + "'"});
  return load_space_json(in);
}

void save_space_json(std::ostream& out, const Space& space) {
  json doc;
  doc["vertices"] = json::array();
  for (const auto& v : space.vertices()) {
    json jv{{"id", v.id}, {"measure", v.measure}};
    if (!v.coords.empty()) jv["coords"] = v.coords;
    doc["vertices"].push_back(std::move(jv));
  }
  doc["edges"] = json::array();
  for (const auto& e : space.edges())
    doc["edges"].push_back({{"u", space.vertex(e.u).id},
                            {"v", space.vertex(e.v).id},
                            {"length", e.length},
                            {"measure", e.measure}});
  doc["boundary"] = json::array();
  for (std::size_t b : space.boundary()) doc["boundary"].push_back(space.vertex(b).id);
  out << std::setw(2) << doc << '\n';
}

}  // namespace pqm::mesh
