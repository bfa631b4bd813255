#include "pqm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "pqm/errors.hpp"

namespace pqm::mesh {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

std::vector<double> dijkstra(const std::vector<std::vector<Incidence>>& adjacency,
                             const std::vector<Edge>& edges, std::size_t source) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(adjacency.size(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    for (const auto& inc : adjacency[x]) {
      const double nd = d + edges[inc.edge].length;
      if (nd < dist[inc.other]) {
        dist[inc.other] = nd;
        heap.emplace(nd, inc.other);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<std::string> Space::validate(const std::vector<Vertex>& vertices,
                                         const std::vector<Edge>& edges,
                                         const std::vector<std::size_t>& boundary) {
  std::vector<std::string> issues;
  const std::size_t n = vertices.size();
  if (n == 0) issues.emplace_back("space has no vertices");

  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = vertices[i];
    if (v.id.empty()) issues.push_back("vertex #" + std::to_string(i) + ": empty id");
    if (!seen.insert(v.id).second) issues.push_back("vertex #" + std::to_string(i) + ": duplicate id '" + v.id + "'");
    if (!positive_finite(v.measure)) {
      std::ostringstream os;
      os << "vertex '" << v.id << "': measure " << v.measure << " is not strictly positive";
      issues.push_back(os.str());
    }
    for (double c : v.coords)
      if (!std::isfinite(c)) issues.push_back("vertex '" + v.id + "': non-finite coordinate");
  }

  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& ed = edges[e];
    const std::string tag = "edge #" + std::to_string(e);
    if (ed.u >= n || ed.v >= n) {
      issues.push_back(tag + ": endpoint not present");
      continue;
    }
    if (ed.u == ed.v) issues.push_back(tag + ": endpoints are not distinct");
    if (!positive_finite(ed.length)) issues.push_back(tag + ": length is not strictly positive");
    if (!positive_finite(ed.measure)) issues.push_back(tag + ": measure is not strictly positive");
  }

  std::unordered_set<std::size_t> bseen;
  for (std::size_t b : boundary) {
    if (b >= n) issues.push_back("boundary entry " + std::to_string(b) + " is not a vertex");
    else if (!bseen.insert(b).second) issues.push_back("boundary vertex '" + vertices[b].id + "' listed twice");
  }

  if (n > 1) {
    // Union-find over valid edges.
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& ed : edges)
      if (ed.u < n && ed.v < n) parent[find(ed.u)] = find(ed.v);
    std::size_t components = 0;
    for (std::size_t i = 0; i < n; ++i) components += (find(i) == i);
    if (components != 1)
      issues.push_back("graph is not connected (" + std::to_string(components) + " components)");
  }
  return issues;
}

Space::Space(std::vector<Vertex> vertices, std::vector<Edge> edges,
             std::vector<std::size_t> boundary) {
  auto issues = validate(vertices, edges, boundary);
  if (!issues.empty()) throw LoadError(std::move(issues));

  vertices_ = std::move(vertices);
  edges_ = std::move(edges);
  boundary_ = std::move(boundary);
  std::sort(boundary_.begin(), boundary_.end());

  const std::size_t n = vertices_.size();
  boundary_mask_.assign(n, 0);
  for (std::size_t b : boundary_) boundary_mask_[b] = 1;

  adjacency_.assign(n, {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    adjacency_[edges_[e].u].push_back({e, edges_[e].v});
    adjacency_[edges_[e].v].push_back({e, edges_[e].u});
    max_edge_length_ = std::max(max_edge_length_, edges_[e].length);
  }

  for (std::size_t i = 0; i < n; ++i) {
    index_.emplace(vertices_[i].id, i);
    total_measure_ += vertices_[i].measure;
  }

  distances_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = dijkstra(adjacency_, edges_, i);
    std::copy(row.begin(), row.end(), distances_.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  // Symmetrize: the two Dijkstra runs may sum the same path in different
  // orders and disagree in the last bit.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::min(distances_[i * n + j], distances_[j * n + i]);
      distances_[i * n + j] = distances_[j * n + i] = d;
      diameter_ = std::max(diameter_, d);
    }
}

std::optional<std::size_t> Space::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw ParameterError("time horizon T must be positive");
  if (steps < 2) throw ParameterError("time grid needs at least 2 steps");
  dt_ = horizon / static_cast<double>(steps);
}

Space build_interval_mesh(std::size_t n, double length) {
  if (n < 2) throw ParameterError("interval mesh needs n >= 2 vertices");
  if (!(std::isfinite(length) && length > 0.0)) throw ParameterError("interval length must be positive");
  const double h = length / static_cast<double>(n - 1);
  std::vector<Vertex> vertices(n);
  for (std::size_t i = 0; i < n; ++i) {
    vertices[i].id = std::to_string(i);
    vertices[i].measure = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    vertices[i].coords = {i + 1 == n ? length : static_cast<double>(i) * h};
  }
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, h, h});
  return Space(std::move(vertices), std::move(edges), {0, n - 1});
}

Ball ball(const Space& space, std::size_t center, double radius) {
  if (center >= space.vertex_count()) throw ParameterError("ball center is not a vertex");
  if (!(radius > 0.0)) throw ParameterError("ball radius must be positive");
  Ball b{center, radius, {}, 0.0};
  const auto row = space.distances_from(center);
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (inside_open_ball(row[y], radius)) {
      b.members.push_back(y);
      b.measure += space.measure(y);
    }
  }
  return b;
}

std::vector<double> edge_slopes(const Space& space, std::span<const double> u) {
  if (u.size() != space.vertex_count()) throw ParameterError("vertex function has wrong size");
  std::vector<double> g(space.edge_count());
  for (std::size_t e = 0; e < g.size(); ++e) {
    const auto& ed = space.edge(e);
    g[e] = std::abs(u[ed.u] - u[ed.v]) / ed.length;
  }
  return g;
}

std::vector<double> critical_radii(const Space& space, double factor) {
  if (!(factor >= 1.0)) throw ParameterError("radius factor must be >= 1");
  const std::size_t n = space.vertex_count();
  std::vector<double> breaks;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = space.distance(i, j);
      breaks.push_back(d);
      if (factor > 1.0) breaks.push_back(d / factor);
    }
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> radii;
  for (double d : breaks) {
    const double r = d * (1.0 + 1e-9);
    if (radii.empty() || r > radii.back() * (1.0 + 1e-10)) radii.push_back(r);
  }
  if (radii.empty()) radii.push_back(1.0);
  return radii;
}

}  // namespace pqm::mesh
