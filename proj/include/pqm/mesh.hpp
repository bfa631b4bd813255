#pragma once

// Discrete metric measure spaces: weighted graphs with vertex measures,
// edge lengths and edge measures, plus the uniform time grid used for
// space-time cylinders.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pqm::mesh {

struct Vertex {
  std::string id;
  double measure = 0.0;
  std::vector<double> coords;
};

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double length = 0.0;
  double measure = 0.0;
};

struct Incidence {
  std::size_t edge;
  std::size_t other;
};

/// Finite connected weighted graph (Omega, d, mu). Immutable after
/// construction; the shortest-path metric is computed eagerly so that all
/// queries are const and safe for concurrent readers.
class Space {
 public:
  /// Throws LoadError listing every violated invariant.
  Space(std::vector<Vertex> vertices, std::vector<Edge> edges,
        std::vector<std::size_t> boundary);

  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const Vertex& vertex(std::size_t i) const { return vertices_.at(i); }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  std::span<const Vertex> vertices() const noexcept { return vertices_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Incidence> neighbours(std::size_t i) const { return adjacency_.at(i); }

  bool is_boundary(std::size_t i) const { return boundary_mask_.at(i) != 0; }
  std::span<const std::size_t> boundary() const noexcept { return boundary_; }
  std::optional<std::size_t> index_of(const std::string& id) const;

  /// Shortest-path distance.
  double distance(std::size_t i, std::size_t j) const {
    return distances_[i * vertices_.size() + j];
  }
  std::span<const double> distances_from(std::size_t i) const {
    return {distances_.data() + i * vertices_.size(), vertices_.size()};
  }

  double measure(std::size_t i) const { return vertices_[i].measure; }
  double total_measure() const noexcept { return total_measure_; }
  double diameter() const noexcept { return diameter_; }
  double max_edge_length() const noexcept { return max_edge_length_; }

  /// Lists invariant violations without constructing anything.
  static std::vector<std::string> validate(const std::vector<Vertex>& vertices,
                                           const std::vector<Edge>& edges,
                                           const std::vector<std::size_t>& boundary);

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> boundary_;
  std::vector<char> boundary_mask_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::vector<double> distances_;
  std::unordered_map<std::string, std::size_t> index_;
  double total_measure_ = 0.0;
  double diameter_ = 0.0;
  double max_edge_length_ = 0.0;
};

/// Uniform grid t_k = k * dt, k = 0..steps, on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t slices() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return dt_; }
  double time(std::size_t k) const noexcept {
    return k == steps_ ? horizon_ : static_cast<double>(k) * dt_;
  }
  /// Quadrature weight of slice k: dt inside, dt/2 at both ends.
  double weight(std::size_t k) const noexcept {
    return (k == 0 || k == steps_) ? 0.5 * dt_ : dt_;
  }
  /// Slices strictly inside (0, T).
  bool is_interior(std::size_t k) const noexcept { return k > 0 && k < steps_; }

  bool operator==(const TimeGrid& other) const noexcept {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

 private:
  double horizon_;
  std::size_t steps_;
  double dt_;
};

struct Ball {
  std::size_t center = 0;
  double radius = 0.0;
  std::vector<std::size_t> members;
  double measure = 0.0;
};

/// Open-ball membership test. Distances within a relative 1e-12 of the
/// radius count as lying on the sphere, so round-off in path sums cannot
/// flip membership.
inline bool inside_open_ball(double distance, double radius) noexcept {
  return distance < radius * (1.0 - 1e-12);
}

/// Path graph on [0, length] with n vertices, trapezoidal vertex measures
/// and edge measure equal to edge length.
Space build_interval_mesh(std::size_t n, double length);

Ball ball(const Space& space, std::size_t center, double radius);

/// |u(x) - u(y)| / l_e per edge for a vertex function.
std::vector<double> edge_slopes(const Space& space, std::span<const double> u);

/// Radii at which balls B(x, r) or B(x, factor * r) change, each nudged up
/// by a relative 1e-9 so the nudged radius lies just past the breakpoint.
std::vector<double> critical_radii(const Space& space, double factor);

struct DoublingEstimate {
  double constant = 1.0;
  std::size_t center = 0;
  double radius = 0.0;
};

/// max over vertices x and sampled r of mu(B(x,2r)) / mu(B(x,r)).
DoublingEstimate estimate_doubling(const Space& space, std::span<const double> radii);

struct PoincareEstimate {
  double constant = 0.0;  ///< smallest P0 valid for every probe/center/radius
  std::size_t probe = 0;
  std::size_t center = 0;
  double radius = 0.0;
};

/// Weak (1,p)-Poincare constant over the probe fields and sampled radii.
/// The gradient side averages g^p over edges with both endpoints in
/// B(x, tau r), weighted by edge measure, normalized by mu(B(x, tau r)).
PoincareEstimate estimate_poincare(const Space& space, double p, double tau,
                                   std::span<const std::vector<double>> probes,
                                   std::span<const double> radii);

// JSON space documents.
Space load_space_json(std::istream& in);
Space load_space_file(const std::string& path);
void save_space_json(std::ostream& out, const Space& space);

}  // namespace pqm::mesh
