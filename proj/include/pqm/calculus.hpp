#pragma once

// Space-time fields on a discrete cylinder Omega x [0, T], their minimal
// upper gradients, Lebesgue/Newtonian norms, time derivatives and time
// mollification.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pqm/mesh.hpp"

namespace pqm::calculus {

using SpacePtr = std::shared_ptr<const mesh::Space>;

/// Real values on vertices x time slices, slice-major. Immutable.
class SpaceTimeField {
 public:
  SpaceTimeField(SpacePtr space, mesh::TimeGrid grid, std::vector<double> values);

  static SpaceTimeField zeros(SpacePtr space, mesh::TimeGrid grid);
  /// f(vertex index, time) sampled at every node.
  static SpaceTimeField sample(SpacePtr space, mesh::TimeGrid grid,
                               const std::function<double(std::size_t, double)>& f);
  /// The same vertex function repeated on every slice.
  static SpaceTimeField constant_in_time(SpacePtr space, mesh::TimeGrid grid,
                                         std::span<const double> slice);

  const mesh::Space& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  const mesh::TimeGrid& grid() const noexcept { return grid_; }

  std::size_t vertex_count() const noexcept { return space_->vertex_count(); }
  std::size_t slice_count() const noexcept { return grid_.slices(); }

  double operator()(std::size_t slice, std::size_t vertex) const {
    return values_[slice * vertex_count() + vertex];
  }
  std::span<const double> slice(std::size_t k) const {
    return {values_.data() + k * vertex_count(), vertex_count()};
  }
  std::span<const double> values() const noexcept { return values_; }

  bool same_cylinder(const SpaceTimeField& other) const noexcept {
    return space_ == other.space_ && grid_ == other.grid_;
  }

 private:
  SpacePtr space_;
  mesh::TimeGrid grid_;
  std::vector<double> values_;
};

SpaceTimeField operator+(const SpaceTimeField& a, const SpaceTimeField& b);
SpaceTimeField operator-(const SpaceTimeField& a, const SpaceTimeField& b);
SpaceTimeField operator-(const SpaceTimeField& a);
SpaceTimeField operator*(double s, const SpaceTimeField& a);

/// Nonnegative values on edges x time slices.
class EdgeField {
 public:
  EdgeField(SpacePtr space, mesh::TimeGrid grid, std::vector<double> values);

  const mesh::Space& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  const mesh::TimeGrid& grid() const noexcept { return grid_; }
  std::size_t edge_count() const noexcept { return space_->edge_count(); }
  std::size_t slice_count() const noexcept { return grid_.slices(); }

  double operator()(std::size_t slice, std::size_t edge) const {
    return values_[slice * edge_count() + edge];
  }
  std::span<const double> slice(std::size_t k) const {
    return {values_.data() + k * edge_count(), edge_count()};
  }
  std::span<const double> values() const noexcept { return values_; }

 private:
  SpacePtr space_;
  mesh::TimeGrid grid_;
  std::vector<double> values_;
};

/// Subset of the space-time nodes. An edge at slice k belongs to the set
/// iff both of its endpoints do.
class NodeSet {
 public:
  NodeSet(std::size_t vertices, std::size_t slices)
      : vertices_(vertices), slices_(slices), mask_(vertices * slices, 0) {}

  static NodeSet full(std::size_t vertices, std::size_t slices);

  bool contains(std::size_t slice, std::size_t vertex) const {
    return mask_[slice * vertices_ + vertex] != 0;
  }
  void insert(std::size_t slice, std::size_t vertex) { mask_[slice * vertices_ + vertex] = 1; }
  void erase(std::size_t slice, std::size_t vertex) { mask_[slice * vertices_ + vertex] = 0; }

  bool contains_edge(const mesh::Space& space, std::size_t slice, std::size_t edge) const {
    const auto& e = space.edge(edge);
    return contains(slice, e.u) && contains(slice, e.v);
  }

  std::size_t vertices() const noexcept { return vertices_; }
  std::size_t slices() const noexcept { return slices_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool subset_of(const NodeSet& other) const;

  bool operator==(const NodeSet& other) const = default;

 private:
  std::size_t vertices_;
  std::size_t slices_;
  std::vector<char> mask_;
};

/// Minimal upper gradient per slice and edge: |u(x) - u(y)| / l_e.
EdgeField edge_gradient(const SpaceTimeField& u);

/// (sum |f|^p * measure * w_k)^(1/p); w_k is the slice quadrature weight.
/// Without a region the whole cylinder is used; an empty region gives 0.
double lp_norm(const SpaceTimeField& f, double p, const NodeSet* region = nullptr);
double lp_norm(const EdgeField& f, double p, const NodeSet* region = nullptr);

/// ||u||_{L^p(mu)} + ||g_u||_{L^p(m)} for a single vertex function.
double newtonian_norm(const mesh::Space& space, std::span<const double> slice, double p);

/// Per slice: |u| <= tol on every boundary vertex.
std::vector<bool> zero_boundary_check(const SpaceTimeField& u, double tol);

/// Central differences inside, one-sided at the first and last slice.
SpaceTimeField time_derivative(const SpaceTimeField& phi);

/// Discrete triangular kernel eta(s) ~ max(0, 1 - |s|/eps) on offsets j*dt,
/// renormalized to unit mass. Offsets with zero weight are dropped.
class MollifierKernel {
 public:
  MollifierKernel(double epsilon, double dt);

  double epsilon() const noexcept { return epsilon_; }
  double dt() const noexcept { return dt_; }
  /// Largest offset |j| carrying positive weight.
  std::size_t reach() const noexcept { return reach_; }
  /// Weight of offset j in [-reach, reach].
  double weight(std::ptrdiff_t j) const {
    return weights_[static_cast<std::size_t>(j + static_cast<std::ptrdiff_t>(reach_))];
  }
  std::span<const double> weights() const noexcept { return weights_; }

 private:
  double epsilon_;
  double dt_;
  std::size_t reach_ = 0;
  std::vector<double> weights_;
};

struct MollifiedField {
  SpaceTimeField field;   ///< zero outside the valid slice range
  std::size_t first_valid;
  std::size_t last_valid;
  bool domain_shrunk;     ///< true when the valid range is smaller than the grid
};

/// f_eps(x, t_k) = sum_j eta_j f(x, t_{k-j}), reported where the window fits.
MollifiedField mollify_time(const SpaceTimeField& f, const MollifierKernel& kernel);

/// Same convolution applied to an edge field; slices outside
/// [reach, N - reach] are zero.
EdgeField mollify_time(const EdgeField& f, const MollifierKernel& kernel);

struct ConvergenceRow {
  double parameter;  ///< shift s or half-width eps, in time units
  double norm;
  bool skipped;
};

struct ConvergenceReport {
  double p;
  std::size_t window_first;
  std::size_t window_last;
  std::vector<ConvergenceRow> shifts;
  std::vector<ConvergenceRow> widths;
  std::optional<double> shift_slope;  ///< log-log fit, when >= 2 positive rows
  std::optional<double> width_slope;
};

/// Norms of g_{u(., t - s) - u(., t)} and g_{u_eps - u} over a window that
/// excludes the spatial boundary and the time slices outside
/// [window_first, window_last]. Shifts are grid multiples j >= 1.
ConvergenceReport gradient_convergence_report(const SpaceTimeField& u,
                                              std::span<const std::size_t> shift_steps,
                                              std::span<const double> widths, double p,
                                              double window_lo = 0.25, double window_hi = 0.75);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// FNV-1a digest of the grid shape and the raw value bytes, as hex.
std::string digest(const SpaceTimeField& f);

// Field files: CSV rows `time_index,vertex_id,value` after a header line.
void write_field_csv(std::ostream& out, const SpaceTimeField& f);
void write_field_file(const std::string& path, const SpaceTimeField& f);
SpaceTimeField read_field_csv(std::istream& in, SpacePtr space, mesh::TimeGrid grid);
SpaceTimeField read_field_file(const std::string& path, SpacePtr space, mesh::TimeGrid grid);

}  // namespace pqm::calculus
