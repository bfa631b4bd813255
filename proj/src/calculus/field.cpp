#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pqm/calculus.hpp"
#include "pqm/errors.hpp"

namespace pqm::calculus {

SpaceTimeField::SpaceTimeField(SpacePtr space, mesh::TimeGrid grid, std::vector<double> values)
    : space_(std::move(space)), grid_(grid), values_(std::move(values)) {
  if (!space_) throw ParameterError("field needs a space");
  if (values_.size() != space_->vertex_count() * grid_.slices())
    throw ParameterError("field needs one value per (vertex, slice)");
  for (double v : values_)
    if (!std::isfinite(v)) throw ParameterError("field values must be finite");
}

SpaceTimeField SpaceTimeField::zeros(SpacePtr space, mesh::TimeGrid grid) {
  const std::size_t n = space->vertex_count() * grid.slices();
  return {std::move(space), grid, std::vector<double>(n, 0.0)};
}

SpaceTimeField SpaceTimeField::sample(SpacePtr space, mesh::TimeGrid grid,
                                      const std::function<double(std::size_t, double)>& f) {
  const std::size_t n = space->vertex_count();
  std::vector<double> values(n * grid.slices());
  for (std::size_t k = 0; k < grid.slices(); ++k)
    for (std::size_t i = 0; i < n; ++i) values[k * n + i] = f(i, grid.time(k));
  return {std::move(space), grid, std::move(values)};
}

SpaceTimeField SpaceTimeField::constant_in_time(SpacePtr space, mesh::TimeGrid grid,
                                                std::span<const double> slice) {
  if (slice.size() != space->vertex_count()) throw ParameterError("slice has wrong size");
  std::vector<double> values;
  values.reserve(slice.size() * grid.slices());
  for (std::size_t k = 0; k < grid.slices(); ++k) values.insert(values.end(), slice.begin(), slice.end());
  return {std::move(space), grid, std::move(values)};
}

namespace {

template <class Op>
SpaceTimeField combine(const SpaceTimeField& a, const SpaceTimeField& b, Op op) {
  if (!a.same_cylinder(b)) throw ParameterError("fields live on different cylinders");
  std::vector<double> out(a.values().size());
  std::transform(a.values().begin(), a.values().end(), b.values().begin(), out.begin(), op);
  return {a.space_ptr(), a.grid(), std::move(out)};
}

}  // namespace

SpaceTimeField operator+(const SpaceTimeField& a, const SpaceTimeField& b) {
  return combine(a, b, std::plus<>{});
}

SpaceTimeField operator-(const SpaceTimeField& a, const SpaceTimeField& b) {
  return combine(a, b, std::minus<>{});
}

SpaceTimeField operator-(const SpaceTimeField& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v = -v;
  return {a.space_ptr(), a.grid(), std::move(out)};
}

SpaceTimeField operator*(double s, const SpaceTimeField& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= s;
  return {a.space_ptr(), a.grid(), std::move(out)};
}

EdgeField::EdgeField(SpacePtr space, mesh::TimeGrid grid, std::vector<double> values)
    : space_(std::move(space)), grid_(grid), values_(std::move(values)) {
  if (!space_) throw ParameterError("edge field needs a space");
  if (values_.size() != space_->edge_count() * grid_.slices())
    throw ParameterError("edge field needs one value per (edge, slice)");
  for (double v : values_)
    if (!(std::isfinite(v) && v >= 0.0)) throw ParameterError("edge field values must be finite and nonnegative");
}

NodeSet NodeSet::full(std::size_t vertices, std::size_t slices) {
  NodeSet s(vertices, slices);
  std::fill(s.mask_.begin(), s.mask_.end(), 1);
  return s;
}

std::size_t NodeSet::size() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

bool NodeSet::subset_of(const NodeSet& other) const {
  if (other.vertices_ != vertices_ || other.slices_ != slices_) return false;
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (mask_[i] && !other.mask_[i]) return false;
  return true;
}

std::string digest(const SpaceTimeField& f) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t shape[2] = {f.vertex_count(), f.slice_count()};
  mix(shape, sizeof shape);
  const double horizon = f.grid().horizon();
  mix(&horizon, sizeof horizon);
  mix(f.values().data(), f.values().size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pqm::calculus
