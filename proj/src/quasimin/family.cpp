#include <cmath>

#include "pqm/errors.hpp"
#include "pqm/quasimin.hpp"

namespace pqm::quasimin {

namespace {

// Hat profile; exactly zero once the argument reaches the radius (with the
// same relative guard as open balls), so support is predictable.
double hat(double d, double r) {
  if (!mesh::inside_open_ball(d, r)) return 0.0;
  return 1.0 - d / r;
}

constexpr std::size_t kMaxAttempts = 10000;

}  // namespace

std::string to_string(Sign s) {
  switch (s) {
    case Sign::Nonnegative: return "nonnegative";
    case Sign::Nonpositive: return "nonpositive";
    case Sign::Unrestricted: return "unrestricted";
  }
  return "?";
}

Sign sign_from_string(const std::string& s) {
  if (s == "nonnegative") return Sign::Nonnegative;
  if (s == "nonpositive") return Sign::Nonpositive;
  if (s == "unrestricted") return Sign::Unrestricted;
  throw ParameterError("unknown sign '" + s + "' (nonnegative | nonpositive | unrestricted)");
}

BumpBuilder::BumpBuilder(calculus::SpacePtr space, mesh::TimeGrid grid)
    : space_(std::move(space)), grid_(grid), forbidden_(space_->vertex_count(), 0) {
  for (std::size_t b : space_->boundary()) {
    forbidden_[b] = 1;
    for (const auto& inc : space_->neighbours(b)) forbidden_[inc.other] = 1;
  }
}

bool BumpBuilder::admissible(const BumpParams& b) const {
  if (b.center >= space_->vertex_count()) return false;
  if (!(b.spatial_radius > 0.0 && b.time_radius > 0.0 && std::isfinite(b.amplitude) && b.amplitude != 0.0))
    return false;
  const auto d = space_->distances_from(b.center);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (forbidden_[i] && mesh::inside_open_ball(d[i], b.spatial_radius)) return false;
  const std::size_t N = grid_.steps();
  for (std::size_t k : {std::size_t{0}, std::size_t{1}, N - 1, N})
    if (mesh::inside_open_ball(std::abs(grid_.time(k) - b.time_center), b.time_radius)) return false;
  return true;
}

SpaceTimeField BumpBuilder::build(const BumpParams& b) const {
  if (b.center >= space_->vertex_count()) throw ParameterError("bump center out of range");
  if (!(b.spatial_radius > 0.0 && b.time_radius > 0.0)) throw ParameterError("bump radii must be positive");
  const auto d = space_->distances_from(b.center);
  std::vector<double> spatial(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) spatial[i] = hat(d[i], b.spatial_radius);
  const std::size_t n = space_->vertex_count();
  std::vector<double> values(n * grid_.slices(), 0.0);
  for (std::size_t k = 0; k < grid_.slices(); ++k) {
    const double tk = b.amplitude * hat(std::abs(grid_.time(k) - b.time_center), b.time_radius);
    if (tk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) values[k * n + i] = tk * spatial[i];
  }
  return {space_, grid_, std::move(values)};
}

TestFamily generate_test_family(calculus::SpacePtr space, mesh::TimeGrid grid, const FamilySpec& spec) {
  auto valid = [](const Range& r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo > 0.0 && r.lo <= r.hi; };
  if (!valid(spec.spatial_width)) throw ParameterError("spatial width range must satisfy 0 < lo <= hi");
  if (!valid(spec.temporal_width)) throw ParameterError("temporal width range must satisfy 0 < lo <= hi");
  if (!valid(spec.amplitude)) throw ParameterError("amplitude range must satisfy 0 < lo <= hi");

  BumpBuilder builder(space, grid);
  std::vector<std::size_t> centers;
  for (std::size_t i = 0; i < space->vertex_count(); ++i)
    if (builder.admissible({i, 1e-300, grid.time(grid.steps() / 2), grid.dt() * 0.5, 1.0})) centers.push_back(i);
  const double t_lo = grid.dt() + spec.temporal_width.lo;
  const double t_hi = grid.time(grid.steps() - 1) - spec.temporal_width.lo;
  if (centers.empty() || !(t_lo < t_hi))
    throw ParameterError("impossible geometry: no bump fits strictly inside the cylinder");

  TestFamily fam{spec, {}, {}};
  fam.params.reserve(spec.count);
  fam.members.reserve(spec.count);
  Rng rng(spec.seed);
  for (std::size_t m = 0; m < spec.count; ++m) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      BumpParams b{};
      b.center = centers[rng.index(centers.size())];
      b.spatial_radius = rng.uniform(spec.spatial_width.lo, spec.spatial_width.hi);
      b.time_radius = rng.uniform(spec.temporal_width.lo, spec.temporal_width.hi);
      const double lo = grid.dt() + b.time_radius;
      const double hi = grid.time(grid.steps() - 1) - b.time_radius;
      b.time_center = rng.uniform(lo, hi > lo ? hi : lo);
      double amp = rng.uniform(spec.amplitude.lo, spec.amplitude.hi);
      const bool negative = spec.sign == Sign::Nonpositive || (spec.sign == Sign::Unrestricted && rng.coin());
      b.amplitude = negative ? -amp : amp;
      if (hi <= lo || !builder.admissible(b)) continue;
      fam.members.push_back(builder.build(b));
      fam.params.push_back(b);
      placed = true;
    }
    if (!placed)
      throw ParameterError("impossible geometry: could not place bump " + std::to_string(m) +
                           " inside the cylinder; shrink the width ranges");
  }
  return fam;
}

}  // namespace pqm::quasimin
