#include <cmath>

#include "pqm/calculus.hpp"
#include "pqm/errors.hpp"

namespace pqm::calculus {

MollifierKernel::MollifierKernel(double epsilon, double dt) : epsilon_(epsilon), dt_(dt) {
  if (!(std::isfinite(epsilon) && epsilon > 0.0)) throw ParameterError("mollifier half-width must be positive");
  if (!(std::isfinite(dt) && dt > 0.0)) throw ParameterError("time step must be positive");

  // Offsets within a relative 1e-9 of eps land exactly on the kernel's zero.
  const auto max_offset = static_cast<std::size_t>(std::floor(epsilon / dt * (1.0 + 1e-9)));
  std::vector<double> raw;
  for (std::size_t j = 0; j <= max_offset; ++j) {
    const double w = 1.0 - static_cast<double>(j) * dt / epsilon;
    if (w <= 1e-9) break;
    raw.push_back(w);
  }
  reach_ = raw.size() - 1;

  weights_.assign(2 * reach_ + 1, 0.0);
  for (std::size_t j = 0; j <= reach_; ++j) weights_[reach_ + j] = weights_[reach_ - j] = raw[j];

  // Normalize, then push the residual rounding into the center weight so the
  // weights sum to 1 as closely as floating point allows.
  double total = 0.0;
  for (double w : weights_) total += w;
  for (double& w : weights_) w /= total;
  double side = 0.0;
  for (std::size_t j = 1; j <= reach_; ++j) side += weights_[reach_ + j] + weights_[reach_ - j];
  weights_[reach_] = 1.0 - side;
}

namespace {

std::vector<double> convolve(std::span<const double> values, std::size_t width, std::size_t slices,
                             const MollifierKernel& kernel) {
  const std::size_t J = kernel.reach();
  if (2 * J >= slices) throw ParameterError("mollifier window exceeds the time grid");
  std::vector<double> out(values.size(), 0.0);
  const auto Jd = static_cast<std::ptrdiff_t>(J);
  for (std::size_t k = J; k + J < slices; ++k) {
    double* dst = out.data() + k * width;
    for (std::ptrdiff_t j = -Jd; j <= Jd; ++j) {
      const double w = kernel.weight(j);
      const double* src = values.data() + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) - j) * width;
      for (std::size_t i = 0; i < width; ++i) dst[i] += w * src[i];
    }
  }
  return out;
}

}  // namespace

MollifiedField mollify_time(const SpaceTimeField& f, const MollifierKernel& kernel) {
  const std::size_t J = kernel.reach();
  auto values = convolve(f.values(), f.vertex_count(), f.slice_count(), kernel);
  return {SpaceTimeField(f.space_ptr(), f.grid(), std::move(values)), J, f.slice_count() - 1 - J, J > 0};
}

EdgeField mollify_time(const EdgeField& f, const MollifierKernel& kernel) {
  auto values = convolve(f.values(), f.edge_count(), f.slice_count(), kernel);
  // Convolution of nonnegative data with nonnegative weights; clear -0.0.
  for (double& v : values) v = v > 0.0 ? v : 0.0;
  return {f.space_ptr(), f.grid(), std::move(values)};
}

}  // namespace pqm::calculus
