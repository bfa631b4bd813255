#include <cmath>

#include "pqm/errors.hpp"
#include "pqm/quasimin.hpp"

namespace pqm::quasimin {

double staircase_value(double x, StaircaseReading reading, double printed_k) {
  if (reading == StaircaseReading::Printed && !(printed_k > 0.0))
    throw ParameterError("printed slope parameter k must be positive");
  if (x <= 0.0) return 0.0;
  const auto i = static_cast<std::size_t>(std::ceil(x));
  double offset = 0.0;
  for (std::size_t j = 1; j < i; ++j) offset += 1.0 / static_cast<double>(j);
  const double slope = reading == StaircaseReading::Harmonic ? 1.0 / static_cast<double>(i) : 1.0 / printed_k;
  return (x - static_cast<double>(i - 1)) * slope + offset;
}

SpaceTimeField staircase_function(double length, std::size_t density, mesh::TimeGrid grid,
                                  StaircaseReading reading, double printed_k) {
  if (!(length >= 1.0 && std::isfinite(length))) throw ParameterError("staircase length must be >= 1");
  if (density < 1) throw ParameterError("mesh density must be >= 1");
  const double cells = std::round(length * static_cast<double>(density));
  auto space = std::make_shared<const mesh::Space>(mesh::build_interval_mesh(static_cast<std::size_t>(cells) + 1, length));
  std::vector<double> slice(space->vertex_count());
  for (std::size_t i = 0; i < slice.size(); ++i) slice[i] = staircase_value(space->vertex(i).coords.at(0), reading, printed_k);
  return SpaceTimeField::constant_in_time(space, grid, slice);
}

}  // namespace pqm::quasimin
