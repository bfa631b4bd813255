#include "pqm/errors.hpp"
#include "pqm/quasimin.hpp"

namespace pqm::quasimin {

std::string to_string(RegionTag tag) {
  switch (tag) {
    case RegionTag::OpenSet: return "OPEN_SET";
    case RegionTag::MeasurableSet: return "MEASURABLE_SET";
    case RegionTag::NonzeroSet: return "NONZERO_SET";
    case RegionTag::Support: return "SUPPORT";
  }
  return "?";
}

bool is_admissible(const mesh::Space& space, const NodeSet& set) {
  const std::size_t last = set.slices() - 1;
  for (std::size_t k = 0; k < set.slices(); ++k)
    for (std::size_t i = 0; i < set.vertices(); ++i)
      if (set.contains(k, i) && (k == 0 || k == last || space.is_boundary(i))) return false;
  return true;
}

NodeSet interior(const mesh::Space& space, const mesh::TimeGrid& grid) {
  NodeSet s(space.vertex_count(), grid.slices());
  for (std::size_t k = 1; k + 1 < grid.slices(); ++k)
    for (std::size_t i = 0; i < space.vertex_count(); ++i)
      if (!space.is_boundary(i)) s.insert(k, i);
  return s;
}

NodeSet nonzero_set(const SpaceTimeField& phi) {
  NodeSet s(phi.vertex_count(), phi.slice_count());
  for (std::size_t k = 0; k < phi.slice_count(); ++k)
    for (std::size_t i = 0; i < phi.vertex_count(); ++i)
      if (phi(k, i) != 0.0) s.insert(k, i);
  return s;
}

NodeSet dilate(const mesh::Space& space, const NodeSet& set) {
  NodeSet out = set;
  const std::size_t slices = set.slices();
  for (std::size_t k = 0; k < slices; ++k)
    for (std::size_t i = 0; i < set.vertices(); ++i) {
      if (!set.contains(k, i)) continue;
      if (k > 0) out.insert(k - 1, i);
      if (k + 1 < slices) out.insert(k + 1, i);
      for (const auto& inc : space.neighbours(i)) out.insert(k, inc.other);
    }
  for (std::size_t k = 0; k < slices; ++k)
    for (std::size_t i = 0; i < set.vertices(); ++i)
      if (k == 0 || k + 1 == slices || space.is_boundary(i)) out.erase(k, i);
  return out;
}

NodeSet support_set(const SpaceTimeField& phi) { return dilate(phi.space(), nonzero_set(phi)); }

NodeSet open_enclosure(const SpaceTimeField& phi) { return dilate(phi.space(), support_set(phi)); }

NodeSet resolve_region(const SpaceTimeField& phi, const RegionForm& form) {
  switch (form.tag) {
    case RegionTag::OpenSet:
    case RegionTag::MeasurableSet:
      if (!form.set) throw ParameterError(to_string(form.tag) + " region needs explicit set data");
      return *form.set;
    case RegionTag::NonzeroSet: return nonzero_set(phi);
    case RegionTag::Support: return support_set(phi);
  }
  throw ParameterError("unknown region form");
}

}  // namespace pqm::quasimin
