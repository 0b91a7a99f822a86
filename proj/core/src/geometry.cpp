#include "risloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace risloc {

std::vector<Vec3> build_ura(int rows, int cols, double spacing, Plane plane) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("build_ura: rows and cols must be >= 1");
  if (!(spacing > 0.0))
    throw std::invalid_argument("build_ura: spacing must be positive");

  std::vector<Vec3> offsets;
  offsets.reserve(static_cast<size_t>(rows) * cols);
  const double r0 = 0.5 * (rows - 1);
  const double c0 = 0.5 * (cols - 1);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double u = (r - r0) * spacing;
      const double v = (c - c0) * spacing;
      switch (plane) {
        case Plane::XY: offsets.push_back({u, v, 0.0}); break;
        case Plane::XZ: offsets.push_back({u, 0.0, v}); break;
        case Plane::YZ: offsets.push_back({0.0, u, v}); break;
      }
    }
  }
  return offsets;
}

Vec3 spherical_to_cartesian(const Vec3& reference, const SphericalDirection& dir) {
  if (!(dir.distance > 0.0))
    throw std::invalid_argument("spherical_to_cartesian: distance must be positive");
  const double se = std::sin(dir.elevation);
  const double ce = std::cos(dir.elevation);
  const double ca = std::cos(dir.azimuth);
  const double sa = std::sin(dir.azimuth);
  return {reference.x + dir.distance * se * ca,
          reference.y + dir.distance * se * sa,
          reference.z + dir.distance * ce};
}

SphericalDirection cartesian_to_spherical(const Vec3& reference, const Vec3& point) {
  const Vec3 d = point - reference;
  const double dist = d.norm();
  if (dist == 0.0)
    throw DegenerateGeometryError("cartesian_to_spherical: coincident points");

  SphericalDirection out;
  out.distance = dist;
  double cz = d.z / dist;
  cz = std::clamp(cz, -1.0, 1.0);
  out.elevation = std::acos(cz);
  if (d.x == 0.0 && d.y == 0.0) {
    out.azimuth = 0.0;  // pole convention
  } else {
    out.azimuth = std::atan2(d.y, d.x);
    if (out.azimuth >= std::numbers::pi) out.azimuth -= 2.0 * std::numbers::pi;
  }
  return out;
}

Vec3 ScenarioGeometry::bs_element(int b) const {
  if (b < 0 || b >= n_bs())
    throw std::out_of_range("bs_element: index out of range");
  return bs_reference + bs_offsets[static_cast<size_t>(b)];
}

Vec3 ScenarioGeometry::ris_element(int r) const {
  if (r < 0 || r >= n_ris())
    throw std::out_of_range("ris_element: index out of range");
  return ris_reference + ris_offsets[static_cast<size_t>(r)];
}

SphericalDirection ScenarioGeometry::ue_direction() const {
  return cartesian_to_spherical(ris_reference, ue_position);
}

void ScenarioGeometry::validate() const {
  if (bs_offsets.empty() || ris_offsets.empty())
    throw std::invalid_argument("ScenarioGeometry: arrays must be non-empty");
  if ((ue_position - ris_reference).norm() == 0.0)
    throw DegenerateGeometryError("ScenarioGeometry: UE coincides with RIS reference");
  if ((bs_reference - ris_reference).norm() == 0.0)
    throw DegenerateGeometryError("ScenarioGeometry: BS coincides with RIS reference");
}

double gamma_ru(const Vec3& ris_offset, const SphericalDirection& dir) {
  const double se = std::sin(dir.elevation);
  const double ce = std::cos(dir.elevation);
  return -ris_offset.x * se * std::cos(dir.azimuth) -
         ris_offset.y * se * std::sin(dir.azimuth) - ris_offset.z * ce;
}

double distance_ru(int ris_index, const ScenarioGeometry& geometry,
                   const SphericalDirection& dir, Wavefront model) {
  if (ris_index < 0 || ris_index >= geometry.n_ris())
    throw std::out_of_range("distance_ru: RIS index out of range");
  if (!(dir.distance > 0.0))
    throw std::invalid_argument("distance_ru: distance must be positive");

  const Vec3& off = geometry.ris_offsets[static_cast<size_t>(ris_index)];
  const double gamma = gamma_ru(off, dir);
  if (model == Wavefront::Far) return dir.distance + gamma;

  const double rho2 = off.dot(off);
  const double radicand =
      rho2 + dir.distance * dir.distance + 2.0 * dir.distance * gamma;
  if (!(radicand > 0.0))
    throw DegenerateGeometryError("distance_ru: UE coincides with a RIS element");
  return std::sqrt(radicand);
}

}  // namespace risloc
