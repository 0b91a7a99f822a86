#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

// Scene layout for one base station (BS) array, one reflecting surface (RIS)
// array and one single-antenna user (UE). Arrays are uniform rectangular
// grids described by per-element offsets from a reference point placed at the
// array centroid. The user is addressed either in Cartesian coordinates or in
// spherical coordinates relative to the RIS reference.

namespace risloc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// Spherical coordinates as used throughout: elevation measured from the +z
// axis (0 at the pole), azimuth in [-pi, pi) measured in the x-y plane from
// +x. Angles are radians, distance metres.
struct SphericalDirection {
  double distance = 0.0;
  double elevation = 0.0;
  double azimuth = 0.0;
};

enum class Plane { XY, XZ, YZ };
enum class Wavefront { Near, Far };

// Element offsets of a rows x cols uniform rectangular array in the given
// coordinate plane, centred on the origin (zero centroid), row-major order.
// Rows run along the first axis of the plane name, columns along the second.
std::vector<Vec3> build_ura(int rows, int cols, double spacing, Plane plane);

// p = ref + d * [sin(el)cos(az), sin(el)sin(az), cos(el)].
Vec3 spherical_to_cartesian(const Vec3& reference, const SphericalDirection& dir);

// Inverse of the above; azimuth 0 when the point lies on the pole axis.
// Coincident points have no direction and raise DegenerateGeometryError.
SphericalDirection cartesian_to_spherical(const Vec3& reference, const Vec3& point);

struct ScenarioGeometry {
  Vec3 bs_reference;
  Vec3 ris_reference;
  Vec3 ue_position;
  std::vector<Vec3> bs_offsets;
  std::vector<Vec3> ris_offsets;

  int n_bs() const { return static_cast<int>(bs_offsets.size()); }
  int n_ris() const { return static_cast<int>(ris_offsets.size()); }
  Vec3 bs_element(int b) const;
  Vec3 ris_element(int r) const;

  // Direction of the UE seen from the RIS reference (d_RU, theta_RU, phi_RU).
  SphericalDirection ue_direction() const;

  void validate() const;
};

// Projection of a RIS element offset onto the negative direction vector:
// gamma = -offset . [sin(el)cos(az), sin(el)sin(az), cos(el)]. This is the
// first-order term of the element-to-UE distance expansion and is equally
// used for BS-side steering with the respective arrival/departure direction.
double gamma_ru(const Vec3& ris_offset, const SphericalDirection& dir);

// Element-to-UE distance. Near evaluates the exact spherical-wave expression
// sqrt(rho^2 + d^2 + 2 d gamma) which equals the Euclidean distance between
// UE and element; Far uses the planar-wave approximation d + gamma.
double distance_ru(int ris_index, const ScenarioGeometry& geometry,
                   const SphericalDirection& dir, Wavefront model);

}  // namespace risloc
