#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "cirforge/rt/scene.hpp"

namespace cirforge::rt {

// One propagation path from the UE (transmitter) to a BS antenna.
struct PathComponent {
  int order = 0;                        // 0 = line of sight
  std::vector<int> surface_ids;         // bounce order, from the transmitter side
  Vec3 image_point;                     // deepest image of the transmitter
  std::vector<Vec3> reflection_points;  // same order as surface_ids
  Vec3 tx;
  Vec3 rx;
  double length_m = 0.0;
  double delay_s = 0.0;
  std::complex<double> gain;
};

// Reflection of p across the infinite plane of s.
Vec3 mirror_point(Vec3 p, const Surface& s);

struct ReflectionCoefficients {
  double perp = 0.0;
  double par = 0.0;
};

// Fresnel amplitude coefficients for incidence angle theta (from the normal).
// Throws std::domain_error when eps - sin^2(theta) < 0.
ReflectionCoefficients reflection_coefficients(double theta, double eps);

// LOS plus every specular chain up to scene.max_reflection_order whose
// reflection points fall strictly inside their rectangles (and, with
// occlusion_check, whose segments cross no other surface). rx defaults to
// scene.bs_position. Gains use scene.polarization.
std::vector<PathComponent> trace_paths(const Scene& scene, Vec3 tx);
std::vector<PathComponent> trace_paths(const Scene& scene, Vec3 tx, Vec3 rx);

// a * exp(-j 2 pi f d / v) with a = lambda / (4 pi d) times the product of
// per-bounce Fresnel coefficients. Throws std::invalid_argument if d == 0.
std::complex<double> path_gain(const PathComponent& path, const Scene& scene, Polarization polarization);

// Incidence angles (radians, from the surface normal) at each bounce.
std::vector<double> incidence_angles(const PathComponent& path, const Scene& scene);

}  // namespace cirforge::rt
