#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirforge/rt/vec3.hpp"

namespace cirforge::rt {

inline constexpr double kSpeedOfLight = 2.99792458e8;
// Relative permittivity of concrete around 3 GHz (real part).
inline constexpr double kConcretePermittivity = 5.31;

enum class Axis : int { x = 0, y = 1, z = 2 };
enum class Polarization { perp, par };

struct Surface {
  int id = 0;
  Axis plane_axis = Axis::x;
  double plane_coord = 0.0;
  // Extents along the two in-plane axes, in increasing axis order
  // (x-plane: u=y, v=z; y-plane: u=x, v=z; z-plane: u=x, v=y).
  double min_u = 0.0, max_u = 0.0, min_v = 0.0, max_v = 0.0;
  double permittivity = kConcretePermittivity;

  std::size_t axis_index() const { return static_cast<std::size_t>(plane_axis); }
  std::size_t u_index() const { return plane_axis == Axis::x ? 1 : 0; }
  std::size_t v_index() const { return plane_axis == Axis::z ? 1 : 2; }
  double signed_distance(Vec3 p) const { return p[axis_index()] - plane_coord; }
  // Strict interior test of the rectangle for a point on the plane.
  bool contains_strict(Vec3 p) const {
    const double u = p[u_index()], v = p[v_index()];
    return u > min_u && u < max_u && v > min_v && v < max_v;
  }
};

struct AntennaArray {
  int rows = 8;
  int cols = 8;
  double spacing_m = 0.0;  // 0 means half a wavelength
  Vec3 first_element;
};

struct Scene {
  std::string name = "custom";
  std::vector<Surface> surfaces;
  Vec3 bs_position;
  double frequency_hz = 3e9;
  double wave_speed = kSpeedOfLight;
  int max_reflection_order = 2;
  Box ue_region;
  std::vector<Box> ue_exclusions;
  bool occlusion_check = false;
  Polarization polarization = Polarization::perp;
  std::optional<AntennaArray> array;

  double wavelength() const { return wave_speed / frequency_hz; }
  const Surface* find_surface(int id) const;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Empty when the scene satisfies every invariant.
std::vector<std::string> validate_scene(const Scene& scene);

// Receive points: the single BS antenna, or every element of the array in
// row-major order (row index along y, column index along x).
std::vector<Vec3> bs_antennas(const Scene& scene);

// The four vertical walls of an axis-aligned building footprint.
std::vector<Surface> building_walls(Vec3 min_corner, Vec3 max_corner, int first_id,
                                    double permittivity = kConcretePermittivity);

Scene paper_scene();
Scene paper_scene_nlos();
// 8x8 half-wavelength planar array parallel to the x-y plane.
Scene paper_scene_mimo(Vec3 first_element);
// "paper_scene", "paper_scene_nlos", "paper_scene_mimo" (first element at
// (45, 18, 37)), "paper_scene_mimo_bs" (first element at the BS position).
Scene scene_preset(const std::string& name);
std::vector<std::string> scene_preset_names();

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
// Accepts a preset name or a path to a JSON scene file; validates.
Scene load_scene(const std::string& name_or_path);
void save_scene(const Scene& scene, const std::string& path);
std::uint64_t scene_digest(const Scene& scene);

std::string to_string(Axis axis);
std::string to_string(Polarization p);
Polarization polarization_from_string(const std::string& s);

}  // namespace cirforge::rt
