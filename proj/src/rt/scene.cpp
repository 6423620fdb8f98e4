#include "cirforge/rt/scene.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cirforge/util/digest.hpp"

namespace cirforge::rt {

using nlohmann::json;

const Surface* Scene::find_surface(int id) const {
  for (const auto& s : surfaces) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::string to_string(Axis axis) {
  switch (axis) {
    case Axis::x:
      return "x";
    case Axis::y:
      return "y";
    case Axis::z:
      return "z";
  }
  return "?";
}

std::string to_string(Polarization p) { return p == Polarization::perp ? "perp" : "par"; }

Polarization polarization_from_string(const std::string& s) {
  if (s == "perp") return Polarization::perp;
  if (s == "par") return Polarization::par;
  throw SceneError("unknown polarization '" + s + "' (expected perp or par)");
}

namespace {

Axis axis_from_string(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  if (s == "z") return Axis::z;
  throw SceneError("unknown plane_axis '" + s + "'");
}

bool on_surface(const Surface& s, Vec3 p) {
  return std::abs(s.signed_distance(p)) < 1e-9 && s.contains_strict(p);
}

json vec_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw SceneError(std::string(what) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json box_json(const Box& b) { return json{{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }

Box box_from(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("min") || !j.contains("max")) {
    throw SceneError(std::string(what) + " must be an object with min and max");
  }
  return {vec_from(j.at("min"), what), vec_from(j.at("max"), what)};
}

}  // namespace

std::vector<std::string> validate_scene(const Scene& scene) {
  std::vector<std::string> issues;
  if (!(scene.frequency_hz > 0.0) || !std::isfinite(scene.frequency_hz)) issues.push_back("frequency_hz must be > 0");
  if (!(scene.wave_speed > 0.0)) issues.push_back("wave_speed must be > 0");
  if (scene.max_reflection_order < 0) issues.push_back("max_reflection_order must be >= 0");
  const Box& r = scene.ue_region;
  if (!(r.min.x <= r.max.x && r.min.y <= r.max.y && r.min.z <= r.max.z)) {
    issues.push_back("ue_region min must not exceed max");
  }
  for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
    const Surface& s = scene.surfaces[i];
    const std::string tag = "surface " + std::to_string(s.id);
    if (!(s.min_u < s.max_u)) issues.push_back(tag + ": min_u must be < max_u");
    if (!(s.min_v < s.max_v)) issues.push_back(tag + ": min_v must be < max_v");
    if (!(s.permittivity >= 1.0)) issues.push_back(tag + ": permittivity must be >= 1");
    for (std::size_t k = 0; k < i; ++k) {
      if (scene.surfaces[k].id == s.id) issues.push_back(tag + ": duplicate id");
    }
  }
  for (const Vec3& bs : bs_antennas(scene)) {
    for (const Surface& s : scene.surfaces) {
      if (on_surface(s, bs)) issues.push_back("base station lies on surface " + std::to_string(s.id));
    }
  }
  return issues;
}

std::vector<Vec3> bs_antennas(const Scene& scene) {
  if (!scene.array) return {scene.bs_position};
  const AntennaArray& a = *scene.array;
  const double d = a.spacing_m > 0.0 ? a.spacing_m : 0.5 * scene.wavelength();
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(a.rows * a.cols));
  for (int r = 0; r < a.rows; ++r) {
    for (int c = 0; c < a.cols; ++c) {
      out.push_back(a.first_element + Vec3{c * d, r * d, 0.0});
    }
  }
  return out;
}

std::vector<Surface> building_walls(Vec3 lo, Vec3 hi, int first_id, double permittivity) {
  std::vector<Surface> walls;
  // x-facing walls span (y, z); y-facing walls span (x, z).
  walls.push_back({first_id + 0, Axis::x, lo.x, lo.y, hi.y, lo.z, hi.z, permittivity});
  walls.push_back({first_id + 1, Axis::x, hi.x, lo.y, hi.y, lo.z, hi.z, permittivity});
  walls.push_back({first_id + 2, Axis::y, lo.y, lo.x, hi.x, lo.z, hi.z, permittivity});
  walls.push_back({first_id + 3, Axis::y, hi.y, lo.x, hi.x, lo.z, hi.z, permittivity});
  return walls;
}

Scene paper_scene() {
  // Two 55x10x18 m blocks on the south side of a 30 m wide street and two
  // 55x16x18 m blocks on the north side, 16 m apart along x. The BS sits on
  // the roof of the north-west block.
  Scene s;
  s.name = "paper_scene";
  auto add = [&](Vec3 lo, Vec3 hi) {
    const int id = static_cast<int>(s.surfaces.size()) + 1;
    for (auto& w : building_walls(lo, hi, id)) s.surfaces.push_back(w);
  };
  add({0, 0, 0}, {55, 10, 18});     // building 1
  add({71, 0, 0}, {126, 10, 18});   // building 2
  add({71, 40, 0}, {126, 56, 18});  // building 3
  add({0, 40, 0}, {55, 56, 18});    // building 4
  s.bs_position = {45, 48, 37};
  s.frequency_hz = 3e9;
  s.max_reflection_order = 2;
  s.ue_region = {{20, 15, 1.6}, {120, 30, 1.6}};
  return s;
}

Scene paper_scene_nlos() {
  Scene s = paper_scene();
  s.name = "paper_scene_nlos";
  const Vec3 lo{40, 27, 0}, hi{100, 32, 26};  // building 5, 60x5x26 m
  const int id = static_cast<int>(s.surfaces.size()) + 1;
  for (auto& w : building_walls(lo, hi, id)) s.surfaces.push_back(w);
  s.ue_region = {{20, 15, 1.6}, {120, 35, 1.6}};
  s.ue_exclusions.push_back({{lo.x, lo.y, 0}, {hi.x, hi.y, hi.z}});
  s.occlusion_check = true;
  return s;
}

Scene paper_scene_mimo(Vec3 first_element) {
  Scene s = paper_scene();
  s.name = "paper_scene_mimo";
  s.array = AntennaArray{8, 8, 0.0, first_element};
  s.bs_position = first_element;
  return s;
}

std::vector<std::string> scene_preset_names() {
  return {"paper_scene", "paper_scene_nlos", "paper_scene_mimo", "paper_scene_mimo_bs"};
}

Scene scene_preset(const std::string& name) {
  if (name == "paper_scene") return paper_scene();
  if (name == "paper_scene_nlos") return paper_scene_nlos();
  if (name == "paper_scene_mimo") return paper_scene_mimo({45, 18, 37});
  if (name == "paper_scene_mimo_bs") {
    Scene s = paper_scene_mimo({45, 48, 37});
    s.name = "paper_scene_mimo_bs";
    return s;
  }
  throw SceneError("unknown scene preset '" + name + "'");
}

json scene_to_json(const Scene& s) {
  json surfaces = json::array();
  for (const auto& f : s.surfaces) {
    surfaces.push_back({{"id", f.id},
                        {"plane_axis", to_string(f.plane_axis)},
                        {"plane_coord", f.plane_coord},
                        {"min_u", f.min_u},
                        {"max_u", f.max_u},
                        {"min_v", f.min_v},
                        {"max_v", f.max_v},
                        {"permittivity", f.permittivity}});
  }
  json j{{"name", s.name},
         {"frequency_hz", s.frequency_hz},
         {"wave_speed", s.wave_speed},
         {"bs_position", vec_json(s.bs_position)},
         {"max_reflection_order", s.max_reflection_order},
         {"occlusion_check", s.occlusion_check},
         {"polarization", to_string(s.polarization)},
         {"ue_region", box_json(s.ue_region)},
         {"surfaces", surfaces}};
  if (!s.ue_exclusions.empty()) {
    json ex = json::array();
    for (const auto& b : s.ue_exclusions) ex.push_back(box_json(b));
    j["ue_exclusions"] = ex;
  }
  if (s.array) {
    j["array"] = {{"rows", s.array->rows},
                  {"cols", s.array->cols},
                  {"spacing_m", s.array->spacing_m},
                  {"first_element", vec_json(s.array->first_element)}};
  }
  return j;
}

Scene scene_from_json(const json& j) {
  try {
    Scene s;
    s.name = j.value("name", std::string("custom"));
    s.frequency_hz = j.at("frequency_hz").get<double>();
    s.wave_speed = j.value("wave_speed", kSpeedOfLight);
    s.bs_position = vec_from(j.at("bs_position"), "bs_position");
    s.max_reflection_order = j.value("max_reflection_order", 2);
    s.occlusion_check = j.value("occlusion_check", false);
    s.polarization = polarization_from_string(j.value("polarization", std::string("perp")));
    s.ue_region = box_from(j.at("ue_region"), "ue_region");
    int next_id = 1;
    for (const auto& f : j.value("surfaces", json::array())) {
      Surface surf;
      surf.id = f.value("id", next_id);
      surf.plane_axis = axis_from_string(f.at("plane_axis").get<std::string>());
      surf.plane_coord = f.at("plane_coord").get<double>();
      surf.min_u = f.at("min_u").get<double>();
      surf.max_u = f.at("max_u").get<double>();
      surf.min_v = f.at("min_v").get<double>();
      surf.max_v = f.at("max_v").get<double>();
      surf.permittivity = f.value("permittivity", kConcretePermittivity);
      next_id = surf.id + 1;
      s.surfaces.push_back(surf);
    }
    for (const auto& b : j.value("ue_exclusions", json::array())) s.ue_exclusions.push_back(box_from(b, "ue_exclusions"));
    if (j.contains("array")) {
      const json& a = j.at("array");
      s.array = AntennaArray{a.value("rows", 8), a.value("cols", 8), a.value("spacing_m", 0.0),
                             vec_from(a.at("first_element"), "array.first_element")};
    }
    return s;
  } catch (const json::exception& e) {
    throw SceneError(std::string("malformed scene: ") + e.what());
  }
}

Scene load_scene(const std::string& name_or_path) {
  Scene s;
  const auto names = scene_preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    s = scene_preset(name_or_path);
  } else {
    std::ifstream in(name_or_path);
    if (!in) throw SceneError("cannot open scene '" + name_or_path + "' (not a preset or readable file)");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw SceneError("cannot parse scene '" + name_or_path + "': " + e.what());
    }
    s = scene_from_json(j);
  }
  if (auto issues = validate_scene(s); !issues.empty()) {
    std::ostringstream msg;
    msg << "invalid scene '" << name_or_path << "':";
    for (const auto& i : issues) msg << "\n  " << i;
    throw SceneError(msg.str());
  }
  return s;
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SceneError("cannot write '" + path + "'");
  out << scene_to_json(scene).dump(2) << '\n';
}

std::uint64_t scene_digest(const Scene& scene) { return fnv1a(scene_to_json(scene).dump()); }

}  // namespace cirforge::rt
