#include "cirforge/rt/raytrace.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cirforge::rt {

Vec3 mirror_point(Vec3 p, const Surface& s) {
  Vec3 out = p;
  const std::size_t a = s.axis_index();
  out[a] = 2.0 * s.plane_coord - p[a];
  return out;
}

namespace {

ReflectionCoefficients coefficients(double cos_theta, double sin2_theta, double eps) {
  const double radicand = eps - sin2_theta;
  if (radicand < 0.0) throw std::domain_error("reflection_coefficients: eps - sin^2(theta) < 0");
  const double root = std::sqrt(radicand);
  ReflectionCoefficients r;
  r.perp = (cos_theta - root) / (cos_theta + root);
  r.par = (eps * cos_theta - root) / (eps * cos_theta + root);
  return r;
}

// Parameter t in (0, 1) where segment a->b crosses the plane, or a negative
// value if it does not cross strictly.
double crossing(const Surface& s, Vec3 a, Vec3 b) {
  const double da = s.signed_distance(a);
  const double db = s.signed_distance(b);
  if (!((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0))) return -1.0;
  return da / (da - db);
}

bool segment_blocked(const Scene& scene, Vec3 a, Vec3 b, int skip_a, int skip_b) {
  for (const Surface& s : scene.surfaces) {
    if (s.id == skip_a || s.id == skip_b) continue;
    const double t = crossing(s, a, b);
    if (t <= 0.0) continue;
    Vec3 hit = a + t * (b - a);
    hit[s.axis_index()] = s.plane_coord;
    if (s.contains_strict(hit)) return true;
  }
  return false;
}

struct ChainTracer {
  const Scene& scene;
  Vec3 tx;
  Vec3 rx;
  std::vector<PathComponent>& out;
  std::vector<std::size_t> chain;
  std::vector<Vec3> images;  // images[j] = image after j reflections; images[0] = tx

  void emit() {
    const std::size_t k = chain.size();
    std::vector<Vec3> points(k);
    Vec3 next = rx;
    for (std::size_t j = k; j-- > 0;) {
      const Surface& s = scene.surfaces[chain[j]];
      const Vec3 image = images[j + 1];
      const double t = crossing(s, image, next);
      if (t <= 0.0) return;
      Vec3 r = image + t * (next - image);
      r[s.axis_index()] = s.plane_coord;
      if (!s.contains_strict(r)) return;
      points[j] = r;
      next = r;
    }
    if (scene.occlusion_check) {
      Vec3 prev = tx;
      int prev_id = -1;
      for (std::size_t j = 0; j < k; ++j) {
        const int id = scene.surfaces[chain[j]].id;
        if (segment_blocked(scene, prev, points[j], prev_id, id)) return;
        prev = points[j];
        prev_id = id;
      }
      if (segment_blocked(scene, prev, rx, prev_id, -1)) return;
    }
    PathComponent p;
    p.order = static_cast<int>(k);
    p.tx = tx;
    p.rx = rx;
    p.image_point = images[k];
    p.reflection_points = std::move(points);
    for (std::size_t idx : chain) p.surface_ids.push_back(scene.surfaces[idx].id);
    p.length_m = distance(p.image_point, rx);
    p.delay_s = p.length_m / scene.wave_speed;
    out.push_back(std::move(p));
  }

  void recurse(int depth_left) {
    if (depth_left == 0) return;
    for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
      if (!chain.empty() && chain.back() == i) continue;
      chain.push_back(i);
      images.push_back(mirror_point(images.back(), scene.surfaces[i]));
      emit();
      recurse(depth_left - 1);
      images.pop_back();
      chain.pop_back();
    }
  }
};

}  // namespace

ReflectionCoefficients reflection_coefficients(double theta, double eps) {
  const double s = std::sin(theta);
  return coefficients(std::cos(theta), s * s, eps);
}

std::vector<double> incidence_angles(const PathComponent& path, const Scene& scene) {
  std::vector<double> angles;
  Vec3 prev = path.tx;
  for (std::size_t j = 0; j < path.reflection_points.size(); ++j) {
    const Surface* s = scene.find_surface(path.surface_ids[j]);
    if (!s) throw std::invalid_argument("path references unknown surface " + std::to_string(path.surface_ids[j]));
    const Vec3 incoming = path.reflection_points[j] - prev;
    const double c = std::abs(incoming[s->axis_index()]) / norm(incoming);
    angles.push_back(std::acos(std::min(1.0, c)));
    prev = path.reflection_points[j];
  }
  return angles;
}

std::complex<double> path_gain(const PathComponent& path, const Scene& scene, Polarization polarization) {
  const double d = path.length_m;
  if (!(d > 0.0)) throw std::invalid_argument("path_gain: zero-length path");
  const double lambda = scene.wavelength();
  double amplitude = lambda / (4.0 * std::numbers::pi * d);
  Vec3 prev = path.tx;
  for (std::size_t j = 0; j < path.reflection_points.size(); ++j) {
    const Surface* s = scene.find_surface(path.surface_ids[j]);
    if (!s) throw std::invalid_argument("path references unknown surface " + std::to_string(path.surface_ids[j]));
    const Vec3 incoming = path.reflection_points[j] - prev;
    const double len = norm(incoming);
    const double cos_t = std::min(1.0, std::abs(incoming[s->axis_index()]) / len);
    const ReflectionCoefficients r = coefficients(cos_t, 1.0 - cos_t * cos_t, s->permittivity);
    amplitude *= polarization == Polarization::perp ? r.perp : r.par;
    prev = path.reflection_points[j];
  }
  const double phase = -2.0 * std::numbers::pi * scene.frequency_hz * d / scene.wave_speed;
  return std::polar(1.0, phase) * amplitude;
}

std::vector<PathComponent> trace_paths(const Scene& scene, Vec3 tx) { return trace_paths(scene, tx, scene.bs_position); }

std::vector<PathComponent> trace_paths(const Scene& scene, Vec3 tx, Vec3 rx) {
  std::vector<PathComponent> out;
  if (!scene.occlusion_check || !segment_blocked(scene, tx, rx, -1, -1)) {
    PathComponent los;
    los.tx = tx;
    los.rx = rx;
    los.image_point = tx;
    los.length_m = distance(tx, rx);
    los.delay_s = los.length_m / scene.wave_speed;
    out.push_back(std::move(los));
  }
  ChainTracer tracer{scene, tx, rx, out, {}, {tx}};
  tracer.recurse(scene.max_reflection_order);
  for (auto& p : out) p.gain = path_gain(p, scene, scene.polarization);
  return out;
}

}  // namespace cirforge::rt
