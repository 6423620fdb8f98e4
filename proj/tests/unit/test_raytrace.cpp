#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "cirforge/rt/cir.hpp"
#include "cirforge/rt/raytrace.hpp"
#include "cirforge/util/rng.hpp"

using namespace cirforge;
using namespace cirforge::rt;

namespace {

Surface wall_y(double y, double min_x, double max_x, double min_z, double max_z, double eps = kConcretePermittivity) {
  Surface s;
  s.id = 1;
  s.plane_axis = Axis::y;
  s.plane_coord = y;
  s.min_u = min_x;
  s.max_u = max_x;
  s.min_v = min_z;
  s.max_v = max_z;
  s.permittivity = eps;
  return s;
}

Scene empty_scene() {
  Scene s;
  s.bs_position = {0, 0, 10};
  s.ue_region = {{-50, -50, 0}, {50, 50, 0}};
  return s;
}

double lambda_at(double f) { return 2.99792458e8 / f; }

}  // namespace

TEST_SUITE("raytrace") {
  TEST_CASE("mirror_point examples") {
    const Surface s = wall_y(10, -100, 100, -100, 100);
    CHECK(mirror_point({3, 4, 5}, s) == Vec3{3, 16, 5});
    CHECK(mirror_point({7, 10, -2}, s) == Vec3{7, 10, -2});
    const Surface s30 = wall_y(30, -100, 100, -100, 100);
    CHECK(mirror_point({45, 48, 37}, s30) == Vec3{45, 12, 37});
  }

  TEST_CASE("mirror_point is an involution on every axis") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
      Surface s;
      s.plane_axis = static_cast<Axis>(rng.below(3));
      s.plane_coord = rng.uniform(-100, 100);
      const Vec3 p{rng.uniform(-200, 200), rng.uniform(-200, 200), rng.uniform(-200, 200)};
      const Vec3 back = mirror_point(mirror_point(p, s), s);
      CHECK(distance(back, p) <= 1e-12 * std::max(1.0, norm(p)));
    }
  }

  TEST_CASE("Fresnel coefficients match hand evaluation") {
    auto r = reflection_coefficients(0.0, 1.0);
    CHECK(r.perp == doctest::Approx(0.0));
    CHECK(r.par == doctest::Approx(0.0));
    r = reflection_coefficients(0.0, 4.0);
    CHECK(r.perp == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK(r.par == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    r = reflection_coefficients(std::numbers::pi / 2 - 1e-9, 5.31);
    CHECK(std::abs(r.perp) == doctest::Approx(1.0).epsilon(1e-6));

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const double theta = rng.uniform(0.0, std::numbers::pi / 2 - 1e-6);
      const double eps = rng.uniform(1.0, 20.0);
      const double c = std::cos(theta), root = std::sqrt(eps - std::sin(theta) * std::sin(theta));
      r = reflection_coefficients(theta, eps);
      CHECK(r.perp == doctest::Approx((c - root) / (c + root)).epsilon(1e-13));
      CHECK(r.par == doctest::Approx((eps * c - root) / (eps * c + root)).epsilon(1e-13));
      CHECK(std::abs(r.perp) <= 1.0);
      CHECK(std::abs(r.par) <= 1.0);
    }
  }

  TEST_CASE("free space yields exactly the LOS path") {
    const Scene s = empty_scene();
    const Vec3 tx{3, -4, 1.5};
    const auto paths = trace_paths(s, tx);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].order == 0);
    CHECK(paths[0].length_m == distance(tx, s.bs_position));
    CHECK(paths[0].delay_s == paths[0].length_m / kSpeedOfLight);
  }

  TEST_CASE("3-4-5 image geometry") {
    Scene s = empty_scene();
    s.surfaces.push_back(wall_y(0, -1e6, 1e6, -1e6, 1e6));
    const auto paths = trace_paths(s, {0, 2, 0}, {4, 1, 0});
    const auto nlos = std::find_if(paths.begin(), paths.end(), [](const PathComponent& p) { return p.order == 1; });
    REQUIRE(nlos != paths.end());
    CHECK(nlos->length_m == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(nlos->image_point == Vec3{0, -2, 0});
    REQUIRE(nlos->reflection_points.size() == 1);
    // The reflection point divides the unfolded segment in the ratio 2 : 1.
    CHECK(nlos->reflection_points[0].x == doctest::Approx(8.0 / 3.0));
    CHECK(nlos->reflection_points[0].y == doctest::Approx(0.0));
  }

  TEST_CASE("single-wall NLOS length agrees with brute-force Fermat search") {
    Rng rng(11);
    int checked = 0;
    while (checked < 10) {
      const double wy = rng.uniform(-5, 5);
      Scene s = empty_scene();
      s.surfaces.push_back(wall_y(wy, -10, 10, -5, 5));
      const Vec3 tx{rng.uniform(-8, 8), wy + rng.uniform(0.5, 6), rng.uniform(-4, 4)};
      const Vec3 rx{rng.uniform(-8, 8), wy + rng.uniform(0.5, 6), rng.uniform(-4, 4)};
      const auto paths = trace_paths(s, tx, rx);
      const auto nlos = std::find_if(paths.begin(), paths.end(), [](const PathComponent& p) { return p.order == 1; });
      if (nlos == paths.end()) continue;
      // Coarse grid, then a fine grid around the best cell.
      auto len = [&](double x, double z) { return distance(tx, {x, wy, z}) + distance({x, wy, z}, rx); };
      double best = INFINITY, bx = 0, bz = 0;
      const int n = 400;
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
          const double x = -10 + 20.0 * i / n, z = -5 + 10.0 * j / n;
          if (const double l = len(x, z); l < best) best = l, bx = x, bz = z;
        }
      }
      for (int i = -200; i <= 200; ++i) {
        for (int j = -200; j <= 200; ++j) {
          best = std::min(best, len(bx + 0.05 * i / 200, bz + 0.025 * j / 200));
        }
      }
      CHECK(std::abs(nlos->length_m - best) < 1e-4);
      CHECK(nlos->length_m <= best + 1e-12);
      ++checked;
    }
  }

  TEST_CASE("reflection points off the rectangle invalidate the path") {
    Scene s = empty_scene();
    s.surfaces.push_back(wall_y(0, 10, 20, -5, 5));
    const auto paths = trace_paths(s, {0, 2, 0}, {4, 1, 0});
    CHECK(paths.size() == 1);
  }

  TEST_CASE("path lengths are reciprocal") {
    const Scene s = scene_preset("paper_scene");
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      const Vec3 tx{rng.uniform(20, 120), rng.uniform(15, 30), 1.6};
      const Vec3 rx = s.bs_position;
      auto forward = trace_paths(s, tx, rx);
      auto reverse = trace_paths(s, rx, tx);
      REQUIRE(forward.size() == reverse.size());
      std::vector<double> a, b;
      for (const auto& p : forward) a.push_back(p.length_m);
      for (const auto& p : reverse) b.push_back(p.length_m);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-9);
    }
  }

  TEST_CASE("path invariants on the city scene") {
    const Scene s = scene_preset("paper_scene");
    Rng rng(9);
    for (int i = 0; i < 50; ++i) {
      const Vec3 tx{rng.uniform(20, 120), rng.uniform(15, 30), 1.6};
      for (const auto& p : trace_paths(s, tx)) {
        CHECK(std::abs(p.length_m - distance(p.image_point, s.bs_position)) < 1e-9);
        double segs = 0.0;
        Vec3 prev = tx;
        for (const Vec3& r : p.reflection_points) {
          segs += distance(prev, r);
          prev = r;
        }
        segs += distance(prev, s.bs_position);
        CHECK(std::abs(p.length_m - segs) < 1e-9);
        CHECK(p.delay_s == p.length_m / kSpeedOfLight);
        CHECK(std::abs(p.gain) <= s.wavelength() / (4 * std::numbers::pi * p.length_m) * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("path gain magnitudes and phase") {
    const double f = 3e9;
    const double a_los = lambda_at(f) / (4 * std::numbers::pi * 100.0);
    CHECK(a_los == doctest::Approx(7.953e-5).epsilon(1e-3));

    Scene s = empty_scene();
    s.frequency_hz = f;
    s.bs_position = {0, 70, 0};
    auto paths = trace_paths(s, {0, 170, 0});
    REQUIRE(paths.size() == 1);
    CHECK(std::abs(paths[0].gain) == doctest::Approx(a_los).epsilon(1e-12));
    const std::complex<double> expected = a_los * std::exp(std::complex<double>(0, -2 * std::numbers::pi * f * 100.0 / kSpeedOfLight));
    CHECK(std::abs(paths[0].gain - expected) < 1e-18);

    // Normal incidence off a wall at y = 0: tx at y = 30, rx at y = 70.
    s.surfaces.push_back(wall_y(0, -10, 10, -10, 10, 4.0));
    paths = trace_paths(s, {0, 30, 0});
    const auto nlos = std::find_if(paths.begin(), paths.end(), [](const PathComponent& p) { return p.order == 1; });
    REQUIRE(nlos != paths.end());
    CHECK(nlos->length_m == doctest::Approx(100.0));
    CHECK(std::abs(nlos->gain) == doctest::Approx(a_los / 3.0).epsilon(1e-9));
    CHECK(std::abs(nlos->gain) == doctest::Approx(2.651e-5).epsilon(1e-3));

    s.surfaces.back().permittivity = 1.0;
    paths = trace_paths(s, {0, 30, 0});
    for (const auto& p : paths) {
      if (p.order > 0) CHECK(std::abs(p.gain) == 0.0);
    }
  }

  TEST_CASE("delay window and bins") {
    CHECK(reference_window().q() == 182);
    const std::vector<PathComponent> none;
    const CirVector empty = synthesize_cir(none, reference_window());
    CHECK(empty.values.size() == 182);
    CHECK(std::all_of(empty.values.begin(), empty.values.end(), [](double v) { return v == 0.0; }));

    PathComponent p;
    p.length_m = 70.0;
    p.delay_s = 70.0 / kSpeedOfLight;
    p.gain = {1.5e-4, -2.5e-5};
    CHECK(p.delay_s * 1e9 == doctest::Approx(233.4948).epsilon(1e-6));
    const std::vector<PathComponent> one{p};
    const CirVector cir = synthesize_cir(one, reference_window());
    // Independent bin evaluation.
    const long bin = static_cast<long>(std::floor((p.delay_s - 220e-9) / 1e-9 + 0.5));
    CHECK(bin == 13);
    CHECK(delay_bin(p.delay_s, reference_window()) == 13);
    for (std::size_t k = 0; k < cir.values.size(); ++k) {
      if (k == 26) {
        CHECK(cir.values[k] == p.gain.real());
      } else if (k == 27) {
        CHECK(cir.values[k] == p.gain.imag());
      } else {
        CHECK(cir.values[k] == 0.0);
      }
    }
    p.delay_s = 400e-9;
    const std::vector<PathComponent> late{p};
    SynthesisStats stats;
    synthesize_cir(late, reference_window(), &stats);
    CHECK(stats.dropped == 1);
  }

  TEST_CASE("bin conservation on traced paths") {
    const Scene s = scene_preset("paper_scene");
    Rng rng(21);
    for (int i = 0; i < 50; ++i) {
      const Vec3 tx{rng.uniform(20, 120), rng.uniform(15, 30), 1.6};
      const auto paths = trace_paths(s, tx);
      double min_delay = INFINITY;
      for (const auto& p : paths) min_delay = std::min(min_delay, p.delay_s);
      const DelayWindow w = auto_window(min_delay);
      CHECK(w.q() == 182);
      CHECK(w.start_s <= min_delay - 5e-9 + 1e-18);
      SynthesisStats stats;
      const CirVector cir = synthesize_cir(paths, w, &stats);
      std::complex<double> bins{0, 0}, gains{0, 0};
      for (std::size_t k = 0; k < cir.values.size() / 2; ++k) bins += std::complex<double>(cir.values[2 * k], cir.values[2 * k + 1]);
      for (const auto& p : paths) {
        if (delay_bin(p.delay_s, w) >= 0) gains += p.gain;
      }
      CHECK(std::abs(bins - gains) <= 1e-15 * std::abs(gains));
      if (stats.collisions == 0) {
        for (const auto& p : paths) {
          const long b = delay_bin(p.delay_s, w);
          if (b < 0) continue;
          CHECK(cir.values[2 * b] == p.gain.real());
          CHECK(cir.values[2 * b + 1] == p.gain.imag());
        }
      }
    }
  }

  TEST_CASE("scene validation and serialization") {
    Scene s = scene_preset("paper_scene");
    CHECK(validate_scene(s).empty());
    CHECK(scene_digest(scene_from_json(scene_to_json(s))) == scene_digest(s));
    Scene bad = s;
    bad.surfaces[0].max_u = bad.surfaces[0].min_u;
    CHECK_FALSE(validate_scene(bad).empty());
    bad = s;
    bad.surfaces[0].permittivity = 0.5;
    CHECK_FALSE(validate_scene(bad).empty());
    bad = s;
    bad.frequency_hz = 0;
    CHECK_FALSE(validate_scene(bad).empty());
    CHECK_THROWS_AS(load_scene("no_such_scene_or_file"), SceneError);
    CHECK(bs_antennas(scene_preset("paper_scene_mimo")).size() == 64);
    CHECK(bs_antennas(scene_preset("paper_scene_mimo")).front() == Vec3{45, 18, 37});
  }
}
