#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cirforge/data/dataset.hpp"
#include "cirforge/exp/trainer.hpp"
#include "cirforge/models/ae_pipeline.hpp"
#include "cirforge/models/cgrbf.hpp"
#include "cirforge/models/complexity.hpp"
#include "cirforge/models/factory.hpp"
#include "cirforge/models/model_spec.hpp"
#include "cirforge/nn/cg_kernel.hpp"
#include "cirforge/nn/gradcheck.hpp"
#include "cirforge/rt/raytrace.hpp"
#include "cirforge/util/rng.hpp"

using namespace cirforge;
using namespace cirforge::models;

namespace {

std::size_t tensor_total(const nn::Model& m) {
  std::size_t n = 0;
  for (const auto& t : m.params().tensors()) n += t.size;
  return n;
}

// Parameter count of a C-GRBF spec from its layer widths.
std::size_t cgrbf_count(const ModelSpec& s) {
  std::size_t n = 0, prev = 3;
  for (std::size_t w : s.hidden_widths) n += prev * w + w, prev = w;
  return n + 9 * s.n_kernels + s.n_kernels * s.q_out + s.q_out;
}

std::size_t mlp_count(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::size_t n = 0, prev = in;
  for (std::size_t w : hidden) n += prev * w + w, prev = w;
  return n + prev * out + out;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("parameter audit") {
    for (const auto& name : model_preset_names()) {
      if (name.rfind("table6", 0) == 0 || name.rfind("table7", 0) == 0 || name == "table1_siren" ||
          name == "table2_cgrbf") {
        continue;
      }
      const ModelSpec spec = model_preset(name);
      const auto m = build_model(spec, 1);
      CAPTURE(name);
      CHECK(parameter_count(*m) == tensor_total(*m));
      if (is_cgrbf(spec.variant)) CHECK(parameter_count(*m) == cgrbf_count(spec));
      if (spec.variant == Variant::siren) CHECK(parameter_count(*m) == mlp_count(3, spec.hidden_widths, spec.q_out));
    }
    CHECK(cgrbf_count(model_preset("table5_small_cgrbf")) == 226118);
    CHECK(mlp_count(3, {150, 256, 300, 256}, 182) == 240186);
  }

  TEST_CASE("default kernel frequency") {
    ModelSpec s = model_preset("table2_cgrbf-small");
    CHECK(s.effective_w_init_mean() == doctest::Approx(62.88).epsilon(1e-3));
    CHECK(s.effective_w_init_mean() == doctest::Approx(2 * std::numbers::pi * 3e9 / rt::kSpeedOfLight).epsilon(1e-15));
  }

  TEST_CASE("kernel initialization follows the spec") {
    ModelSpec s = model_preset("table2_cgrbf-small");
    CgrbfModel m(s);
    m.initialize(3);
    const double lambda = rt::kSpeedOfLight / s.frequency_hz;
    for (std::size_t j = 0; j < m.kernels().n_kernels; ++j) {
      const nn::CgKernel k = m.kernels().kernel(m.params().data(), j);
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(k.a[i] - s.bs_position[i]) <= 0.5 * lambda);
        CHECK(k.c[i] >= s.c_init_box.min[i]);
        CHECK(k.c[i] <= s.c_init_box.max[i]);
      }
      CHECK(k.b >= 0.0);
      CHECK(k.b < 2 * std::numbers::pi);
      CHECK(k.beta == doctest::Approx(-1.0 / (2 * 30.0 * 30.0)));
    }
  }

  TEST_CASE("complexity counts") {
    const Complexity c = complexity_count(model_preset("table5_small_cgrbf"));
    CHECK(c.multiplications == 384 + 32768 + 153600 + 36400);
    CHECK(c.multiplications == 223152);
    CHECK(c.activations == 1184);
    ModelSpec tiny = model_preset("table2_cgrbf-small");
    tiny.hidden_widths = {3};
    tiny.n_kernels = 1;
    tiny.q_out = 6;
    CHECK(complexity_count(tiny).multiplications == 15);
    CHECK_THROWS_AS(complexity_count(model_preset("desk_siren")), SpecError);

    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
      ModelSpec s = model_preset("table2_cgrbf-small");
      s.hidden_widths.clear();
      const std::size_t depth = 1 + rng.below(3);
      for (std::size_t d = 0; d + 1 < depth; ++d) s.hidden_widths.push_back(1 + rng.below(20));
      s.kernels_per_group = 1 + rng.below(2);
      s.n_kernels = s.kernels_per_group * (1 + rng.below(8));
      s.hidden_widths.push_back(3 * s.n_kernels / s.kernels_per_group);
      s.q_out = 2 * (1 + rng.below(10));
      if (rng.below(2) == 1) {
        s.residual_front = true;
        s.front_output = "identity";
        s.front_scale_m = rng.below(2) == 1 ? 1.0 : 0.1;
      }
      const auto m = build_model(s, static_cast<std::uint64_t>(t));
      const Complexity want = complexity_count(s);
      const Complexity got = instrumented_count(*m);
      CAPTURE(spec_to_json(s).dump());
      CHECK(got.multiplications == want.multiplications);
      CHECK(got.activations == want.activations);
    }
  }

  TEST_CASE("C-GRBF output is linear in the combiner") {
    const ModelSpec s = model_preset("table2_cgrbf-small");
    auto m = build_model(s, 5);
    const std::vector<double> x{70, 22, 1.6};
    const auto y1 = m->predict(x);
    for (const char* name : {"out.l0.W", "out.l0.b"}) {
      for (double& v : m->params().view(name)) v *= 2.0;
    }
    const auto y2 = m->predict(x);
    for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y2[i] == 2.0 * y1[i]);
    for (double& v : m->params().view("out.l0.W")) v = 0.0;
    const auto y3 = m->predict(x);
    const auto b = m->params().view("out.l0.b");
    for (std::size_t i = 0; i < y3.size(); ++i) CHECK(y3[i] == b[i]);
  }

  TEST_CASE("single kernel pair matches hand evaluation") {
    ModelSpec s = model_preset("table2_cgrbf-small");
    s.hidden_widths = {3};
    s.n_kernels = 2;
    s.kernels_per_group = 2;
    s.q_out = 4;
    s.front_output = "identity";
    s.input_center.clear();
    s.input_scale.clear();
    CgrbfModel m(s);
    m.initialize(6);
    double* p = m.params().data();
    // Front: g = M x + t with fixed values.
    auto W = m.params().view("front.l0.W");
    auto t = m.params().view("front.l0.b");
    const double M[9] = {1.0, 0.2, 0.0, -0.1, 0.9, 0.3, 0.0, 0.0, 1.1};
    for (int i = 0; i < 9; ++i) W[i] = M[i];
    t[0] = 0.5, t[1] = -0.25, t[2] = 0.1;
    nn::CgKernel k0{{1.0, 2.0, 3.0}, 0.4, {0.5, 0.5, 0.5}, -0.2, 7.0};
    nn::CgKernel k1{{-1.0, 0.0, 2.0}, 1.9, {0.0, 1.0, 0.0}, -0.05, 3.0};
    m.kernels().set_kernel(p, 0, k0);
    m.kernels().set_kernel(p, 1, k1);
    auto ow = m.params().view("out.l0.W");
    auto ob = m.params().view("out.l0.b");
    for (std::size_t i = 0; i < ow.size(); ++i) ow[i] = 0.1 * static_cast<double>(i) - 0.3;
    for (std::size_t i = 0; i < ob.size(); ++i) ob[i] = 0.05 * static_cast<double>(i);

    const double x[3] = {0.3, -0.7, 1.2};
    double g[3];
    for (int r = 0; r < 3; ++r) g[r] = M[3 * r] * x[0] + M[3 * r + 1] * x[1] + M[3 * r + 2] * x[2] + t[r];
    auto phi = [&](const nn::CgKernel& k) {
      double da = 0, dc = 0;
      for (int i = 0; i < 3; ++i) da += (g[i] - k.a[i]) * (g[i] - k.a[i]), dc += (g[i] - k.c[i]) * (g[i] - k.c[i]);
      return std::cos(k.w * std::sqrt(da) + k.b) * std::exp(k.beta * dc);
    };
    const double p0 = phi(k0), p1 = phi(k1);
    const auto y = m.predict(std::vector<double>{x[0], x[1], x[2]});
    for (std::size_t r = 0; r < 4; ++r) {
      CHECK(y[r] == doctest::Approx(ow[2 * r] * p0 + ow[2 * r + 1] * p1 + ob[r]).epsilon(1e-13));
    }
  }

  TEST_CASE("kernel pair wiring") {
    nn::ParamStore store;
    const auto layer = nn::CgKernelLayer::create(store, "rbf", 6, 2);
    REQUIRE(layer.input_width() == 9);
    Rng rng(7);
    for (std::size_t j = 0; j < 6; ++j) {
      nn::CgKernel k;
      for (auto& v : k.a) v = rng.uniform(-1, 1);
      for (auto& v : k.c) v = rng.uniform(-1, 1);
      k.b = rng.uniform(0, 6);
      k.w = rng.uniform(1, 5);
      k.beta = -0.3;
      layer.set_kernel(store.data(), j, k);
    }
    std::vector<double> x(9), y0(6), y1(6);
    for (double& v : x) v = rng.uniform(-1, 1);
    layer.forward(store.data(), x, y0);
    for (std::size_t triple = 0; triple < 3; ++triple) {
      auto xp = x;
      xp[3 * triple + 1] += 0.37;
      layer.forward(store.data(), xp, y1);
      for (std::size_t j = 0; j < 6; ++j) {
        if (j / 2 == triple) {
          CHECK(y1[j] != y0[j]);
        } else {
          CHECK(y1[j] == y0[j]);
        }
      }
    }
  }

  TEST_CASE("full model gradients") {
    for (const char* name : {"table2_cgrbf-small", "desk_cgrbf", "desk_siren", "desk_tanh", "desk_ae"}) {
      ModelSpec s = model_preset(name);
      if (s.variant == Variant::cgrbf) {
        s.q_out = 8;
        s.c_init_box = {{0.0, 0.0, 0.0}, {0.4, 0.3, 0.0}};
        s.bs_position = {1.5, 1.0, 2.0};
        set_input_box(s, s.c_init_box);
      }
      auto m = build_model(s, 8);
      Rng rng(9);
      std::vector<double> x{rng.uniform(s.c_init_box.min.x, s.c_init_box.max.x),
                            rng.uniform(s.c_init_box.min.y, s.c_init_box.max.y), s.c_init_box.min.z};
      std::vector<double> label(m->output_width());
      for (double& v : label) v = rng.uniform(-0.5, 0.5);
      nn::GradCheckOptions o;
      o.max_per_tensor = 64;
      const auto report = nn::gradient_check(*m, x, label, o);
      CAPTURE(name);
      CAPTURE(report.format());
      CHECK(report.passed());
    }
    ModelSpec pair = model_preset("table2_cgrbf-small");
    pair.kernels_per_group = 2;
    pair.n_kernels = 8;
    auto m = build_model(pair, 10);
    std::vector<double> x{70, 20, 1.6}, label(182, 0.1);
    CHECK(nn::gradient_check(*m, x, label).passed());
  }

  TEST_CASE("auto-encoder stage order and composition") {
    ModelSpec s = model_preset("desk_ae");
    s.q_out = 8;
    AePipeline ae(s);
    ae.initialize(11);
    nn::Tape tape;
    std::vector<double> x{70, 20, 1.6}, code(3);
    CHECK_THROWS_AS(ae.code_forward(x, code, tape), StageOrderError);
    ae.mark_stage1_complete();
    ae.code_forward(x, code, tape);
    const auto y = ae.predict(x);
    const auto composed = ae.decode(code);
    REQUIRE(composed.size() == y.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == composed[i]);

    for (const auto& t : ae.params().tensors()) {
      if (t.name.rfind("decoder.", 0) == 0) {
        for (double& v : ae.params().view(t.name)) v = 0.0;
      }
    }
    const auto a = ae.predict(std::vector<double>{60, 20, 1.6});
    const auto b = ae.predict(std::vector<double>{90, 28, 1.6});
    CHECK(a == b);
  }

  TEST_CASE("MIMO labels are the antenna-major vectorization") {
    const rt::Scene s = rt::scene_preset("paper_scene_mimo");
    const rt::Vec3 p{70, 22, 1.6};
    const auto w = rt::reference_window();
    const auto full = data::cir_at(s, p, w);
    const auto ants = rt::bs_antennas(s);
    REQUIRE(full.size() == ants.size() * w.q());
    for (std::size_t k : {std::size_t{0}, std::size_t{9}, std::size_t{63}}) {
      const auto one = rt::synthesize_cir(rt::trace_paths(s, p, ants[k]), w);
      for (std::size_t i = 0; i < w.q(); ++i) CHECK(full[k * w.q() + i] == one.values[i]);
    }
    CHECK(model_preset("table6_mimo_cgrbf").q_out == 64 * 182);
  }

  TEST_CASE("mapper learns the identity on held-out vectors") {
    ModelSpec s = model_preset("desk_mapper_2");
    s.input_width = 8;
    s.q_out = 8;
    s.hidden_widths = {32};
    auto m = build_model(s, 12);
    Rng rng(13);
    exp::TrainingSet train, test;
    for (int i = 0; i < 600; ++i) {
      std::vector<double> v(8);
      for (double& e : v) e = rng.uniform(-0.5, 0.5);
      auto& set = i < 500 ? train : test;
      set.x.push_back(v);
      set.y.push_back(v);
    }
    exp::TrainConfig c;
    c.steps = 8000;
    c.lr = 3e-3;
    c.eval_every = 8000;
    exp::train(*m, train, c);
    double nmse = 0.0;
    for (std::size_t i = 0; i < test.x.size(); ++i) {
      const auto y = m->predict(test.x[i]);
      double num = 0, den = 0;
      for (std::size_t k = 0; k < 8; ++k) num += std::pow(y[k] - test.y[i][k], 2), den += test.y[i][k] * test.y[i][k];
      nmse += num / den;
    }
    nmse /= static_cast<double>(test.x.size());
    CHECK(nmse < 1e-3);
  }

  TEST_CASE("spec JSON round trip") {
    for (const auto& name : model_preset_names()) {
      const ModelSpec s = model_preset(name);
      CHECK(spec_digest(spec_from_json(spec_to_json(s))) == spec_digest(s));
    }
    nlohmann::json bad = spec_to_json(model_preset("table2_cgrbf-small"));
    bad["n_kernels"] = 5;
    CHECK_THROWS_AS(spec_from_json(bad), SpecError);
  }
}
