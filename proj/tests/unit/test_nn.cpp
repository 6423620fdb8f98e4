#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "cirforge/nn/adam.hpp"
#include "cirforge/nn/cg_kernel.hpp"
#include "cirforge/nn/dense.hpp"
#include "cirforge/nn/gradcheck.hpp"
#include "cirforge/nn/loss.hpp"
#include "cirforge/nn/network.hpp"
#include "cirforge/nn/param_store.hpp"
#include "cirforge/util/rng.hpp"

using namespace cirforge;
using namespace cirforge::nn;

namespace {

// Central difference of f at v[i] with step h.
double central(std::vector<double>& v, std::size_t i, double h, const std::function<double()>& f) {
  const double keep = v[i];
  v[i] = keep + h;
  const double up = f();
  v[i] = keep - h;
  const double down = f();
  v[i] = keep;
  return (up - down) / (2 * h);
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("dense layer forward examples") {
    ParamStore store;
    DenseLayer id = DenseLayer::create(store, "id", 3, 3, Activation::identity);
    auto w = store.view("id.W");
    w[0] = w[4] = w[8] = 1.0;
    std::vector<double> x{0.3, -1.2, 2.5}, z(3), y(3);
    id.forward(store.data(), x, z, y);
    CHECK(y == x);

    ParamStore s2;
    DenseLayer sine = DenseLayer::create(s2, "s", 3, 4, Activation::sine);
    std::vector<double> z4(4), y4(4);
    sine.forward(s2.data(), x, z4, y4);
    for (double v : y4) CHECK(v == 0.0);
  }

  TEST_CASE("dense layer gradients match finite differences") {
    Rng rng(1);
    for (Activation act : {Activation::identity, Activation::sine, Activation::tanh, Activation::sigmoid}) {
      ParamStore store;
      DenseLayer layer = DenseLayer::create(store, "l", 3, 5, act, 2.0);
      for (double& p : store.values()) p = rng.uniform(-1, 1);
      std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      std::vector<double> c(5);
      for (double& v : c) v = rng.uniform(-1, 1);
      std::vector<double> params(store.values().begin(), store.values().end());
      auto loss = [&] {
        std::vector<double> z(5), y(5);
        layer.forward(params.data(), x, z, y);
        double l = 0.0;
        for (std::size_t i = 0; i < 5; ++i) l += c[i] * y[i];
        return l;
      };
      std::vector<double> z(5), y(5), dz(5), dx(3), grad(store.size(), 0.0);
      layer.forward(params.data(), x, z, y);
      layer.backward(params.data(), x, z, y, c, grad.data(), dx, dz);
      double worst = 0.0;
      for (std::size_t i = 0; i < params.size(); ++i) worst = std::max(worst, rel(grad[i], central(params, i, 1e-6, loss)));
      for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, rel(dx[i], central(x, i, 1e-6, loss)));
      CHECK(worst < 1e-6);
    }
  }

  TEST_CASE("siren initialization bounds") {
    CHECK(siren_bound(25, false, 30.0) == doctest::Approx(std::sqrt(6.0 / 25.0) / 30.0).epsilon(1e-15));
    CHECK(siren_bound(25, false, 30.0) == doctest::Approx(0.01633).epsilon(1e-3));
    CHECK(siren_bound(1, true, 30.0) == 1.0);
    Rng rng(2);
    ParamStore store;
    DenseLayer hidden = DenseLayer::create(store, "h", 25, 40, Activation::sine);
    siren_init(hidden, store.data(), false, 30.0, rng);
    const double bound = std::sqrt(6.0 / 25.0) / 30.0;
    double lo = 1, hi = -1;
    for (double v : store.values()) {
      CHECK(std::abs(v) <= bound);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi > 0.9 * bound);
    CHECK(lo < -0.9 * bound);
  }

  TEST_CASE("sine pre-activation statistics stay stable with depth") {
    ParamStore store;
    const std::size_t width = 128;
    Mlp net = Mlp::create(store, "deep", {2, width, width, width, width, width, 1}, Activation::sine,
                          Activation::identity);
    Rng rng(3);
    net.initialize(store.data(), rng);
    MlpTape tape;
    auto var_at = [&](std::size_t layer) {
      double s = 0, s2 = 0;
      std::size_t n = 0;
      Rng xr(4);
      for (int i = 0; i < 500; ++i) {
        std::vector<double> x{xr.uniform(-1, 1), xr.uniform(-1, 1)};
        net.forward(store.data(), x, tape);
        for (double z : tape.z[layer]) {
          // Pre-activations as seen by sin(): omega0 * (W x + b).
          s += 30.0 * z;
          s2 += 900.0 * z * z;
          ++n;
        }
      }
      const double m = s / static_cast<double>(n);
      return s2 / static_cast<double>(n) - m * m;
    };
    const double v2 = var_at(1), v5 = var_at(4);
    CHECK(v2 / v5 < 2.0);
    CHECK(v5 / v2 < 2.0);
  }

  TEST_CASE("cosine-Gaussian kernel values") {
    CgKernel k;
    k.a = {1, 2, 3};
    k.c = {1, 2, 3};
    k.beta = -0.7;
    k.w = 5.0;
    const std::array<double, 3> x{1, 2, 3};
    CHECK(cg_kernel_forward(k, x) == 1.0);
    k.w = 0.0;
    k.b = 0.0;
    const std::array<double, 3> x2{2, 0, 3};
    CHECK(cg_kernel_forward(k, x2) == doctest::Approx(std::exp(-0.7 * 5.0)).epsilon(1e-15));
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
      CgKernel r;
      for (auto& v : r.a) v = rng.uniform(-5, 5);
      for (auto& v : r.c) v = rng.uniform(-5, 5);
      r.b = rng.uniform(-5, 5);
      r.w = rng.uniform(-50, 50);
      r.beta = -rng.uniform(0, 3);
      const std::array<double, 3> p{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
      CHECK(std::abs(cg_kernel_forward(r, p)) <= 1.0);
    }
  }

  TEST_CASE("cosine-Gaussian kernel gradients match finite differences") {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> v(14);  // a(3) b c(3) beta w x(3)
      for (std::size_t i = 0; i < 3; ++i) v[i] = rng.uniform(-1, 1);
      v[3] = rng.uniform(-3, 3);
      for (std::size_t i = 4; i < 7; ++i) v[i] = rng.uniform(-1, 1);
      v[7] = -rng.uniform(0.1, 1.0);
      v[8] = rng.uniform(-5, 5);
      for (std::size_t i = 9; i < 12; ++i) v[i] = rng.uniform(-1, 1);
      v.resize(12);
      auto unpack = [&] {
        CgKernel k;
        k.a = {v[0], v[1], v[2]};
        k.b = v[3];
        k.c = {v[4], v[5], v[6]};
        k.beta = v[7];
        k.w = v[8];
        return k;
      };
      auto f = [&] {
        const std::array<double, 3> x{v[9], v[10], v[11]};
        return cg_kernel_forward(unpack(), x);
      };
      const std::array<double, 3> x{v[9], v[10], v[11]};
      const CgKernelGrad g = cg_kernel_backward(unpack(), x, 1.0);
      const double analytic[12] = {g.a[0], g.a[1], g.a[2], g.b, g.c[0], g.c[1], g.c[2], g.beta, g.w, g.x[0], g.x[1], g.x[2]};
      double worst = 0.0;
      for (std::size_t i = 0; i < 12; ++i) worst = std::max(worst, rel(analytic[i], central(v, i, 1e-6, f)));
      CHECK(worst < 1e-5);
    }
    CgKernel k;
    k.a = {0.5, 0.5, 0.5};
    k.w = 3.0;
    k.beta = -1.0;
    const std::array<double, 3> at_a{0.5, 0.5, 0.5};
    const CgKernelGrad g = cg_kernel_backward(k, at_a, 1.0);
    for (double v : g.a) CHECK(std::isfinite(v));
    CHECK(g.w == 0.0);
  }

  TEST_CASE("mse loss") {
    std::vector<double> pred{0, 0}, label{1, 1}, d(2);
    CHECK(mse_loss(pred, label, d) == 1.0);
    CHECK(d == std::vector<double>{-1, -1});
    CHECK(mse_loss(label, label) == 0.0);
    CHECK_THROWS(mse_loss(std::vector<double>{1, 2, 3}, label));
    Rng rng(7);
    std::vector<double> p(6), y(6), dp(6);
    for (std::size_t i = 0; i < 6; ++i) p[i] = rng.uniform(-1, 1), y[i] = rng.uniform(-1, 1);
    mse_loss(p, y, dp);
    for (std::size_t i = 0; i < 6; ++i) CHECK(rel(dp[i], central(p, i, 1e-5, [&] { return mse_loss(p, y); })) < 1e-8);
  }

  TEST_CASE("adam first step and step bound") {
    ParamStore store;
    store.add("theta", {1});
    AdamState st(1, AdamConfig{});
    std::vector<double> g{1.0};
    adam_step(st, store, g);
    CHECK(store.values()[0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
    CHECK(st.step == 1);

    ParamStore s2;
    s2.add("w", {4});
    AdamState st2(4, AdamConfig{});
    std::vector<double> zero(4, 0.0);
    adam_step(st2, s2, zero);
    for (double v : s2.values()) CHECK(v == 0.0);

    Rng rng(8);
    ParamStore s3;
    s3.add("w", {10});
    AdamState st3(10, AdamConfig{});
    for (int step = 0; step < 100; ++step) {
      std::vector<double> grad(10);
      for (double& v : grad) v = rng.normal(0, 1);
      const std::vector<double> before(s3.values().begin(), s3.values().end());
      adam_step(st3, s3, grad);
      for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(s3.values()[i] - before[i]) <= 1e-3 * 3.2);
    }
    ParamStore s4;
    s4.add("w", {10});
    AdamState st4(10, AdamConfig{});
    for (int step = 0; step < 100; ++step) {
      std::vector<double> grad(10, 0.37);
      const std::vector<double> before(s4.values().begin(), s4.values().end());
      adam_step(st4, s4, grad);
      for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(s4.values()[i] - before[i]) <= 1e-3 * (1 + 1e-9));
    }
  }

  TEST_CASE("adam rejects non-finite gradients by name") {
    ParamStore store;
    store.add("front.l0.W", {2});
    store.add("rbf.kernels", {3});
    AdamState st(5, AdamConfig{});
    std::vector<double> g{0.1, 0.2, 0.3, std::numeric_limits<double>::quiet_NaN(), 0.5};
    try {
      adam_step(st, store, g);
      FAIL("no error");
    } catch (const NnError& e) {
      CHECK(std::string(e.what()).find("rbf.kernels") != std::string::npos);
    }
    for (double v : store.values()) CHECK(v == 0.0);
    CHECK(st.step == 0);
  }

  TEST_CASE("gradient checker") {
    Rng rng(9);
    MlpModel linear("linear", {3, 4}, Activation::identity, Activation::identity, 30.0);
    linear.initialize(rng);
    std::vector<double> x{0.2, -0.4, 0.9}, y{0.1, 0.2, 0.3, 0.4};
    const GradCheckReport ok = gradient_check(linear, x, y);
    CHECK(ok.passed());
    CHECK(ok.max_rel_error() < 1e-9);

    MlpModel net("siren", {3, 8, 8, 4}, Activation::sine, Activation::identity, 30.0);
    net.initialize(rng);
    CHECK(gradient_check(net, x, y).passed());
    const auto& w = net.params().info("siren.l1.W");
    const GradCheckReport bad = gradient_check(net, x, y, GradCheckOptions{}, [&](std::span<double> g) {
      g[w.offset + 3] *= 2.0;
    });
    CHECK_FALSE(bad.passed());
    CHECK(bad.worst_group() == "siren.l1.W");
    CHECK(bad.format().find("siren.l1.W") != std::string::npos);
  }
}
