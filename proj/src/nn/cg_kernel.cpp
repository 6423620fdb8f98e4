#include "cirforge/nn/cg_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace cirforge::nn {

namespace {

struct Terms {
  double dxa[3];
  double dxc[3];
  double r;      // |x - a|
  double s;      // |x - c|^2
  double phase;  // w r + b
  double cosp, sinp, gauss;
};

Terms eval_terms(const double* a, double b, const double* c, double beta, double w, const double* x) {
  Terms t{};
  double r2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    t.dxa[i] = x[i] - a[i];
    t.dxc[i] = x[i] - c[i];
    r2 += t.dxa[i] * t.dxa[i];
    t.s += t.dxc[i] * t.dxc[i];
  }
  t.r = std::sqrt(r2);
  t.phase = w * t.r + b;
  t.cosp = std::cos(t.phase);
  t.sinp = std::sin(t.phase);
  t.gauss = std::exp(beta * t.s);
  return t;
}

// Writes d(phi)/d(params) scaled by dphi into g (packed order) and d/dx into gx.
void grad_terms(const Terms& t, double beta, double w, double dphi, double* g, double* gx) {
  const double sg = -t.sinp * t.gauss * dphi;  // d/d(phase)
  const double cg = t.cosp * t.gauss * dphi;   // d/d(beta s)
  g[kCgB] += sg;
  g[kCgW] += sg * t.r;
  g[kCgBeta] += cg * t.s;
  for (int i = 0; i < 3; ++i) {
    const double radial = t.r > 0.0 ? t.dxa[i] / t.r : 0.0;
    const double dx_phase = sg * w * radial;
    const double dx_gauss = cg * beta * 2.0 * t.dxc[i];
    g[kCgA + i] -= dx_phase;
    g[kCgC + i] -= dx_gauss;
    if (gx) gx[i] += dx_phase + dx_gauss;
  }
}

}  // namespace

double cg_kernel_forward(const CgKernel& k, std::span<const double, 3> x) {
  const Terms t = eval_terms(k.a.data(), k.b, k.c.data(), k.beta, k.w, x.data());
  return t.cosp * t.gauss;
}

CgKernelGrad cg_kernel_backward(const CgKernel& k, std::span<const double, 3> x, double dphi) {
  const Terms t = eval_terms(k.a.data(), k.b, k.c.data(), k.beta, k.w, x.data());
  double g[kCgStride] = {};
  double gx[3] = {};
  grad_terms(t, k.beta, k.w, dphi, g, gx);
  CgKernelGrad out;
  for (int i = 0; i < 3; ++i) {
    out.a[i] = g[kCgA + i];
    out.c[i] = g[kCgC + i];
    out.x[i] = gx[i];
  }
  out.b = g[kCgB];
  out.beta = g[kCgBeta];
  out.w = g[kCgW];
  return out;
}

CgKernelLayer CgKernelLayer::create(ParamStore& store, const std::string& name, std::size_t n_kernels,
                                    std::size_t kernels_per_group) {
  if (n_kernels == 0) throw NnError("kernel layer '" + name + "' has no kernels");
  if (kernels_per_group == 0 || n_kernels % kernels_per_group != 0) {
    throw NnError("kernel layer '" + name + "': n_kernels must be a multiple of kernels_per_group");
  }
  CgKernelLayer l;
  l.n_kernels = n_kernels;
  l.kernels_per_group = kernels_per_group;
  l.offset = store.add(name + ".kernels", {n_kernels, kCgStride});
  return l;
}

CgKernel CgKernelLayer::kernel(const double* params, std::size_t j) const {
  const double* p = params + offset + j * kCgStride;
  CgKernel k;
  for (int i = 0; i < 3; ++i) {
    k.a[i] = p[kCgA + i];
    k.c[i] = p[kCgC + i];
  }
  k.b = p[kCgB];
  k.beta = p[kCgBeta];
  k.w = p[kCgW];
  return k;
}

void CgKernelLayer::set_kernel(double* params, std::size_t j, const CgKernel& k) const {
  double* p = params + offset + j * kCgStride;
  for (int i = 0; i < 3; ++i) {
    p[kCgA + i] = k.a[i];
    p[kCgC + i] = k.c[i];
  }
  p[kCgB] = k.b;
  p[kCgBeta] = k.beta;
  p[kCgW] = k.w;
}

void CgKernelLayer::forward(const double* params, std::span<const double> x, std::span<double> y,
                            OpCounter* counter) const {
  if (x.size() != input_width() || y.size() != n_kernels) throw NnError("kernel layer forward: shape mismatch");
  for (std::size_t j = 0; j < n_kernels; ++j) {
    const double* p = params + offset + j * kCgStride;
    const double* xi = x.data() + 3 * (j / kernels_per_group);
    const Terms t = eval_terms(p + kCgA, p[kCgB], p + kCgC, p[kCgBeta], p[kCgW], xi);
    y[j] = t.cosp * t.gauss;
  }
  if (counter) counter->activations += n_kernels;
}

void CgKernelLayer::backward(const double* params, std::span<const double> x, std::span<const double> dy,
                             double* grad, std::span<double> dx) const {
  if (x.size() != input_width() || dy.size() != n_kernels) throw NnError("kernel layer backward: shape mismatch");
  if (!dx.empty()) {
    if (dx.size() != input_width()) throw NnError("kernel layer backward: dx shape mismatch");
    std::fill(dx.begin(), dx.end(), 0.0);
  }
  for (std::size_t j = 0; j < n_kernels; ++j) {
    if (dy[j] == 0.0) continue;
    const double* p = params + offset + j * kCgStride;
    const std::size_t group = j / kernels_per_group;
    const Terms t = eval_terms(p + kCgA, p[kCgB], p + kCgC, p[kCgBeta], p[kCgW], x.data() + 3 * group);
    grad_terms(t, p[kCgBeta], p[kCgW], dy[j], grad + offset + j * kCgStride,
               dx.empty() ? nullptr : dx.data() + 3 * group);
  }
}

void CgKernelLayer::clamp_beta(double* params) const {
  for (std::size_t j = 0; j < n_kernels; ++j) {
    double& beta = params[offset + j * kCgStride + kCgBeta];
    beta = std::min(beta, 0.0);
  }
}

}  // namespace cirforge::nn
