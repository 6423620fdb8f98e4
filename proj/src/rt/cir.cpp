#include "cirforge/rt/cir.hpp"

#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace cirforge::rt {

std::size_t DelayWindow::bins() const {
  if (!(dt_s > 0.0)) throw std::invalid_argument("DelayWindow: dt must be > 0");
  if (!(end_s >= start_s)) throw std::invalid_argument("DelayWindow: end must be >= start");
  // Relative guard so 90e-9 / 1e-9 lands on 90, not 89.999...
  return static_cast<std::size_t>(std::floor((end_s - start_s) / dt_s + 1e-9)) + 1;
}

DelayWindow reference_window() { return {220e-9, 310e-9, 1e-9}; }

DelayWindow auto_window(double min_delay_s, double dt_s) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("auto_window: dt must be > 0");
  const double start = std::floor((min_delay_s - 5e-9) / dt_s) * dt_s;
  return {start, start + 90e-9, dt_s};
}

long delay_bin(double delay_s, const DelayWindow& window) {
  const double pos = (delay_s - window.start_s) / window.dt_s;
  const double bin = std::floor(pos + 0.5);
  if (bin < 0.0 || bin >= static_cast<double>(window.bins())) return -1;
  return static_cast<long>(bin);
}

CirVector synthesize_cir(std::span<const PathComponent> paths, const DelayWindow& window, SynthesisStats* stats) {
  CirVector cir;
  cir.window = window;
  const std::size_t bins = window.bins();
  cir.values.assign(2 * bins, 0.0);
  std::vector<unsigned char> occupied(bins, 0);
  SynthesisStats local;
  for (const PathComponent& p : paths) {
    const long bin = delay_bin(p.delay_s, window);
    if (bin < 0) {
      ++local.dropped;
      continue;
    }
    ++local.in_window;
    const auto b = static_cast<std::size_t>(bin);
    if (occupied[b]) ++local.collisions;
    occupied[b] = 1;
    cir.values[2 * b] += p.gain.real();
    cir.values[2 * b + 1] += p.gain.imag();
  }
  if (local.collisions > 0) {
    spdlog::debug("synthesize_cir: {} path(s) shared a delay bin; contributions summed", local.collisions);
  }
  if (stats) *stats = local;
  return cir;
}

}  // namespace cirforge::rt
