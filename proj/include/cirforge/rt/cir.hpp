#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cirforge/rt/raytrace.hpp"

namespace cirforge::rt {

struct DelayWindow {
  double start_s = 220e-9;
  double end_s = 310e-9;
  double dt_s = 1e-9;

  std::size_t bins() const;
  // Length of the interleaved real vector: 2 * bins().
  std::size_t q() const { return 2 * bins(); }
  friend bool operator==(const DelayWindow&, const DelayWindow&) = default;
};

// The fixed 220-310 ns, 1 ns window (q = 182).
DelayWindow reference_window();

// [min_delay - 5 ns, min_delay + 85 ns] snapped down to the dt grid; keeps
// the bin count of reference_window().
DelayWindow auto_window(double min_delay_s, double dt_s = 1e-9);

// Interleaved {Re(y1), Im(y1), ..., Re(yq/2), Im(yq/2)}.
struct CirVector {
  std::vector<double> values;
  DelayWindow window;
};

struct SynthesisStats {
  std::size_t in_window = 0;
  std::size_t dropped = 0;
  std::size_t collisions = 0;  // paths that landed in an already occupied bin
};

// Nearest-bin quantization: bin = floor((tau - start) / dt + 0.5). Paths
// outside the window are dropped; colliding paths are summed and reported.
CirVector synthesize_cir(std::span<const PathComponent> paths, const DelayWindow& window,
                         SynthesisStats* stats = nullptr);

// Bin index for a delay, or -1 outside the window.
long delay_bin(double delay_s, const DelayWindow& window);

}  // namespace cirforge::rt
