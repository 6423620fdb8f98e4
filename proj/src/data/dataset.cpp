#include "cirforge/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "cirforge/util/parallel.hpp"
#include "cirforge/util/rng.hpp"

namespace cirforge::data {

namespace {

constexpr std::uint64_t kPositionStream = 0x706f73;  // "pos"
constexpr std::uint64_t kSplitStream = 0x73706c;     // "spl"

bool excluded(rt::Vec3 p, std::span<const rt::Box> exclusions) {
  return std::any_of(exclusions.begin(), exclusions.end(), [&](const rt::Box& b) { return b.contains_footprint(p); });
}

}  // namespace

std::vector<rt::Vec3> sample_positions(const rt::Box& region, double density_per_m2, std::uint64_t seed,
                                       std::span<const rt::Box> exclusions) {
  const double area = region.footprint_area();
  if (!(area > 0.0)) throw DatasetError("sample_positions: region has no footprint area");
  if (!(density_per_m2 > 0.0)) throw DatasetError("sample_positions: density must be > 0");
  Rng rng = Rng::stream(seed, kPositionStream);
  const std::uint64_t count = rng.poisson(density_per_m2 * area);
  std::vector<rt::Vec3> out;
  out.reserve(count);
  constexpr int kMaxRedraws = 10000;
  for (std::uint64_t i = 0; i < count; ++i) {
    rt::Vec3 p;
    int tries = 0;
    do {
      if (++tries > kMaxRedraws) throw DatasetError("sample_positions: exclusion zones cover the region");
      p = {rng.uniform(region.min.x, region.max.x), rng.uniform(region.min.y, region.max.y), region.min.z};
    } while (excluded(p, exclusions));
    out.push_back(p);
  }
  return out;
}

std::vector<double> cir_at(const rt::Scene& scene, rt::Vec3 position, const rt::DelayWindow& window,
                           rt::SynthesisStats* stats) {
  const auto antennas = rt::bs_antennas(scene);
  std::vector<double> out;
  out.reserve(window.q() * antennas.size());
  rt::SynthesisStats total;
  for (const rt::Vec3& rx : antennas) {
    const auto paths = rt::trace_paths(scene, position, rx);
    rt::SynthesisStats s;
    const rt::CirVector cir = rt::synthesize_cir(paths, window, &s);
    out.insert(out.end(), cir.values.begin(), cir.values.end());
    total.in_window += s.in_window;
    total.dropped += s.dropped;
    total.collisions += s.collisions;
  }
  if (stats) *stats = total;
  return out;
}

Dataset generate_dataset(const rt::Scene& scene, const GenerateOptions& options) {
  const rt::Box region = options.region.value_or(scene.ue_region);
  auto positions = sample_positions(region, options.density_per_m2, options.seed, scene.ue_exclusions);
  return generate_dataset_at(scene, std::move(positions), options);
}

Dataset generate_dataset_at(const rt::Scene& scene, std::vector<rt::Vec3> positions, const GenerateOptions& options) {
  Dataset ds;
  ds.meta.scene_hash = rt::scene_digest(scene);
  ds.meta.density = options.density_per_m2;
  ds.meta.seed = options.seed;
  ds.meta.split_fraction = options.split_fraction;
  ds.meta.region = options.region.value_or(scene.ue_region);
  const auto antennas = rt::bs_antennas(scene);
  ds.meta.antennas = antennas.size();

  if (options.window_mode == WindowMode::fixed) {
    ds.meta.window = options.fixed_window;
  } else {
    std::vector<double> min_delay(positions.size(), std::numeric_limits<double>::infinity());
    parallel_for(positions.size(), [&](std::size_t i) {
      for (const rt::Vec3& rx : antennas) {
        for (const auto& p : rt::trace_paths(scene, positions[i], rx)) min_delay[i] = std::min(min_delay[i], p.delay_s);
      }
    });
    const double lo = positions.empty() ? 0.0 : *std::min_element(min_delay.begin(), min_delay.end());
    ds.meta.window = rt::auto_window(std::isfinite(lo) ? lo : 0.0, options.dt_s);
  }
  ds.meta.q = ds.meta.window.q();

  ds.records.resize(positions.size());
  std::vector<rt::SynthesisStats> stats(positions.size());
  parallel_for(positions.size(), [&](std::size_t i) {
    ds.records[i].position = positions[i];
    ds.records[i].cir = cir_at(scene, positions[i], ds.meta.window, &stats[i]);
  });

  std::size_t collisions = 0, empty = 0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    collisions += stats[i].collisions;
    if (stats[i].in_window == 0) ++empty;
  }
  if (collisions > 0) {
    spdlog::warn("dataset: {} path(s) shared a delay bin with another path; their gains were summed", collisions);
  }
  if (empty > 0) spdlog::warn("dataset: {} record(s) have no path inside the delay window", empty);

  if (!ds.records.empty()) ds.meta.scale_factor = fit_scale(ds.records);
  apply_split(ds, options.seed);
  return ds;
}

double fit_scale(std::span<const SampleRecord> records) {
  if (records.empty()) throw DatasetError("fit_scale: no records");
  double max_abs = 0.0;
  for (const auto& r : records) {
    for (double v : r.cir) max_abs = std::max(max_abs, std::abs(v));
  }
  if (max_abs == 0.0) throw DatasetError("fit_scale: every CIR value is zero");
  return 1.0 / max_abs;
}

void apply_scale(std::span<SampleRecord> records, double s) {
  for (auto& r : records) {
    for (double& v : r.cir) v *= s;
    if (r.cir_noisy) {
      for (double& v : *r.cir_noisy) v *= s;
    }
  }
}

void invert_scale(std::span<SampleRecord> records, double s) {
  for (auto& r : records) {
    for (double& v : r.cir) v /= s;
    if (r.cir_noisy) {
      for (double& v : *r.cir_noisy) v /= s;
    }
  }
}

SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DatasetError("split fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = Rng::stream(seed, kSplitStream);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::size_t n_train = 0;
  if (n > 0) n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction)));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

void apply_split(Dataset& ds, std::uint64_t seed) {
  const SplitIndices split = split_indices(ds.records.size(), ds.meta.split_fraction, seed);
  std::vector<SampleRecord> reordered;
  reordered.reserve(ds.records.size());
  for (std::size_t i : split.train) reordered.push_back(std::move(ds.records[i]));
  for (std::size_t i : split.test) reordered.push_back(std::move(ds.records[i]));
  ds.records = std::move(reordered);
  ds.n_train = split.train.size();
}

}  // namespace cirforge::data
