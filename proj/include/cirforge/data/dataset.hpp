#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cirforge/rt/cir.hpp"
#include "cirforge/rt/scene.hpp"

namespace cirforge::data {

enum class NoiseKind : std::uint32_t { none = 0, cir_gaussian = 1, cir_alpha_stable = 2, position_gaussian = 3 };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  std::optional<double> target_nmse;  // cir_gaussian only
  double alpha = 2.0;                 // cir_alpha_stable
  double dispersion_scale = 0.0;      // cir_alpha_stable
  double sigma_m = 0.03;              // position_gaussian
};

struct SampleRecord {
  rt::Vec3 position;
  std::vector<double> cir;  // clean label, original units
  std::optional<std::vector<double>> cir_noisy;
  std::optional<rt::Vec3> position_noisy;

  // What a model trains on: the noisy variant when present.
  const std::vector<double>& train_cir() const { return cir_noisy ? *cir_noisy : cir; }
  rt::Vec3 train_position() const { return position_noisy ? *position_noisy : position; }
};

struct DatasetMeta {
  std::uint64_t scene_hash = 0;
  double density = 0.0;  // samples per square meter actually drawn
  std::uint64_t seed = 0;
  double scale_factor = 1.0;
  std::size_t q = 0;  // per-antenna CIR length
  std::size_t antennas = 1;
  double split_fraction = 0.8;
  rt::DelayWindow window;
  rt::Box region;
  NoiseSpec noise;
  double realized_noise_nmse = 0.0;

  std::size_t label_width() const { return q * antennas; }
};

// Records are stored train-first: [0, n_train) is the training split.
struct Dataset {
  DatasetMeta meta;
  std::vector<SampleRecord> records;
  std::size_t n_train = 0;

  std::span<const SampleRecord> train() const { return {records.data(), n_train}; }
  std::span<const SampleRecord> test() const { return {records.data() + n_train, records.size() - n_train}; }
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Poisson(density * footprint area) positions, uniform over the footprint at
// z = region.min.z. Points inside an exclusion footprint are redrawn.
std::vector<rt::Vec3> sample_positions(const rt::Box& region, double density_per_m2, std::uint64_t seed,
                                       std::span<const rt::Box> exclusions = {});

enum class WindowMode { automatic, fixed };

struct GenerateOptions {
  double density_per_m2 = 10.0;
  std::uint64_t seed = 0;
  std::optional<rt::Box> region;  // defaults to scene.ue_region
  WindowMode window_mode = WindowMode::automatic;
  rt::DelayWindow fixed_window = rt::reference_window();
  double dt_s = 1e-9;
  double split_fraction = 0.8;
};

// Traces and synthesizes one CIR per sampled position (one block of q per
// BS antenna, antenna-major), fits the scale factor and splits.
Dataset generate_dataset(const rt::Scene& scene, const GenerateOptions& options);

// Same, for an explicit position list.
Dataset generate_dataset_at(const rt::Scene& scene, std::vector<rt::Vec3> positions, const GenerateOptions& options);

// Concatenated per-antenna CIRs for one position.
std::vector<double> cir_at(const rt::Scene& scene, rt::Vec3 position, const rt::DelayWindow& window,
                           rt::SynthesisStats* stats = nullptr);

// 1 / max |clean CIR entry| over all records. Throws if every entry is zero.
double fit_scale(std::span<const SampleRecord> records);
void apply_scale(std::span<SampleRecord> records, double scale_factor);
void invert_scale(std::span<SampleRecord> records, double scale_factor);

// train = max(1, floor(n * fraction)) for n >= 1; shuffled by seed.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed);

// Reorders records train-first according to a seeded split.
void apply_split(Dataset& dataset, std::uint64_t seed);

}  // namespace cirforge::data
