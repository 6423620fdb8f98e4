#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

#include "cirforge/data/dataset.hpp"
#include "cirforge/util/rng.hpp"

namespace cirforge::data {

// One draw from the symmetric alpha-stable law S(alpha, 0, scale, 0) by the
// Chambers-Mallows-Stuck transform. alpha = 2 gives N(0, 2 scale^2), alpha = 1
// gives Cauchy(0, scale).
double sample_alpha_stable(double alpha, double scale, Rng& rng);

struct NoiseReport {
  // sum |noise|^2 / sum |clean|^2 over every perturbed CIR entry; 0 for
  // position noise.
  double realized_nmse = 0.0;
  double mean_displacement_m = 0.0;
};

// Fills cir_noisy / position_noisy. Each record draws from its own stream
// derived from (seed, record index), so results do not depend on threading.
// Throws DatasetError for invalid specs (e.g. target_nmse with alpha-stable).
NoiseReport inject_noise(std::span<SampleRecord> records, const NoiseSpec& spec, std::uint64_t seed);

// Convenience: injects into a dataset and records the spec in its metadata.
NoiseReport inject_noise(Dataset& dataset, const NoiseSpec& spec, std::uint64_t seed);

void validate_noise(const NoiseSpec& spec);

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

// Reads the `noise.*` config keys: kind, target_nmse, alpha, scale, sigma_m.
NoiseSpec noise_from_json(const nlohmann::json& noise);
nlohmann::json noise_to_json(const NoiseSpec& spec);

}  // namespace cirforge::data
