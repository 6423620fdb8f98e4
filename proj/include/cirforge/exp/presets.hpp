#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirforge/data/dataset.hpp"
#include "cirforge/exp/trainer.hpp"
#include "cirforge/models/model_spec.hpp"
#include "cirforge/rt/scene.hpp"

namespace cirforge::exp {

struct PresetOptions {
  std::uint64_t seed = 0;
  // Output directory; defaults to <out_root>/<preset>/<UTC timestamp>.
  std::optional<std::string> out_dir;
  std::string out_root = "runs";
  bool paper_scale = false;
  // Keys: steps, seeds, densities, models, region, batch_size, lr,
  // eval_every, frequencies_ghz, sigma_m, nmse_targets, alphas,
  // alpha_scale_rel, antennas, scene.
  nlohmann::json overrides = nlohmann::json::object();
};

struct PresetResult {
  std::string dir;
  nlohmann::json metrics;
  std::vector<std::string> files;  // relative to dir, sorted
};

class PresetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> preset_names();
PresetResult run_preset(const std::string& name, const PresetOptions& options);

// The 0.4 x 0.3 m desk-scale UE region inside paper_scene.
rt::Box desk_region();
// A desk-scale region of the NLOS scene where the direct path is blocked.
rt::Box nlos_desk_region();
// Desk (or paper-scale) model spec for a short model name
// ("cgrbf", "cgrbf_small", "siren", "siren_matched", "ae", "tanh",
// optionally prefixed with "mimo_") fitted to a scene and input region.
models::ModelSpec position_model_spec(const std::string& short_name, const rt::Scene& scene, const rt::Box& region,
                                      bool paper_scale);

// Adapts a spec to a dataset: output width, input box, kernel center box, and
// (when the dataset's scene hash matches a scene preset) carrier frequency and
// BS position.
models::ModelSpec fit_spec_to_dataset(models::ModelSpec spec, const data::DatasetMeta& meta);

// Density sweep datasets are nested: the lower-density training sets are
// independent thinnings of the highest-density training split, and every
// density shares that dataset's test split.
std::vector<data::Dataset> nested_density_datasets(const rt::Scene& scene, const rt::Box& region,
                                                   const std::vector<double>& densities, std::uint64_t seed);

}  // namespace cirforge::exp
