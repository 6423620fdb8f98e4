#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cirforge/data/dataset.hpp"
#include "cirforge/models/ae_pipeline.hpp"
#include "cirforge/models/model_spec.hpp"
#include "cirforge/nn/adam.hpp"
#include "cirforge/nn/network.hpp"

namespace cirforge::exp {

struct TrainConfig {
  std::uint64_t steps = 20000;
  std::size_t batch_size = 20;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::uint64_t eval_every = 500;
  // Where a diagnostic checkpoint goes if the loss turns non-finite (empty = none).
  std::string failure_checkpoint;

  void validate() const;
};

nlohmann::json config_to_json(const TrainConfig& c);
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

struct CurveRow {
  std::uint64_t step = 0;
  double train_mse = 0.0;
  std::optional<double> test_nmse;
};

struct ConvergenceCurve {
  std::vector<CurveRow> rows;
  std::uint64_t model_digest = 0;
  std::uint64_t config_digest = 0;

  std::optional<double> final_test_nmse() const;
  // step,train_mse,test_nmse with 17 significant digits; test_nmse empty when not evaluated.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Supervised pairs in model units.
struct TrainingSet {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> y;
};

// Positions -> scaled CIR labels of the training split; uses the noisy
// position/CIR variants when present.
TrainingSet position_training_set(const data::Dataset& dataset);

using Evaluator = std::function<double(const nn::Model&)>;

// Mini-batch Adam over `steps` iterations; batches are drawn uniformly with
// replacement under config.seed; the gradient is the batch mean. Logs the
// batch MSE every step and evaluator() every eval_every steps and at the
// end. step_offset shifts the logged step numbers.
ConvergenceCurve train(nn::Model& model, const TrainingSet& set, const TrainConfig& config,
                       const Evaluator& evaluator = {}, const models::ModelSpec* spec = nullptr,
                       std::uint64_t step_offset = 0);

// Two-stage protocol for the auto-encoder baseline: config.steps of
// auto-encoder training on scaled CIRs, then config.steps of pos2code on the
// frozen codes. The returned curve concatenates both stages.
ConvergenceCurve train_ae_pipeline(models::AePipeline& pipeline, const data::Dataset& dataset,
                                   const TrainConfig& config, const Evaluator& evaluator = {});

// Dispatches on the model type for position -> CIR models.
ConvergenceCurve train_on_dataset(nn::Model& model, const models::ModelSpec& spec, const data::Dataset& dataset,
                                  const TrainConfig& config);

}  // namespace cirforge::exp
