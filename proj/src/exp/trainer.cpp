#include "cirforge/exp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cirforge/exp/metrics.hpp"
#include "cirforge/models/factory.hpp"
#include "cirforge/nn/checkpoint.hpp"
#include "cirforge/nn/loss.hpp"
#include "cirforge/util/digest.hpp"
#include "cirforge/util/rng.hpp"

namespace cirforge::exp {

namespace {

constexpr std::uint64_t kBatchStream = 0x6261746368;  // "batch"

std::uint64_t params_digest(const nn::Model& model) {
  Fnv1a h;
  h.update(model.params().values());
  return h.value();
}

void check_finite_loss(double loss, std::uint64_t step, const nn::Model& model, const TrainConfig& config,
                       const models::ModelSpec* spec, const nn::AdamState& adam) {
  if (std::isfinite(loss)) return;
  std::string where;
  if (!config.failure_checkpoint.empty()) {
    nn::Checkpoint c = spec ? models::checkpoint_model(model, *spec, &adam, step)
                            : nn::make_checkpoint(model.params(), "{}", 0, &adam, step);
    nn::save_checkpoint(c, config.failure_checkpoint);
    where = "; diagnostic checkpoint written to " + config.failure_checkpoint;
  }
  throw TrainingError(fmt::format("non-finite training loss {} at step {}{}", loss, step, where));
}

}  // namespace

void TrainConfig::validate() const {
  if (steps == 0) throw std::invalid_argument("train config: steps must be > 0");
  if (batch_size == 0) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (!(lr >= 0.0)) throw std::invalid_argument("train config: lr must be >= 0");
  if (eval_every == 0) throw std::invalid_argument("train config: eval_every must be > 0");
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"steps", c.steps}, {"batch_size", c.batch_size}, {"lr", c.lr}, {"seed", c.seed},
          {"eval_every", c.eval_every}};
}

TrainConfig config_from_json(const nlohmann::json& j, TrainConfig c) {
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.seed = j.value("seed", c.seed);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.validate();
  return c;
}

std::optional<double> ConvergenceCurve::final_test_nmse() const {
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->test_nmse) return it->test_nmse;
  }
  return std::nullopt;
}

std::string ConvergenceCurve::to_csv() const {
  std::string out = "step,train_mse,test_nmse\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{:.17g},", r.step, r.train_mse);
    if (r.test_nmse) out += fmt::format("{:.17g}", *r.test_nmse);
    out += '\n';
  }
  return out;
}

void ConvergenceCurve::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << to_csv();
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

TrainingSet position_training_set(const data::Dataset& ds) {
  TrainingSet set;
  for (const auto& r : ds.train()) {
    const rt::Vec3 p = r.train_position();
    set.x.push_back({p.x, p.y, p.z});
    std::vector<double> y = r.train_cir();
    for (double& v : y) v *= ds.meta.scale_factor;
    set.y.push_back(std::move(y));
  }
  return set;
}

ConvergenceCurve train(nn::Model& model, const TrainingSet& set, const TrainConfig& config,
                       const Evaluator& evaluator, const models::ModelSpec* spec, std::uint64_t step_offset) {
  config.validate();
  if (set.x.empty() || set.x.size() != set.y.size()) throw std::invalid_argument("train: empty or ragged training set");
  ConvergenceCurve curve;
  curve.config_digest = fnv1a(config_to_json(config).dump());

  nn::AdamConfig ac;
  ac.lr = config.lr;
  nn::AdamState adam(model.params().size(), ac);
  Rng rng = Rng::stream(config.seed, kBatchStream);
  nn::Tape tape;
  std::vector<double> grad(model.params().size());
  std::vector<double> pred(model.output_width()), dpred(model.output_width());
  const double inv_batch = 1.0 / static_cast<double>(config.batch_size);

  for (std::uint64_t step = 1; step <= config.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const std::size_t i = rng.below(set.x.size());
      model.forward(set.x[i], pred, tape);
      loss += nn::mse_loss(pred, set.y[i], dpred);
      model.backward(set.x[i], tape, dpred, grad, {});
    }
    loss *= inv_batch;
    check_finite_loss(loss, step, model, config, spec, adam);
    for (double& g : grad) g *= inv_batch;
    nn::adam_step(adam, model.params(), grad);
    model.project();

    CurveRow row{step + step_offset, loss, std::nullopt};
    if (evaluator && (step % config.eval_every == 0 || step == config.steps)) row.test_nmse = evaluator(model);
    curve.rows.push_back(row);
  }
  curve.model_digest = params_digest(model);
  return curve;
}

ConvergenceCurve train_ae_pipeline(models::AePipeline& pipeline, const data::Dataset& ds, const TrainConfig& config,
                                   const Evaluator& evaluator) {
  config.validate();
  const double s = ds.meta.scale_factor;
  std::vector<std::vector<double>> cirs;
  for (const auto& r : ds.train()) {
    std::vector<double> y = r.train_cir();
    for (double& v : y) v *= s;
    cirs.push_back(std::move(y));
  }
  if (cirs.empty()) throw std::invalid_argument("train_ae_pipeline: empty training split");

  nn::AdamConfig ac;
  ac.lr = config.lr;
  Rng rng = Rng::stream(config.seed, kBatchStream);
  nn::Tape tape;
  std::vector<double> grad(pipeline.params().size());
  const double inv_batch = 1.0 / static_cast<double>(config.batch_size);
  ConvergenceCurve curve;
  curve.config_digest = fnv1a(config_to_json(config).dump());

  // Stage 1: auto-encoder.
  {
    nn::AdamState adam(pipeline.params().size(), ac);
    std::vector<double> pred(pipeline.output_width()), dpred(pipeline.output_width());
    for (std::uint64_t step = 1; step <= config.steps; ++step) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        const auto& y = cirs[rng.below(cirs.size())];
        pipeline.autoencoder_forward(y, pred, tape);
        loss += nn::mse_loss(pred, y, dpred);
        pipeline.autoencoder_backward(y, tape, dpred, grad);
      }
      loss *= inv_batch;
      check_finite_loss(loss, step, pipeline, config, &pipeline.spec(), adam);
      for (double& g : grad) g *= inv_batch;
      nn::adam_step(adam, pipeline.params(), grad);
      curve.rows.push_back({step, loss, std::nullopt});
    }
  }
  pipeline.mark_stage1_complete();

  // Stage 2: pos2code on frozen codes.
  TrainingSet codes;
  for (std::size_t k = 0; k < cirs.size(); ++k) {
    const rt::Vec3 p = ds.train()[k].train_position();
    codes.x.push_back({p.x, p.y, p.z});
    codes.y.push_back(pipeline.encode(cirs[k]));
  }
  {
    nn::AdamState adam(pipeline.params().size(), ac);
    std::vector<double> code(pipeline.spec().code_dim), dcode(pipeline.spec().code_dim);
    for (std::uint64_t step = 1; step <= config.steps; ++step) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        const std::size_t i = rng.below(codes.x.size());
        pipeline.code_forward(codes.x[i], code, tape);
        loss += nn::mse_loss(code, codes.y[i], dcode);
        pipeline.code_backward(codes.x[i], tape, dcode, grad);
      }
      loss *= inv_batch;
      check_finite_loss(loss, config.steps + step, pipeline, config, &pipeline.spec(), adam);
      for (double& g : grad) g *= inv_batch;
      nn::adam_step(adam, pipeline.params(), grad);
      CurveRow row{config.steps + step, loss, std::nullopt};
      if (evaluator && (step % config.eval_every == 0 || step == config.steps)) row.test_nmse = evaluator(pipeline);
      curve.rows.push_back(row);
    }
  }
  curve.model_digest = params_digest(pipeline);
  return curve;
}

ConvergenceCurve train_on_dataset(nn::Model& model, const models::ModelSpec& spec, const data::Dataset& ds,
                                  const TrainConfig& config) {
  Evaluator eval;
  if (ds.test().size() > 0) {
    eval = [&ds](const nn::Model& m) { return evaluate_nmse(m, ds.test(), ds.meta.scale_factor); };
  }
  if (auto* ae = dynamic_cast<models::AePipeline*>(&model)) return train_ae_pipeline(*ae, ds, config, eval);
  return train(model, position_training_set(ds), config, eval, &spec);
}

}  // namespace cirforge::exp
