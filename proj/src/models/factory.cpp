#include "cirforge/models/factory.hpp"

#include "cirforge/models/ae_pipeline.hpp"
#include "cirforge/models/cgrbf.hpp"

namespace cirforge::models {

namespace {
constexpr std::uint64_t kMlpInitStream = 0x6d6c70;  // "mlp"
}

std::unique_ptr<nn::Model> build_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  switch (spec.variant) {
    case Variant::cgrbf:
    case Variant::mimo_cgrbf: {
      auto m = std::make_unique<CgrbfModel>(spec);
      m->initialize(seed);
      return m;
    }
    case Variant::ae_pipeline: {
      auto m = std::make_unique<AePipeline>(spec);
      m->initialize(seed);
      return m;
    }
    case Variant::siren:
    case Variant::mimo_siren:
    case Variant::mlp:
    case Variant::channel_mapper: {
      std::vector<std::size_t> widths{spec.input_width};
      widths.insert(widths.end(), spec.hidden_widths.begin(), spec.hidden_widths.end());
      widths.push_back(spec.q_out);
      const nn::Activation hidden = spec.variant == Variant::siren || spec.variant == Variant::mimo_siren
                                        ? nn::Activation::sine
                                        : nn::activation_from_string(spec.hidden_activation);
      auto m = std::make_unique<nn::MlpModel>(to_string(spec.variant), widths, hidden, nn::Activation::identity,
                                              spec.omega0, spec.first_omega0, make_input_map(spec));
      Rng rng = Rng::stream(seed, kMlpInitStream);
      m->initialize(rng);
      return m;
    }
  }
  throw SpecError("unsupported variant");
}

std::size_t parameter_count(const nn::Model& model) { return model.params().size(); }

nn::Checkpoint checkpoint_model(const nn::Model& model, const ModelSpec& spec, const nn::AdamState* adam,
                                std::uint64_t train_step) {
  nn::Checkpoint c =
      nn::make_checkpoint(model.params(), spec_to_json(spec).dump(), spec_digest(spec), adam, train_step);
  if (const auto* ae = dynamic_cast<const AePipeline*>(&model); ae && ae->stage1_complete()) {
    nlohmann::json j = nlohmann::json::parse(c.spec_json);
    j["stage1_complete"] = true;
    c.spec_json = j.dump();
  }
  return c;
}

RestoredModel restore_model(const std::string& checkpoint_path) {
  RestoredModel r;
  r.checkpoint = nn::load_checkpoint(checkpoint_path);
  const nlohmann::json j = nlohmann::json::parse(r.checkpoint.spec_json);
  r.spec = spec_from_json(j);
  r.model = build_model(r.spec, 0);
  nn::restore_params(r.checkpoint, r.model->params());
  if (auto* ae = dynamic_cast<AePipeline*>(r.model.get()); ae && j.value("stage1_complete", false)) {
    ae->mark_stage1_complete();
  }
  return r;
}

}  // namespace cirforge::models
