#include "cirforge/models/model_spec.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "cirforge/rt/scene.hpp"
#include "cirforge/util/digest.hpp"

namespace cirforge::models {

namespace {

constexpr std::size_t kReferenceQ = 182;
constexpr std::size_t kArrayElements = 64;

ModelSpec base(const std::string& name, Variant variant, std::vector<std::size_t> hidden) {
  ModelSpec s;
  s.name = name;
  s.variant = variant;
  s.hidden_widths = std::move(hidden);
  s.hidden_activation = (variant == Variant::channel_mapper) ? "tanh" : "sine";
  if (variant != Variant::channel_mapper) set_input_box(s, s.c_init_box);
  return s;
}

ModelSpec cgrbf(const std::string& name, std::vector<std::size_t> hidden, std::size_t n_kernels,
                std::size_t q = kReferenceQ) {
  ModelSpec s = base(name, Variant::cgrbf, std::move(hidden));
  s.n_kernels = n_kernels;
  s.q_out = q;
  return s;
}

ModelSpec mapper(std::size_t antennas) {
  ModelSpec s = base("table7_mapper_" + std::to_string(antennas), Variant::channel_mapper, {256, 512, 512, 512});
  s.input_width = kReferenceQ * antennas;
  s.q_out = kReferenceQ * kArrayElements;
  return s;
}

// Desk-scale variants: the same structure with widths a single core trains
// in about a minute.
ModelSpec desk_cgrbf() {
  ModelSpec s = cgrbf("desk_cgrbf", {32, 48}, 16);
  s.front_output = "identity";
  s.residual_front = true;
  s.front_scale_m = 0.02;
  return s;
}

ModelSpec desk_siren() { return base("desk_siren", Variant::siren, {64, 64, 64}); }

ModelSpec desk_ae() {
  ModelSpec s = base("desk_ae", Variant::ae_pipeline, {});
  s.encoder_widths = {64, 16};
  s.decoder_widths = {16, 64};
  s.pos2code_widths = {64, 64};
  s.hidden_activation = "tanh";
  return s;
}

ModelSpec desk_mapper(std::size_t antennas) {
  ModelSpec s = base("desk_mapper_" + std::to_string(antennas), Variant::channel_mapper, {64, 64});
  s.input_width = kReferenceQ * antennas;
  s.q_out = kReferenceQ * kArrayElements;
  return s;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::cgrbf:
      return "cgrbf";
    case Variant::siren:
      return "siren";
    case Variant::ae_pipeline:
      return "ae_pipeline";
    case Variant::mimo_cgrbf:
      return "mimo_cgrbf";
    case Variant::mimo_siren:
      return "mimo_siren";
    case Variant::channel_mapper:
      return "channel_mapper";
    case Variant::mlp:
      return "mlp";
  }
  return "cgrbf";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::cgrbf, Variant::siren, Variant::ae_pipeline, Variant::mimo_cgrbf, Variant::mimo_siren,
                    Variant::channel_mapper, Variant::mlp}) {
    if (to_string(v) == s) return v;
  }
  throw SpecError("unknown model variant '" + s + "'");
}

bool is_cgrbf(Variant v) { return v == Variant::cgrbf || v == Variant::mimo_cgrbf; }

double ModelSpec::effective_w_init_mean() const {
  if (w_init_mean > 0.0) return w_init_mean;
  return 2.0 * std::numbers::pi * frequency_hz / rt::kSpeedOfLight;
}

void ModelSpec::validate() const {
  auto fail = [&](const std::string& what) { throw SpecError("model spec '" + name + "': " + what); };
  if (q_out == 0 || q_out % 2 != 0) fail("q_out must be even and positive");
  if (input_width == 0) fail("input_width must be positive");
  if (!(omega0 > 0.0)) fail("omega0 must be > 0");
  if (first_omega0 < 0.0) fail("first_omega0 must be >= 0");
  for (std::size_t w : hidden_widths) {
    if (w == 0) fail("hidden widths must be positive");
  }
  if (!input_center.empty() || !input_scale.empty()) {
    if (input_center.size() != input_width || input_scale.size() != input_width) {
      fail("input_center/input_scale must have input_width entries");
    }
    for (double s : input_scale) {
      if (!(s > 0.0)) fail("input_scale entries must be > 0");
    }
  }
  switch (variant) {
    case Variant::cgrbf:
    case Variant::mimo_cgrbf: {
      if (hidden_widths.empty()) fail("C-GRBF needs at least one front layer");
      if (input_width != 3) fail("C-GRBF input must be a 3-D position");
      const std::size_t nl = hidden_widths.back();
      if (nl % 3 != 0) fail("last front width must be divisible by 3");
      if (kernels_per_group == 0) fail("kernels_per_group must be positive");
      if (n_kernels != kernels_per_group * nl / 3) {
        fail("n_kernels must equal kernels_per_group * n_l / 3 (" + std::to_string(kernels_per_group * nl / 3) +
             ")");
      }
      if (!(w_init_std >= 0.0)) fail("w_init_std must be >= 0");
      if (!(sigma0_m > 0.0)) fail("sigma0_m must be > 0");
      if (!(frequency_hz > 0.0)) fail("frequency_hz must be > 0");
      if (front_output != "sine" && front_output != "identity") fail("front_output must be sine or identity");
      if (!(front_scale_m > 0.0)) fail("front_scale_m must be > 0");
      break;
    }
    case Variant::siren:
    case Variant::mimo_siren:
    case Variant::mlp:
      if (hidden_widths.empty()) fail("needs at least one hidden layer");
      break;
    case Variant::channel_mapper:
      if (hidden_widths.empty()) fail("needs at least one hidden layer");
      if (input_width % 2 != 0) fail("mapper input must be whole CIR vectors");
      break;
    case Variant::ae_pipeline:
      if (encoder_widths.empty() || decoder_widths.empty() || pos2code_widths.empty()) fail("empty AE stage");
      if (code_dim == 0) fail("code_dim must be positive");
      if (input_width != 3) fail("AE pipeline input must be a 3-D position");
      break;
  }
}

nlohmann::json spec_to_json(const ModelSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["variant"] = to_string(s.variant);
  j["hidden_widths"] = s.hidden_widths;
  j["input_width"] = s.input_width;
  j["q_out"] = s.q_out;
  j["omega0"] = s.omega0;
  j["first_omega0"] = s.first_omega0;
  j["hidden_activation"] = s.hidden_activation;
  if (is_cgrbf(s.variant)) {
    j["n_kernels"] = s.n_kernels;
    j["kernels_per_group"] = s.kernels_per_group;
    j["w_init"] = {{"mean", s.w_init_mean}, {"std", s.w_init_std}};
    j["sigma0_m"] = s.sigma0_m;
    j["frequency_hz"] = s.frequency_hz;
    j["bs_position"] = s.bs_position.to_array();
    j["front_output"] = s.front_output;
    j["residual_front"] = s.residual_front;
    j["front_scale_m"] = s.front_scale_m;
    j["c_init_box"] = {{"min", s.c_init_box.min.to_array()}, {"max", s.c_init_box.max.to_array()}};
  }
  if (s.variant == Variant::ae_pipeline) {
    j["encoder_widths"] = s.encoder_widths;
    j["decoder_widths"] = s.decoder_widths;
    j["pos2code_widths"] = s.pos2code_widths;
    j["code_dim"] = s.code_dim;
  }
  if (!s.input_center.empty()) {
    j["input_center"] = s.input_center;
    j["input_scale"] = s.input_scale;
  }
  return j;
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  auto vec3 = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    if (v.size() != 3) throw SpecError("expected a 3-vector");
    return rt::Vec3{v[0], v[1], v[2]};
  };
  ModelSpec s;
  try {
    s.name = j.value("name", std::string("custom"));
    s.variant = variant_from_string(j.at("variant").get<std::string>());
    if (s.variant == Variant::channel_mapper) s.hidden_activation = "tanh";
    s.hidden_widths = j.value("hidden_widths", std::vector<std::size_t>{});
    s.input_width = j.value("input_width", std::size_t{3});
    s.q_out = j.value("q_out", std::size_t{182});
    s.omega0 = j.value("omega0", 30.0);
    s.first_omega0 = j.value("first_omega0", 0.0);
    s.hidden_activation = j.value("hidden_activation", s.hidden_activation);
    s.n_kernels = j.value("n_kernels", std::size_t{0});
    s.kernels_per_group = j.value("kernels_per_group", std::size_t{1});
    if (j.contains("w_init")) {
      s.w_init_mean = j["w_init"].value("mean", 0.0);
      s.w_init_std = j["w_init"].value("std", 1.0);
    }
    s.sigma0_m = j.value("sigma0_m", 30.0);
    s.frequency_hz = j.value("frequency_hz", 3e9);
    if (j.contains("bs_position")) s.bs_position = vec3(j["bs_position"]);
    s.front_output = j.value("front_output", std::string("sine"));
    s.residual_front = j.value("residual_front", false);
    s.front_scale_m = j.value("front_scale_m", 1.0);
    if (j.contains("c_init_box")) s.c_init_box = {vec3(j["c_init_box"].at("min")), vec3(j["c_init_box"].at("max"))};
    s.encoder_widths = j.value("encoder_widths", s.encoder_widths);
    s.decoder_widths = j.value("decoder_widths", s.decoder_widths);
    s.pos2code_widths = j.value("pos2code_widths", s.pos2code_widths);
    s.code_dim = j.value("code_dim", s.code_dim);
    s.input_center = j.value("input_center", std::vector<double>{});
    s.input_scale = j.value("input_scale", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("model spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::uint64_t spec_digest(const ModelSpec& spec) { return fnv1a(spec_to_json(spec).dump()); }

ModelSpec model_preset(const std::string& name) {
  if (name == "table1_siren") return base(name, Variant::siren, {380, 512, 512, 512, 256});
  if (name == "table2_cgrbf") return cgrbf(name, {256, 512, 900}, 300);
  if (name == "table2_cgrbf-small") return cgrbf(name, {8, 12}, 4);
  if (name == "table3_ae") {
    ModelSpec s = base(name, Variant::ae_pipeline, {});
    s.hidden_activation = "tanh";
    return s;
  }
  if (name == "table5_small_cgrbf") return cgrbf(name, {128, 256, 600}, 200);
  if (name == "table5_small_siren") return base(name, Variant::siren, {150, 256, 300, 256});
  if (name == "table6_mimo_cgrbf") {
    ModelSpec s = cgrbf(name, {256, 512, 1050}, 350, kReferenceQ * kArrayElements);
    s.variant = Variant::mimo_cgrbf;
    s.bs_position = {45.0, 18.0, 37.0};
    return s;
  }
  if (name == "table6_mimo_siren") {
    ModelSpec s = base(name, Variant::mimo_siren, {512, 768, 1024, 768, 512});
    s.q_out = kReferenceQ * kArrayElements;
    return s;
  }
  if (name == "table7_mapper_2") return mapper(2);
  if (name == "table7_mapper_4") return mapper(4);
  if (name == "table7_mapper_8") return mapper(8);
  if (name == "desk_cgrbf") return desk_cgrbf();
  if (name == "desk_siren") return desk_siren();
  if (name == "desk_ae") return desk_ae();
  if (name == "desk_tanh") {
    ModelSpec s = desk_siren();
    s.name = name;
    s.variant = Variant::mlp;
    s.hidden_activation = "tanh";
    return s;
  }
  if (name == "desk_mapper_2") return desk_mapper(2);
  if (name == "desk_mapper_4") return desk_mapper(4);
  if (name == "desk_mapper_8") return desk_mapper(8);
  throw SpecError("unknown model preset '" + name + "'");
}

std::vector<std::string> model_preset_names() {
  return {"table1_siren",       "table2_cgrbf",      "table2_cgrbf-small", "table3_ae",       "table5_small_cgrbf",
          "table5_small_siren", "table6_mimo_cgrbf", "table6_mimo_siren",  "table7_mapper_2", "table7_mapper_4",
          "table7_mapper_8",    "desk_cgrbf",        "desk_siren",         "desk_ae",         "desk_tanh",
          "desk_mapper_2",      "desk_mapper_4",     "desk_mapper_8"};
}

ModelSpec load_model_spec(const std::string& name_or_path) {
  if (!std::filesystem::exists(name_or_path)) return model_preset(name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw SpecError("cannot open model spec '" + name_or_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(name_or_path + ": " + e.what());
  }
  return spec_from_json(j);
}

void set_input_box(ModelSpec& spec, const rt::Box& box) {
  spec.input_center.assign(3, 0.0);
  spec.input_scale.assign(3, 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    spec.input_center[i] = 0.5 * (box.min[i] + box.max[i]);
    const double half = 0.5 * (box.max[i] - box.min[i]);
    spec.input_scale[i] = half > 0.0 ? half : 1.0;
  }
}

}  // namespace cirforge::models
