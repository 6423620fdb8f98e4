#include "cirforge/exp/presets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cirforge/data/dataset_io.hpp"
#include "cirforge/data/noise.hpp"
#include "cirforge/exp/latent_periodic.hpp"
#include "cirforge/exp/metrics.hpp"
#include "cirforge/models/factory.hpp"
#include "cirforge/util/digest.hpp"
#include "cirforge/util/rng.hpp"

namespace cirforge::exp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDeskSteps = 20000;
constexpr std::uint64_t kFullSteps = 200000;
constexpr std::uint64_t kThinStream = 0x7468696e;  // "thin"
constexpr std::uint64_t kNoiseSeedOffset = 0x6e6f6973;
constexpr std::size_t kArrayElements = 64;

// Samples per square meter, full-scale and desk-scale.
const std::vector<double> kFullDensities{40.0, 60.0, 100.0};
const std::vector<double> kDeskDensities{1500.0, 4000.0, 10000.0};
constexpr double kDeskMappingDensity = 1500.0;
constexpr std::uint64_t kDeskMappingSteps = 3000;

// Desk learning rates per model family. Full scale uses 1e-3 for all.
double desk_lr(const std::string& model) {
  if (model.find("cgrbf") != std::string::npos) return 3e-4;
  if (model.find("siren") != std::string::npos) return 1e-4;
  if (model == "ae") return 3e-3;
  return 1e-3;
}

struct Ctx {
  std::string name;
  PresetOptions opt;
  fs::path dir;
  json metrics = json::object();
  std::vector<std::string> files;

  template <typename T>
  T get(const char* key, T fallback) const {
    if (opt.overrides.contains(key)) return opt.overrides.at(key).get<T>();
    return fallback;
  }

  template <typename T>
  std::vector<T> list(const char* key, std::vector<T> fallback) const {
    if (!opt.overrides.contains(key)) return fallback;
    const json& v = opt.overrides.at(key);
    if (!v.is_array()) return {v.get<T>()};
    return v.get<std::vector<T>>();
  }

  std::vector<std::uint64_t> seeds(std::uint64_t fallback = 1) const {
    const auto n = get<std::uint64_t>("seeds", fallback);
    if (n == 0) throw PresetError("seeds must be >= 1");
    std::vector<std::uint64_t> s;
    for (std::uint64_t k = 0; k < n; ++k) s.push_back(opt.seed + k);
    return s;
  }

  std::vector<double> densities() const { return list<double>("densities", opt.paper_scale ? kFullDensities : kDeskDensities); }
  double density() const { return get<double>("density", opt.paper_scale ? kFullDensities.back() : kDeskDensities.back()); }

  // "lr" is either one value for every model or an object keyed by model name.
  double learning_rate(const std::string& model) const {
    const double fallback = opt.paper_scale ? 1e-3 : desk_lr(model);
    if (!opt.overrides.contains("lr")) return fallback;
    const json& v = opt.overrides.at("lr");
    if (v.is_object()) return v.contains(model) ? v.at(model).get<double>() : fallback;
    return v.get<double>();
  }

  TrainConfig train_config(std::uint64_t seed, const std::string& model,
                           std::uint64_t desk_steps = kDeskSteps) const {
    TrainConfig c;
    c.steps = get<std::uint64_t>("steps", opt.paper_scale ? kFullSteps : desk_steps);
    c.batch_size = get<std::size_t>("batch_size", 20);
    c.lr = learning_rate(model);
    c.eval_every = get<std::uint64_t>("eval_every", std::max<std::uint64_t>(1, c.steps / 20));
    c.seed = seed;
    c.validate();
    return c;
  }

  rt::Box region(const rt::Scene& scene, const rt::Box& desk) const {
    if (opt.overrides.contains("region")) {
      const auto r = opt.overrides.at("region").get<std::vector<double>>();
      if (r.size() != 4) throw PresetError("region override is [xmin, ymin, xmax, ymax]");
      return {{r[0], r[1], scene.ue_region.min.z}, {r[2], r[3], scene.ue_region.max.z}};
    }
    return opt.paper_scale ? scene.ue_region : desk;
  }

  std::string path(const std::string& rel) {
    files.push_back(rel);
    const fs::path p = dir / rel;
    fs::create_directories(p.parent_path());
    return p.string();
  }

  void write_curve(const std::string& rel, const ConvergenceCurve& curve) { curve.write_csv(path(rel)); }
};

std::vector<std::string> model_list(const Ctx& ctx, std::vector<std::string> fallback) {
  return ctx.list<std::string>("models", std::move(fallback));
}

std::string density_tag(double d) { return fmt::format("d{}", d); }

json dataset_entry(const data::Dataset& ds) {
  return {{"density", ds.meta.density},
          {"seed", ds.meta.seed},
          {"records", ds.records.size()},
          {"train", ds.n_train},
          {"test", ds.records.size() - ds.n_train},
          {"q", ds.meta.q},
          {"antennas", ds.meta.antennas},
          {"window_start_ns", ds.meta.window.start_s * 1e9},
          {"scale_factor", ds.meta.scale_factor},
          {"scene_hash", hex64(ds.meta.scene_hash)},
          {"digest", hex64(data::records_digest(ds.records))}};
}

// Trains one position -> CIR model and records its curve and final metrics.
double run_position_model(Ctx& ctx, const std::string& model, const rt::Scene& scene, const rt::Box& region,
                          const data::Dataset& ds, std::uint64_t seed, const std::string& label, json extra = {}) {
  const models::ModelSpec spec = position_model_spec(model, scene, region, ctx.opt.paper_scale);
  auto net = models::build_model(spec, seed);
  const TrainConfig cfg = ctx.train_config(seed, model);
  const auto t0 = std::chrono::steady_clock::now();
  const ConvergenceCurve curve = train_on_dataset(*net, spec, ds, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string rel = "curves/" + label + ".csv";
  ctx.write_curve(rel, curve);
  const double nmse = curve.final_test_nmse().value_or(std::nan(""));
  spdlog::info("{}: {} test NMSE {:.4e} ({} params, {:.1f} s)", ctx.name, label, nmse, net->params().size(), secs);
  json entry = {{"label", label},
                {"model", model},
                {"spec", spec.name},
                {"parameters", net->params().size()},
                {"seed", seed},
                {"density", ds.meta.density},
                {"steps", cfg.steps},
                {"final_train_mse", curve.rows.back().train_mse},
                {"final_test_nmse", nmse},
                {"curve", rel},
                {"model_digest", hex64(curve.model_digest)}};
  for (auto it = extra.begin(); it != extra.end(); ++it) entry[it.key()] = it.value();
  ctx.metrics["runs"].push_back(entry);
  return nmse;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- presets

void density_sweep(Ctx& ctx, const std::string& scene_name) {
  const rt::Scene scene = rt::scene_preset(ctx.get<std::string>("scene", scene_name));
  const rt::Box region = ctx.region(scene, scene_name == "paper_scene_nlos" ? nlos_desk_region() : desk_region());
  const auto densities = ctx.densities();
  const auto models = model_list(ctx, {"cgrbf", "siren", "ae"});
  std::map<std::string, std::map<double, std::vector<double>>> results;
  for (std::uint64_t seed : ctx.seeds()) {
    const auto sets = nested_density_datasets(scene, region, densities, seed);
    for (const auto& ds : sets) {
      ctx.metrics["datasets"].push_back(dataset_entry(ds));
      for (const auto& m : models) {
        const std::string label = fmt::format("{}_{}_s{}", m, density_tag(ds.meta.density), seed);
        results[m][ds.meta.density].push_back(run_position_model(ctx, m, scene, region, ds, seed, label));
      }
    }
  }
  for (const auto& [m, by_density] : results) {
    for (const auto& [d, values] : by_density) {
      ctx.metrics["median_test_nmse"][m][fmt::format("{}", d)] = median(values);
    }
  }
}

void limited_params(Ctx& ctx) {
  const rt::Scene scene = rt::scene_preset("paper_scene");
  const rt::Box region = ctx.region(scene, desk_region());
  const double density = ctx.density();
  for (std::uint64_t seed : ctx.seeds()) {
    const data::Dataset ds = nested_density_datasets(scene, region, {density}, seed).front();
    ctx.metrics["datasets"].push_back(dataset_entry(ds));
    for (const std::string m : {"cgrbf_small", "siren_matched"}) {
      run_position_model(ctx, m, scene, region, ds, seed, fmt::format("{}_s{}", m, seed));
    }
  }
}

void pos_noise(Ctx& ctx) {
  const rt::Scene scene = rt::scene_preset("paper_scene");
  const rt::Box region = ctx.region(scene, desk_region());
  const auto densities = ctx.list<double>("densities", {ctx.density()});
  const auto models = model_list(ctx, {"cgrbf"});
  const double sigma = ctx.get<double>("sigma_m", 0.03);
  for (std::uint64_t seed : ctx.seeds()) {
    for (auto ds : nested_density_datasets(scene, region, densities, seed)) {
      ctx.metrics["datasets"].push_back(dataset_entry(ds));
      for (const auto& m : models) {
        const double clean = run_position_model(ctx, m, scene, region, ds, seed,
                                                fmt::format("{}_{}_clean_s{}", m, density_tag(ds.meta.density), seed),
                                                {{"noise", "none"}});
        data::Dataset noisy = ds;
        data::NoiseSpec spec;
        spec.kind = data::NoiseKind::position_gaussian;
        spec.sigma_m = sigma;
        const auto report = data::inject_noise(std::span<data::SampleRecord>(noisy.records.data(), noisy.n_train),
                                               spec, seed + kNoiseSeedOffset);
        noisy.meta.noise = spec;
        const double degraded = run_position_model(
            ctx, m, scene, region, noisy, seed, fmt::format("{}_{}_pos{}_s{}", m, density_tag(ds.meta.density), sigma, seed),
            {{"noise", "position_gaussian"}, {"sigma_m", sigma}, {"mean_displacement_m", report.mean_displacement_m}});
        ctx.metrics["degradation"].push_back({{"model", m},
                                              {"density", ds.meta.density},
                                              {"seed", seed},
                                              {"clean_nmse", clean},
                                              {"noisy_nmse", degraded},
                                              {"factor", degraded / clean}});
      }
    }
  }
}

void cir_noise(Ctx& ctx, bool alpha_stable) {
  const rt::Scene scene = rt::scene_preset("paper_scene");
  const rt::Box region = ctx.region(scene, desk_region());
  const double density = ctx.density();
  const auto models = model_list(ctx, {"cgrbf"});
  for (std::uint64_t seed : ctx.seeds()) {
    const data::Dataset ds = nested_density_datasets(scene, region, {density}, seed).front();
    ctx.metrics["datasets"].push_back(dataset_entry(ds));
    std::vector<data::NoiseSpec> specs;
    if (alpha_stable) {
      // Dispersion relative to the RMS CIR entry of the training split.
      double energy = 0.0;
      std::size_t n = 0;
      for (const auto& r : ds.train()) {
        for (double v : r.cir) energy += v * v;
        n += r.cir.size();
      }
      const double rms = std::sqrt(energy / static_cast<double>(n));
      const double rel = ctx.get<double>("alpha_scale_rel", 0.05);
      for (double a : ctx.list<double>("alphas", {1.2, 1.5, 1.8})) {
        data::NoiseSpec s;
        s.kind = data::NoiseKind::cir_alpha_stable;
        s.alpha = a;
        s.dispersion_scale = rel * rms;
        specs.push_back(s);
      }
    } else {
      for (double t : ctx.list<double>("nmse_targets", {0.001, 0.01, 0.1})) {
        data::NoiseSpec s;
        s.kind = data::NoiseKind::cir_gaussian;
        s.target_nmse = t;
        specs.push_back(s);
      }
    }
    for (const auto& m : models) {
      run_position_model(ctx, m, scene, region, ds, seed, fmt::format("{}_clean_s{}", m, seed), {{"noise", "none"}});
      for (const auto& s : specs) {
        data::Dataset noisy = ds;
        const auto report = data::inject_noise(std::span<data::SampleRecord>(noisy.records.data(), noisy.n_train), s,
                                               seed + kNoiseSeedOffset);
        noisy.meta.noise = s;
        const std::string tag =
            alpha_stable ? fmt::format("alpha{}", s.alpha) : fmt::format("nmse{}", s.target_nmse.value_or(0.0));
        json extra = data::noise_to_json(s);
        extra["realized_noise_nmse"] = report.realized_nmse;
        run_position_model(ctx, m, scene, region, noisy, seed, fmt::format("{}_{}_s{}", m, tag, seed),
                           {{"noise", extra}});
      }
    }
  }
}

void freq_sweep(Ctx& ctx) {
  const auto models = model_list(ctx, {"cgrbf", "siren"});
  const double density = ctx.density();
  for (double ghz : ctx.list<double>("frequencies_ghz", {3.0, 6.0, 12.0})) {
    rt::Scene scene = rt::scene_preset("paper_scene");
    scene.frequency_hz = ghz * 1e9;
    scene.name = fmt::format("paper_scene_{}ghz", ghz);
    const rt::Box region = ctx.region(scene, desk_region());
    for (std::uint64_t seed : ctx.seeds()) {
      const data::Dataset ds = nested_density_datasets(scene, region, {density}, seed).front();
      json entry = dataset_entry(ds);
      entry["frequency_ghz"] = ghz;
      ctx.metrics["datasets"].push_back(entry);
      for (const auto& m : models) {
        run_position_model(ctx, m, scene, region, ds, seed, fmt::format("{}_{}ghz_s{}", m, ghz, seed),
                           {{"frequency_ghz", ghz}});
      }
    }
  }
}

void mimo_shared(Ctx& ctx) {
  const rt::Scene scene = rt::scene_preset(ctx.get<std::string>("scene", "paper_scene_mimo"));
  const rt::Box region = ctx.region(scene, desk_region());
  const double density = ctx.get<double>("density", ctx.opt.paper_scale ? kFullDensities.back() : kDeskMappingDensity);
  const auto models = model_list(ctx, {"cgrbf", "siren"});
  for (std::uint64_t seed : ctx.seeds()) {
    const data::Dataset ds = nested_density_datasets(scene, region, {density}, seed).front();
    ctx.metrics["datasets"].push_back(dataset_entry(ds));
    for (const auto& m : models) {
      run_position_model(ctx, "mimo_" + m, scene, region, ds, seed, fmt::format("mimo_{}_s{}", m, seed));
    }
  }
}

std::vector<std::size_t> mapper_antennas(std::size_t count) {
  // Nested corner-first subsets of the 8 x 8 array (row-major element index).
  static const std::vector<std::size_t> order{0, 63, 7, 56, 3, 60, 24, 39};
  if (count == 0 || count > order.size()) throw PresetError("antenna count must be 1..8");
  return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count)};
}

void channel_mapping(Ctx& ctx) {
  const rt::Scene scene = rt::scene_preset("paper_scene_mimo");
  const rt::Box region = ctx.region(scene, desk_region());
  const double density = ctx.get<double>("density", ctx.opt.paper_scale ? kFullDensities.back() : kDeskMappingDensity);
  for (std::uint64_t seed : ctx.seeds()) {
    const data::Dataset ds = nested_density_datasets(scene, region, {density}, seed).front();
    ctx.metrics["datasets"].push_back(dataset_entry(ds));
    const std::size_t q = ds.meta.q;
    const double s = ds.meta.scale_factor;
    for (std::size_t count : ctx.list<std::size_t>("antennas", {2, 4, 8})) {
      const auto chosen = mapper_antennas(count);
      auto inputs = [&](const data::SampleRecord& r) {
        std::vector<double> x;
        for (std::size_t a : chosen) {
          for (std::size_t k = 0; k < q; ++k) x.push_back(r.cir[a * q + k] * s);
        }
        return x;
      };
      TrainingSet set;
      for (const auto& r : ds.train()) {
        set.x.push_back(inputs(r));
        std::vector<double> y = r.cir;
        for (double& v : y) v *= s;
        set.y.push_back(std::move(y));
      }
      std::vector<std::vector<double>> test_x, test_y;
      for (const auto& r : ds.test()) {
        test_x.push_back(inputs(r));
        test_y.push_back(r.cir);
      }
      models::ModelSpec spec = models::model_preset(
          ctx.opt.paper_scale ? fmt::format("table7_mapper_{}", count) : fmt::format("desk_mapper_{}", count));
      spec.input_width = q * count;
      spec.q_out = q * kArrayElements;
      auto net = models::build_model(spec, seed);
      const TrainConfig cfg = ctx.train_config(seed, "mapper", kDeskMappingSteps);
      const Evaluator eval = [&](const nn::Model& m) { return evaluate_nmse_pairs(m, test_x, test_y, s); };
      const ConvergenceCurve curve = train(*net, set, cfg, eval, &spec);
      const std::string label = fmt::format("mapper_{}ant_s{}", count, seed);
      const std::string rel = "curves/" + label + ".csv";
      ctx.write_curve(rel, curve);
      const double nmse = curve.final_test_nmse().value_or(std::nan(""));
      spdlog::info("{}: {} test NMSE {:.4e}", ctx.name, label, nmse);
      ctx.metrics["runs"].push_back({{"label", label},
                                     {"antennas", count},
                                     {"antenna_indices", chosen},
                                     {"parameters", net->params().size()},
                                     {"seed", seed},
                                     {"steps", cfg.steps},
                                     {"final_train_mse", curve.rows.back().train_mse},
                                     {"final_test_nmse", nmse},
                                     {"curve", rel}});
    }
  }
}

void latent_periodic(Ctx& ctx) {
  LatentPeriodicOptions o;
  o.n_train = ctx.get<std::size_t>("samples", o.n_train);
  o.wavelengths = ctx.get<double>("wavelengths", o.wavelengths);
  o.hidden = ctx.list<std::size_t>("hidden", o.hidden);
  o.omega0 = ctx.get<double>("omega0", o.omega0);
  o.train.steps = ctx.get<std::uint64_t>("steps", o.train.steps);
  o.train.lr = ctx.get<double>("lr", o.train.lr);
  o.train.eval_every = ctx.get<std::uint64_t>("eval_every", std::max<std::uint64_t>(1, o.train.steps / 20));
  o.train.seed = ctx.opt.seed;
  const LatentPeriodicResult r = run_latent_periodic(o);
  ctx.write_curve("curves/sine_mlp.csv", r.sine_curve);
  ctx.write_curve("curves/tanh_mlp.csv", r.tanh_curve);
  {
    std::ofstream f(ctx.path("samples.csv"), std::ios::trunc);
    f << "x,y\n";
    for (std::size_t i = 0; i < r.train_x.size(); ++i) f << fmt::format("{:.17g},{:.17g}\n", r.train_x[i], r.train_y[i]);
  }
  spdlog::info("{}: sine test MSE {:.4e}, tanh test MSE {:.4e}", ctx.name, r.sine_test_mse, r.tanh_test_mse);
  ctx.metrics["sine_test_mse"] = r.sine_test_mse;
  ctx.metrics["tanh_test_mse"] = r.tanh_test_mse;
  ctx.metrics["ratio"] = r.sine_test_mse / r.tanh_test_mse;
  ctx.metrics["samples"] = o.n_train;
  ctx.metrics["wavelengths"] = o.wavelengths;
  ctx.metrics["hidden"] = o.hidden;
  ctx.metrics["steps"] = o.train.steps;
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::now();
  return fmt::format("{:%Y%m%dT%H%M%S}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

}  // namespace

rt::Box desk_region() { return {{88.0, 20.0, 1.6}, {88.4, 20.3, 1.6}}; }

rt::Box nlos_desk_region() { return {{45.0, 34.0, 1.6}, {45.4, 34.3, 1.6}}; }

models::ModelSpec position_model_spec(const std::string& short_name, const rt::Scene& scene, const rt::Box& region,
                                      bool paper_scale) {
  std::string name = short_name;
  const bool mimo = name.rfind("mimo_", 0) == 0;
  if (mimo) name = name.substr(5);
  models::ModelSpec spec;
  if (name == "cgrbf_small") {
    spec = models::model_preset(paper_scale ? "table5_small_cgrbf" : "desk_cgrbf");
  } else if (name == "cgrbf") {
    spec = models::model_preset(paper_scale ? (mimo ? "table6_mimo_cgrbf" : "table2_cgrbf") : "desk_cgrbf");
  } else if (name == "siren") {
    spec = models::model_preset(paper_scale ? (mimo ? "table6_mimo_siren" : "table1_siren") : "desk_siren");
  } else if (name == "siren_matched") {
    spec = models::model_preset(paper_scale ? "table5_small_siren" : "desk_siren");
    if (!paper_scale) {
      // Two equal hidden layers sized to the desk C-GRBF parameter count.
      const models::ModelSpec ref = position_model_spec("cgrbf_small", scene, region, false);
      const std::size_t target = models::build_model(ref, 0)->params().size();
      std::size_t best = 1;
      auto count = [&](std::size_t h) { return 4 * h + h * h + h + (h + 1) * ref.q_out; };
      for (std::size_t h = 1; h < 1024; ++h) {
        const auto diff = [&](std::size_t x) {
          return x > target ? x - target : target - x;
        };
        if (diff(count(h)) < diff(count(best))) best = h;
      }
      spec.hidden_widths = {best, best};
      spec.name = "desk_siren_matched";
    }
  } else if (name == "ae") {
    spec = models::model_preset(paper_scale ? "table3_ae" : "desk_ae");
  } else if (name == "tanh") {
    spec = models::model_preset("desk_tanh");
  } else {
    throw PresetError("unknown model '" + short_name + "'");
  }
  const std::size_t q = rt::reference_window().q();
  const std::size_t antennas = rt::bs_antennas(scene).size();
  spec.q_out = q * antennas;
  if (mimo) spec.variant = name.rfind("cgrbf", 0) == 0 ? models::Variant::mimo_cgrbf : models::Variant::mimo_siren;
  spec.frequency_hz = scene.frequency_hz;
  spec.w_init_mean = 0.0;
  spec.bs_position = scene.array ? scene.array->first_element : scene.bs_position;
  spec.c_init_box = region;
  models::set_input_box(spec, region);
  spec.validate();
  return spec;
}

models::ModelSpec fit_spec_to_dataset(models::ModelSpec spec, const data::DatasetMeta& meta) {
  if (spec.variant != models::Variant::channel_mapper) spec.q_out = meta.label_width();
  for (const auto& name : rt::scene_preset_names()) {
    const rt::Scene scene = rt::scene_preset(name);
    if (rt::scene_digest(scene) != meta.scene_hash) continue;
    spec.frequency_hz = scene.frequency_hz;
    spec.bs_position = scene.array ? scene.array->first_element : scene.bs_position;
    break;
  }
  if (spec.variant == models::Variant::channel_mapper) return spec;
  spec.c_init_box = meta.region;
  models::set_input_box(spec, meta.region);
  spec.validate();
  return spec;
}

std::vector<data::Dataset> nested_density_datasets(const rt::Scene& scene, const rt::Box& region,
                                                   const std::vector<double>& densities, std::uint64_t seed) {
  if (densities.empty()) throw PresetError("no densities");
  const double top = *std::max_element(densities.begin(), densities.end());
  data::GenerateOptions go;
  go.density_per_m2 = top;
  go.seed = seed;
  go.region = region;
  const data::Dataset full = data::generate_dataset(scene, go);
  if (full.n_train == 0 || full.records.size() == full.n_train) {
    throw PresetError("dataset too small to split; enlarge the region or the density");
  }
  Rng rng = Rng::stream(seed, kThinStream);
  std::vector<double> u(full.n_train);
  for (double& v : u) v = rng.uniform();
  std::vector<data::Dataset> out;
  for (double d : densities) {
    data::Dataset ds;
    ds.meta = full.meta;
    ds.meta.density = d;
    for (std::size_t i = 0; i < full.n_train; ++i) {
      if (u[i] < d / top) ds.records.push_back(full.records[i]);
    }
    ds.n_train = ds.records.size();
    if (ds.n_train == 0) throw PresetError(fmt::format("density {} leaves an empty training split", d));
    ds.records.insert(ds.records.end(), full.records.begin() + static_cast<std::ptrdiff_t>(full.n_train),
                      full.records.end());
    out.push_back(std::move(ds));
  }
  return out;
}

std::vector<std::string> preset_names() {
  return {"density_sweep", "limited_params", "pos_noise", "cir_noise_gaussian", "cir_noise_alpha",
          "freq_sweep",    "nlos_scene",     "mimo_shared", "channel_mapping",  "latent_periodic_1d"};
}

PresetResult run_preset(const std::string& name, const PresetOptions& options) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) throw PresetError("unknown preset '" + name + "'");
  Ctx ctx;
  ctx.name = name;
  ctx.opt = options;
  if (!ctx.opt.overrides.is_object()) throw PresetError("overrides must be an object");
  ctx.dir = options.out_dir ? fs::path(*options.out_dir) : fs::path(options.out_root) / name / utc_stamp();
  fs::create_directories(ctx.dir);
  ctx.metrics["preset"] = name;
  ctx.metrics["seed"] = options.seed;
  ctx.metrics["paper_scale"] = options.paper_scale;
  ctx.metrics["overrides"] = options.overrides;

  try {
    if (name == "density_sweep") density_sweep(ctx, "paper_scene");
    if (name == "nlos_scene") density_sweep(ctx, "paper_scene_nlos");
    if (name == "limited_params") limited_params(ctx);
    if (name == "pos_noise") pos_noise(ctx);
    if (name == "cir_noise_gaussian") cir_noise(ctx, false);
    if (name == "cir_noise_alpha") cir_noise(ctx, true);
    if (name == "freq_sweep") freq_sweep(ctx);
    if (name == "mimo_shared") mimo_shared(ctx);
    if (name == "channel_mapping") channel_mapping(ctx);
    if (name == "latent_periodic_1d") latent_periodic(ctx);
  } catch (const nlohmann::json::exception& e) {
    throw PresetError(std::string("bad override: ") + e.what());
  }

  // FNV-1a digest of every CSV.
  std::sort(ctx.files.begin(), ctx.files.end());
  for (const auto& f : ctx.files) ctx.metrics["digests"][f] = hex64(file_digest((ctx.dir / f).string()));
  {
    std::ofstream out(ctx.path("metrics.json"), std::ios::trunc);
    out << ctx.metrics.dump(2) << '\n';
  }
  std::sort(ctx.files.begin(), ctx.files.end());
  return {ctx.dir.string(), ctx.metrics, ctx.files};
}

}  // namespace cirforge::exp
