#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cirforge/data/dataset_io.hpp"
#include "cirforge/data/noise.hpp"
#include "cirforge/exp/metrics.hpp"
#include "cirforge/exp/presets.hpp"
#include "cirforge/exp/trainer.hpp"
#include "cirforge/models/factory.hpp"
#include "cirforge/nn/checkpoint.hpp"
#include "cirforge/nn/gradcheck.hpp"
#include "cirforge/rt/cir.hpp"
#include "cirforge/rt/raytrace.hpp"
#include "cirforge/util/digest.hpp"
#include "cirforge/util/rng.hpp"
#include "cirforge/util/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cirforge;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kUsage = 2;

// Thrown for flag combinations CLI11 cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

rt::Box parse_region(const std::string& text, const rt::Box& fallback) {
  std::vector<double> v;
  std::string item;
  for (char ch : text + ",") {
    if (ch == ',') {
      try {
        v.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw UsageError("--region expects xmin,ymin,xmax,ymax");
      }
      item.clear();
    } else {
      item += ch;
    }
  }
  if (v.size() != 4) throw UsageError("--region expects xmin,ymin,xmax,ymax");
  return {{v[0], v[1], fallback.min.z}, {v[2], v[3], fallback.max.z}};
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
  }
  if (text.find(',') == std::string::npos) return text;
  json list = json::array();
  std::string item;
  for (char ch : text + ",") {
    if (ch == ',') {
      try {
        list.push_back(json::parse(item));
      } catch (const json::parse_error&) {
        list.push_back(item);
      }
      item.clear();
    } else {
      item += ch;
    }
  }
  return list;
}

// ------------------------------------------------------------ verbs

int scene_validate(const std::string& name) {
  rt::Scene scene;
  try {
    scene = rt::load_scene(name);
  } catch (const rt::SceneError& e) {
    std::cout << "INVALID " << e.what() << '\n';
    return kValidationFailure;
  }
  std::cout << fmt::format("scene {} digest {} surfaces {} antennas {}\n", scene.name, hex64(rt::scene_digest(scene)),
                           scene.surfaces.size(), rt::bs_antennas(scene).size());

  // Ten probe positions on a 5 x 2 grid over the UE region.
  const rt::Box& r = scene.ue_region;
  const rt::DelayWindow window = rt::reference_window();
  std::cout << "probe x y z paths los order1 order2 min_delay_ns in_window\n";
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 5; ++i) {
      const rt::Vec3 p{r.min.x + (r.max.x - r.min.x) * (i + 0.5) / 5.0, r.min.y + (r.max.y - r.min.y) * (j + 0.5) / 2.0,
                       r.min.z};
      const auto paths = rt::trace_paths(scene, p);
      std::size_t by_order[3] = {0, 0, 0};
      double min_delay = INFINITY;
      std::size_t in_window = 0;
      for (const auto& path : paths) {
        if (path.order >= 0 && path.order <= 2) ++by_order[path.order];
        min_delay = std::min(min_delay, path.delay_s);
        if (path.delay_s >= window.start_s && path.delay_s < window.end_s) ++in_window;
      }
      std::cout << fmt::format("{} {:.2f} {:.2f} {:.2f} {} {} {} {} {:.3f} {}\n", j * 5 + i, p.x, p.y, p.z,
                               paths.size(), by_order[0], by_order[1], by_order[2], min_delay * 1e9, in_window);
    }
  }
  return kOk;
}

struct GenerateArgs {
  std::string scene = "paper_scene";
  double density = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string region;
  std::string window = "auto";
  double split = 0.8;
  std::string noise_kind = "none";
  std::optional<double> noise_target;
  double noise_alpha = 2.0;
  double noise_scale = 0.0;
  double noise_sigma = 0.03;
};

int dataset_generate(const GenerateArgs& a) {
  const rt::Scene scene = rt::load_scene(a.scene);
  data::GenerateOptions go;
  go.density_per_m2 = a.density;
  go.seed = a.seed;
  go.split_fraction = a.split;
  if (!a.region.empty()) go.region = parse_region(a.region, scene.ue_region);
  if (a.window == "fixed") {
    go.window_mode = data::WindowMode::fixed;
  } else if (a.window != "auto") {
    throw UsageError("--window must be auto or fixed");
  }
  data::Dataset ds = data::generate_dataset(scene, go);
  data::NoiseSpec noise;
  noise.kind = data::noise_kind_from_string(a.noise_kind);
  noise.target_nmse = a.noise_target;
  noise.alpha = a.noise_alpha;
  noise.dispersion_scale = a.noise_scale;
  noise.sigma_m = a.noise_sigma;
  if (noise.kind != data::NoiseKind::none) {
    data::validate_noise(noise);
    const auto report = data::inject_noise(ds, noise, a.seed);
    spdlog::info("noise {}: realized NMSE {:.6g}, mean displacement {:.6g} m", a.noise_kind, report.realized_nmse,
                 report.mean_displacement_m);
  }
  data::save_dataset(ds, a.out);
  std::cout << fmt::format("wrote {} records ({} train, {} test), q={}, antennas={}, digest {}\n", ds.records.size(),
                           ds.n_train, ds.records.size() - ds.n_train, ds.meta.q, ds.meta.antennas,
                           hex64(data::records_digest(ds.records)));
  return kOk;
}

int train_verb(const std::string& model_name, const std::string& data_path, const std::string& config_path,
               const std::string& out_dir, std::uint64_t seed, std::optional<std::uint64_t> steps) {
  const data::Dataset ds = data::load_dataset(data_path);
  const models::ModelSpec spec = exp::fit_spec_to_dataset(models::load_model_spec(model_name), ds.meta);
  exp::TrainConfig cfg;
  cfg.eval_every = 500;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot open config '" + config_path + "'");
    cfg = exp::config_from_json(json::parse(f), cfg);
  }
  cfg.seed = seed;
  if (steps) cfg.steps = *steps;
  cfg.validate();
  fs::create_directories(out_dir);
  cfg.failure_checkpoint = (fs::path(out_dir) / "failure.ckpt").string();
  auto model = models::build_model(spec, seed);
  spdlog::info("training {} ({} parameters) on {} records for {} steps", spec.name, model->params().size(),
               ds.n_train, cfg.steps);
  const exp::ConvergenceCurve curve = exp::train_on_dataset(*model, spec, ds, cfg);
  curve.write_csv((fs::path(out_dir) / "curve.csv").string());
  nn::save_checkpoint(models::checkpoint_model(*model, spec, nullptr, cfg.steps),
                      (fs::path(out_dir) / "model.ckpt").string());
  json summary = {{"model", spec.name},
                  {"parameters", model->params().size()},
                  {"dataset_digest", hex64(data::records_digest(ds.records))},
                  {"config", exp::config_to_json(cfg)},
                  {"final_train_mse", curve.rows.back().train_mse},
                  {"model_digest", hex64(curve.model_digest)}};
  if (auto v = curve.final_test_nmse()) summary["final_test_nmse"] = *v;
  std::ofstream((fs::path(out_dir) / "metrics.json").string(), std::ios::trunc) << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

int eval_verb(const std::string& ckpt, const std::string& data_path) {
  const data::Dataset ds = data::load_dataset(data_path);
  const models::RestoredModel r = models::restore_model(ckpt);
  if (r.model->output_width() != ds.meta.label_width()) {
    std::cerr << fmt::format("model output width {} does not match dataset label width {}\n",
                             r.model->output_width(), ds.meta.label_width());
    return kValidationFailure;
  }
  json out = {{"model", r.spec.name}};
  if (!ds.test().empty()) out["test_nmse"] = exp::evaluate_nmse(*r.model, ds.test(), ds.meta.scale_factor);
  if (!ds.train().empty()) out["train_nmse"] = exp::evaluate_nmse(*r.model, ds.train(), ds.meta.scale_factor);
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int gradcheck_verb(const std::string& model_name, double tol, double step, std::uint64_t seed,
                   std::size_t max_per_tensor) {
  const models::ModelSpec spec = models::load_model_spec(model_name);
  auto model = models::build_model(spec, seed);
  Rng rng = Rng::stream(seed, 0x67636b);
  std::vector<double> x(model->input_width()), label(model->output_width());
  if (spec.variant == models::Variant::channel_mapper) {
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
  } else {
    const rt::Box& b = spec.c_init_box;
    x = {rng.uniform(b.min.x, b.max.x), rng.uniform(b.min.y, b.max.y), b.min.z};
  }
  for (double& v : label) v = 0.5 * rng.normal();
  nn::GradCheckOptions opts;
  opts.tolerance = tol;
  opts.step = step;
  opts.max_per_tensor = max_per_tensor;
  const nn::GradCheckReport report = nn::gradient_check(*model, x, label, opts);
  std::cout << fmt::format("gradcheck {} ({} parameters)\n", spec.name, model->params().size()) << report.format();
  std::cout << (report.passed() ? "PASS" : "FAIL")
            << fmt::format(" max relative error {:.3e} (tolerance {:.1e})\n", report.max_rel_error(), tol);
  return report.passed() ? kOk : kValidationFailure;
}

int preset_verb(const std::string& name, const std::vector<std::string>& overrides, bool paper_scale,
                const std::string& out, std::uint64_t seed) {
  exp::PresetOptions opt;
  opt.seed = seed;
  opt.paper_scale = paper_scale;
  if (!out.empty()) opt.out_dir = out;
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("override '" + kv + "' is not key=value");
    opt.overrides[kv.substr(0, eq)] = parse_override_value(kv.substr(eq + 1));
  }
  const exp::PresetResult r = exp::run_preset(name, opt);
  std::cout << "output " << r.dir << '\n';
  for (const auto& f : r.files) std::cout << "  " << f << '\n';
  return kOk;
}

int export_csv_verb(const std::string& in, const std::string& out) {
  const data::Dataset ds = data::load_dataset(in);
  data::export_csv(ds, out);
  std::cout << fmt::format("wrote {} rows to {}, digest {}\n", ds.records.size(), out,
                           hex64(data::records_digest(ds.records)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("cirforge"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Ray-traced CIR datasets and neural channel models"};
  app.require_subcommand(1, 1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings only");

  std::string scene_name;
  auto* sv = app.add_subcommand("scene-validate", "check scene invariants and probe path statistics");
  sv->add_option("scene", scene_name, "scene preset or JSON file")->required();

  GenerateArgs ga;
  auto* dg = app.add_subcommand("dataset-generate", "ray trace a (position, CIR) dataset");
  dg->add_option("--scene", ga.scene, "scene preset or JSON file")->capture_default_str();
  dg->add_option("--density", ga.density, "samples per square meter")->required()->check(CLI::PositiveNumber);
  dg->add_option("--seed", ga.seed, "random seed")->required();
  dg->add_option("--out", ga.out, "output .cirds file")->required();
  dg->add_option("--region", ga.region, "xmin,ymin,xmax,ymax (default: scene UE region)");
  dg->add_option("--window", ga.window, "auto or fixed (220-310 ns)")->capture_default_str();
  dg->add_option("--split", ga.split, "training fraction")->capture_default_str();
  dg->add_option("--noise", ga.noise_kind, "none, cir_gaussian, cir_alpha_stable or position_gaussian")
      ->capture_default_str();
  dg->add_option("--noise-target", ga.noise_target, "target NMSE for cir_gaussian");
  dg->add_option("--noise-alpha", ga.noise_alpha, "stability index for cir_alpha_stable")->capture_default_str();
  dg->add_option("--noise-scale", ga.noise_scale, "dispersion for cir_alpha_stable")->capture_default_str();
  dg->add_option("--noise-sigma", ga.noise_sigma, "position noise std per axis (m)")->capture_default_str();

  std::string model_name, data_path, config_path, out_dir;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> steps;
  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  tr->add_option("--model", model_name, "model preset or spec JSON")->required();
  tr->add_option("--data", data_path, ".cirds dataset")->required();
  tr->add_option("--config", config_path, "training config JSON (steps, batch_size, lr, eval_every)");
  tr->add_option("--out", out_dir, "output directory")->required();
  tr->add_option("--seed", seed, "random seed")->required();
  tr->add_option("--steps", steps, "override the configured step count");

  std::string ckpt;
  auto* ev = app.add_subcommand("eval", "test NMSE of a checkpoint on a dataset");
  ev->add_option("--model-ckpt", ckpt, "checkpoint file")->required();
  ev->add_option("--data", data_path, ".cirds dataset")->required();

  double tol = 1e-4;
  double step = 1e-6;
  std::size_t max_per_tensor = 64;
  auto* gc = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  gc->add_option("--model", model_name, "model preset or spec JSON")->required();
  gc->add_option("--tol", tol, "max relative error")->capture_default_str();
  gc->add_option("--step", step, "central difference step")->capture_default_str();
  gc->add_option("--seed", seed, "random seed")->capture_default_str();
  gc->add_option("--max-per-tensor", max_per_tensor, "elements checked per tensor (0 = all)")->capture_default_str();

  std::string preset_name;
  std::vector<std::string> overrides;
  bool paper_scale = false;
  auto* pr = app.add_subcommand("preset", "run a preset experiment");
  pr->add_option("name", preset_name, "preset name")->required()->check(CLI::IsMember(exp::preset_names()));
  pr->add_option("overrides", overrides, "key=value overrides");
  pr->add_flag("--paper-scale", paper_scale, "full-size settings (2e5 steps, densities 40/60/100)");
  pr->add_option("--out", out_dir, "output directory (default runs/<preset>/<UTC timestamp>)");
  pr->add_option("--seed", seed, "random seed")->capture_default_str();

  std::string in_path, out_path;
  auto* ex = app.add_subcommand("export-csv", "convert a .cirds dataset to CSV");
  ex->add_option("--in", in_path, ".cirds dataset")->required();
  ex->add_option("--out", out_path, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);
  if (quiet) spdlog::set_level(spdlog::level::warn);
  spdlog::debug("{} worker threads", worker_count());

  try {
    if (*sv) return scene_validate(scene_name);
    if (*dg) return dataset_generate(ga);
    if (*tr) return train_verb(model_name, data_path, config_path, out_dir, seed, steps);
    if (*ev) return eval_verb(ckpt, data_path);
    if (*gc) return gradcheck_verb(model_name, tol, step, seed, max_per_tensor);
    if (*pr) return preset_verb(preset_name, overrides, paper_scale, out_dir, seed);
    if (*ex) return export_csv_verb(in_path, out_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  } catch (const data::CorruptFileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  return kUsage;
}
