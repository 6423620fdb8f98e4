#include "cirforge/data/noise.hpp"

#include <cmath>
#include <numbers>

namespace cirforge::data {

namespace {
constexpr std::uint64_t kNoiseStream = 0x6e6f69736500ULL;  // "noise"
}

double sample_alpha_stable(double alpha, double scale, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DatasetError("alpha-stable: alpha must lie in (0, 2]");
  if (!(scale > 0.0)) throw DatasetError("alpha-stable: scale must be > 0");
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double v = rng.uniform(-half_pi, half_pi);
  const double w = rng.exponential();
  double x;
  if (alpha == 1.0) {
    x = std::tan(v);
  } else {
    const double cos_v = std::cos(v);
    x = std::sin(alpha * v) / std::pow(cos_v, 1.0 / alpha) *
        std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
  }
  return scale * x;
}

void validate_noise(const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseKind::none:
      return;
    case NoiseKind::cir_gaussian:
      if (!spec.target_nmse) throw DatasetError("cir_gaussian noise needs target_nmse");
      if (!(*spec.target_nmse >= 0.0)) throw DatasetError("target_nmse must be >= 0");
      return;
    case NoiseKind::cir_alpha_stable:
      if (spec.target_nmse) {
        throw DatasetError("alpha-stable noise is parameterized by its dispersion scale; target_nmse is undefined");
      }
      if (!(spec.alpha > 0.0 && spec.alpha <= 2.0)) throw DatasetError("alpha must lie in (0, 2]");
      if (!(spec.dispersion_scale >= 0.0)) throw DatasetError("alpha-stable scale must be >= 0");
      return;
    case NoiseKind::position_gaussian:
      if (!(spec.sigma_m >= 0.0)) throw DatasetError("sigma_m must be >= 0");
      return;
  }
}

NoiseReport inject_noise(std::span<SampleRecord> records, const NoiseSpec& spec, std::uint64_t seed) {
  validate_noise(spec);
  NoiseReport report;
  if (spec.kind == NoiseKind::none) return report;

  if (spec.kind == NoiseKind::position_gaussian) {
    double total = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      Rng rng = Rng::stream(seed ^ kNoiseStream, i);
      const rt::Vec3 d{spec.sigma_m * rng.normal(), spec.sigma_m * rng.normal(), spec.sigma_m * rng.normal()};
      records[i].position_noisy = records[i].position + d;
      total += rt::norm(d);
    }
    if (!records.empty()) report.mean_displacement_m = total / static_cast<double>(records.size());
    return report;
  }

  double signal = 0.0;
  std::size_t entries = 0;
  for (const auto& r : records) {
    for (double v : r.cir) signal += v * v;
    entries += r.cir.size();
  }
  double sigma = 0.0;
  if (spec.kind == NoiseKind::cir_gaussian && entries > 0) {
    sigma = std::sqrt(*spec.target_nmse * signal / static_cast<double>(entries));
  }

  double noise_energy = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    Rng rng = Rng::stream(seed ^ kNoiseStream, i);
    std::vector<double> noisy = records[i].cir;
    for (double& v : noisy) {
      double n = 0.0;
      if (spec.kind == NoiseKind::cir_gaussian) {
        n = sigma * rng.normal();
      } else if (spec.dispersion_scale > 0.0) {
        n = sample_alpha_stable(spec.alpha, spec.dispersion_scale, rng);
      }
      noise_energy += n * n;
      v += n;
    }
    records[i].cir_noisy = std::move(noisy);
  }
  report.realized_nmse = signal > 0.0 ? noise_energy / signal : 0.0;
  return report;
}

NoiseReport inject_noise(Dataset& dataset, const NoiseSpec& spec, std::uint64_t seed) {
  NoiseReport report = inject_noise(std::span<SampleRecord>(dataset.records), spec, seed);
  dataset.meta.noise = spec;
  dataset.meta.realized_noise_nmse = report.realized_nmse;
  return report;
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none:
      return "none";
    case NoiseKind::cir_gaussian:
      return "cir_gaussian";
    case NoiseKind::cir_alpha_stable:
      return "cir_alpha_stable";
    case NoiseKind::position_gaussian:
      return "position_gaussian";
  }
  return "none";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "cir_gaussian") return NoiseKind::cir_gaussian;
  if (s == "cir_alpha_stable") return NoiseKind::cir_alpha_stable;
  if (s == "position_gaussian") return NoiseKind::position_gaussian;
  throw DatasetError("unknown noise.kind '" + s + "'");
}

NoiseSpec noise_from_json(const nlohmann::json& j) {
  NoiseSpec spec;
  spec.kind = noise_kind_from_string(j.value("kind", std::string("none")));
  if (j.contains("target_nmse")) spec.target_nmse = j.at("target_nmse").get<double>();
  spec.alpha = j.value("alpha", 2.0);
  spec.dispersion_scale = j.value("scale", 0.0);
  spec.sigma_m = j.value("sigma_m", 0.03);
  validate_noise(spec);
  return spec;
}

nlohmann::json noise_to_json(const NoiseSpec& spec) {
  nlohmann::json j{{"kind", to_string(spec.kind)}};
  if (spec.target_nmse) j["target_nmse"] = *spec.target_nmse;
  if (spec.kind == NoiseKind::cir_alpha_stable) {
    j["alpha"] = spec.alpha;
    j["scale"] = spec.dispersion_scale;
  }
  if (spec.kind == NoiseKind::position_gaussian) j["sigma_m"] = spec.sigma_m;
  return j;
}

}  // namespace cirforge::data
