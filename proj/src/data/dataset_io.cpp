#include "cirforge/data/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "cirforge/util/digest.hpp"

namespace cirforge::data {

namespace {

constexpr char kMagic[8] = {'C', 'I', 'R', 'D', 'S', '\0', '\r', '\n'};
constexpr std::uint32_t kFlagCirNoisy = 1u;
constexpr std::uint32_t kFlagPositionNoisy = 2u;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void vec3(const rt::Vec3& p) {
    f64(p.x);
    f64(p.y);
    f64(p.z);
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, std::string origin) : data_(data), origin_(std::move(origin)) {}

  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n) {
      throw CorruptFileError(origin_, pos_, fmt::format("truncated while reading {} ({} byte(s) needed, {} left)",
                                                        what, n, data_.size() - pos_));
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  rt::Vec3 vec3(const char* what) {
    const double x = f64(what), y = f64(what), z = f64(what);
    return {x, y, z};
  }
  std::size_t pos() const { return pos_; }
  [[noreturn]] void fail(std::size_t at, const std::string& what) const { throw CorruptFileError(origin_, at, what); }

 private:
  std::span<const std::uint8_t> data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

CorruptFileError::CorruptFileError(const std::string& path, std::uint64_t offset, const std::string& what)
    : DatasetError(fmt::format("{}: corrupt dataset at byte offset {}: {}", path, offset, what)), offset_(offset) {}

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  const std::size_t width = ds.meta.label_width();
  std::uint32_t flags = 0;
  if (!ds.records.empty()) {
    if (ds.records.front().cir_noisy) flags |= kFlagCirNoisy;
    if (ds.records.front().position_noisy) flags |= kFlagPositionNoisy;
  }
  for (const auto& r : ds.records) {
    if (r.cir.size() != width) throw DatasetError("encode_dataset: record CIR length does not match metadata");
    if (static_cast<bool>(r.cir_noisy) != static_cast<bool>(flags & kFlagCirNoisy) ||
        static_cast<bool>(r.position_noisy) != static_cast<bool>(flags & kFlagPositionNoisy)) {
      throw DatasetError("encode_dataset: noisy fields must be present on all records or none");
    }
  }

  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCirdsVersion);
  w.u32(flags);
  w.u64(ds.meta.q);
  w.u64(ds.meta.antennas);
  w.u64(ds.records.size());
  w.u64(ds.n_train);
  w.u64(ds.meta.seed);
  w.f64(ds.meta.scale_factor);
  w.f64(ds.meta.density);
  w.f64(ds.meta.split_fraction);
  w.u64(ds.meta.scene_hash);
  w.f64(ds.meta.window.start_s);
  w.f64(ds.meta.window.end_s);
  w.f64(ds.meta.window.dt_s);
  w.vec3(ds.meta.region.min);
  w.vec3(ds.meta.region.max);
  const NoiseSpec& n = ds.meta.noise;
  w.u32(static_cast<std::uint32_t>(n.kind));
  w.u32(n.target_nmse ? 1u : 0u);
  w.f64(n.target_nmse.value_or(0.0));
  w.f64(n.alpha);
  w.f64(n.dispersion_scale);
  w.f64(n.sigma_m);
  w.f64(ds.meta.realized_noise_nmse);

  for (const auto& r : ds.records) {
    w.vec3(r.position);
    for (double v : r.cir) w.f64(v);
    if (r.cir_noisy) {
      for (double v : *r.cir_noisy) w.f64(v);
    }
    if (r.position_noisy) w.vec3(*r.position_noisy);
  }
  Fnv1a h;
  h.update(w.buffer().data(), w.buffer().size());
  w.u64(h.value());
  return std::move(w.buffer());
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes, const std::string& origin) {
  Reader r(bytes, origin);
  r.need(sizeof kMagic, "magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) r.fail(0, "bad magic, not a .cirds file");
  (void)r.u64("magic");
  const std::size_t version_at = r.pos();
  const std::uint32_t version = r.u32("version");
  if (version != kCirdsVersion) r.fail(version_at, fmt::format("unsupported version {}", version));
  const std::size_t flags_at = r.pos();
  const std::uint32_t flags = r.u32("flags");
  if (flags & ~(kFlagCirNoisy | kFlagPositionNoisy)) r.fail(flags_at, fmt::format("unknown flags 0x{:x}", flags));

  Dataset ds;
  ds.meta.q = r.u64("q");
  ds.meta.antennas = r.u64("antenna count");
  const std::size_t count_at = r.pos();
  const std::uint64_t count = r.u64("record count");
  const std::size_t n_train_at = r.pos();
  ds.n_train = r.u64("train count");
  ds.meta.seed = r.u64("seed");
  ds.meta.scale_factor = r.f64("scale factor");
  ds.meta.density = r.f64("density");
  ds.meta.split_fraction = r.f64("split fraction");
  ds.meta.scene_hash = r.u64("scene hash");
  ds.meta.window.start_s = r.f64("window start");
  ds.meta.window.end_s = r.f64("window end");
  ds.meta.window.dt_s = r.f64("window dt");
  ds.meta.region.min = r.vec3("region");
  ds.meta.region.max = r.vec3("region");
  const std::size_t kind_at = r.pos();
  const std::uint32_t kind = r.u32("noise kind");
  if (kind > static_cast<std::uint32_t>(NoiseKind::position_gaussian)) {
    r.fail(kind_at, fmt::format("unknown noise kind {}", kind));
  }
  ds.meta.noise.kind = static_cast<NoiseKind>(kind);
  const bool has_target = r.u32("noise target flag") != 0;
  const double target = r.f64("noise target");
  if (has_target) ds.meta.noise.target_nmse = target;
  ds.meta.noise.alpha = r.f64("noise alpha");
  ds.meta.noise.dispersion_scale = r.f64("noise scale");
  ds.meta.noise.sigma_m = r.f64("noise sigma");
  ds.meta.realized_noise_nmse = r.f64("realized noise");

  if (ds.n_train > count) r.fail(n_train_at, "train count exceeds record count");
  const std::size_t width = ds.meta.label_width();
  std::size_t per_record = 3 + width;
  if (flags & kFlagCirNoisy) per_record += width;
  if (flags & kFlagPositionNoisy) per_record += 3;
  const std::size_t remaining = bytes.size() - r.pos();
  if (remaining < 8 || (remaining - 8) / 8 / per_record < count) {
    r.fail(count_at, fmt::format("header declares {} record(s) but the file is too short", count));
  }

  ds.records.resize(count);
  for (auto& rec : ds.records) {
    rec.position = r.vec3("record position");
    rec.cir.resize(width);
    for (double& v : rec.cir) v = r.f64("record CIR");
    if (flags & kFlagCirNoisy) {
      rec.cir_noisy.emplace(width);
      for (double& v : *rec.cir_noisy) v = r.f64("record noisy CIR");
    }
    if (flags & kFlagPositionNoisy) rec.position_noisy = r.vec3("record noisy position");
  }
  const std::size_t trailer_at = r.pos();
  Fnv1a h;
  h.update(bytes.data(), trailer_at);
  const std::uint64_t stored = r.u64("checksum");
  if (stored != h.value()) {
    r.fail(trailer_at, fmt::format("checksum mismatch (stored {}, computed {})", hex64(stored), hex64(h.value())));
  }
  if (r.pos() != bytes.size()) r.fail(r.pos(), "trailing bytes after checksum");
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  const auto bytes = encode_dataset(dataset);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DatasetError("write failed for '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_dataset(bytes, path);
}

std::uint64_t records_digest(std::span<const SampleRecord> records) {
  Fnv1a h;
  for (const auto& r : records) {
    const auto p = r.position.to_array();
    h.update(std::span<const double>(p));
    h.update(std::span<const double>(r.cir));
  }
  return h.value();
}

void export_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DatasetError("cannot open '" + path + "' for writing");
  const std::size_t width = dataset.meta.label_width();
  std::string line = "x,y,z";
  for (std::size_t k = 1; k <= width / 2; ++k) line += fmt::format(",re_{},im_{}", k, k);
  out << line << '\n';
  for (const auto& r : dataset.records) {
    line = fmt::format("{:.17g},{:.17g},{:.17g}", r.position.x, r.position.y, r.position.z);
    for (double v : r.cir) line += fmt::format(",{:.17g}", v);
    out << line << '\n';
  }
  if (!out) throw DatasetError("write failed for '" + path + "'");
}

std::vector<SampleRecord> import_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DatasetError(path + ": empty CSV");
  std::size_t columns = 1;
  for (char c : line) columns += (c == ',');
  if (columns < 3 || line.rfind("x,y,z", 0) != 0 || (columns - 3) % 2 != 0) {
    throw DatasetError(path + ": header must be x,y,z,re_1,im_1,...");
  }
  std::vector<SampleRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> values;
    values.reserve(columns);
    const char* p = line.c_str();
    while (true) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw DatasetError(fmt::format("{}:{}: malformed number", path, line_no));
      values.push_back(v);
      if (*end == ',') {
        p = end + 1;
      } else if (*end == '\0' || *end == '\r') {
        break;
      } else {
        throw DatasetError(fmt::format("{}:{}: unexpected character '{}'", path, line_no, *end));
      }
    }
    if (values.size() != columns) {
      throw DatasetError(fmt::format("{}:{}: expected {} column(s), found {}", path, line_no, columns, values.size()));
    }
    SampleRecord rec;
    rec.position = {values[0], values[1], values[2]};
    rec.cir.assign(values.begin() + 3, values.end());
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace cirforge::data
