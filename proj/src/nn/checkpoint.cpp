#include "cirforge/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "cirforge/util/digest.hpp"

namespace cirforge::nn {

namespace {

constexpr char kMagic[8] = {'C', 'I', 'R', 'C', 'K', 'P', 'T', '\0'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u64(out, s.size());
  out.insert(out.end(), s.begin(), s.end());
}
void put_doubles(std::vector<std::uint8_t>& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  for (double d : v) put_f64(out, d);
}

class Cursor {
 public:
  Cursor(const std::vector<std::uint8_t>& b, const std::string& path) : b_(b), path_(path) {}
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string str(const char* what) {
    const std::uint64_t n = u64(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles(const char* what) {
    const std::uint64_t n = u64(what);
    if (n > (b_.size() - pos_) / 8) fail(what);
    std::vector<double> v(n);
    for (double& d : v) d = f64(what);
    return v;
  }
  std::size_t pos() const { return pos_; }
  [[noreturn]] void fail(const std::string& what) const {
    throw NnError(fmt::format("{}: corrupt checkpoint at byte offset {}: {}", path_, pos_, what));
  }

 private:
  void need(std::uint64_t n, const char* what) const {
    if (b_.size() - pos_ < n) fail(fmt::format("truncated while reading {}", what));
  }
  const std::vector<std::uint8_t>& b_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint make_checkpoint(const ParamStore& params, const std::string& spec_json, std::uint64_t spec_digest,
                           const AdamState* adam, std::uint64_t train_step) {
  Checkpoint c;
  c.spec_json = spec_json;
  c.spec_digest = spec_digest;
  c.train_step = train_step;
  for (const auto& t : params.tensors()) {
    const auto v = params.values().subspan(t.offset, t.size);
    c.tensors.push_back({t.name, t.shape, std::vector<double>(v.begin(), v.end())});
  }
  if (adam) c.adam = *adam;
  return c;
}

void restore_params(const Checkpoint& ckpt, ParamStore& params) {
  if (ckpt.tensors.size() != params.tensors().size()) {
    throw NnError(fmt::format("checkpoint has {} tensor(s), model has {}", ckpt.tensors.size(),
                              params.tensors().size()));
  }
  for (const auto& t : ckpt.tensors) {
    const TensorInfo& info = params.info(t.name);
    if (info.shape != t.shape || t.data.size() != info.size) {
      throw NnError("checkpoint tensor '" + t.name + "' has a different shape than the model");
    }
    std::copy(t.data.begin(), t.data.end(), params.values().begin() + static_cast<std::ptrdiff_t>(info.offset));
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::vector<std::uint8_t> out(kMagic, kMagic + sizeof kMagic);
  put_u64(out, kCheckpointVersion);
  put_u64(out, ckpt.spec_digest);
  put_str(out, ckpt.spec_json);
  put_u64(out, ckpt.train_step);
  put_u64(out, ckpt.tensors.size());
  for (const auto& t : ckpt.tensors) {
    put_str(out, t.name);
    put_u64(out, t.shape.size());
    for (std::size_t d : t.shape) put_u64(out, d);
    put_doubles(out, t.data);
  }
  put_u64(out, ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    const AdamState& a = *ckpt.adam;
    put_f64(out, a.config.lr);
    put_f64(out, a.config.beta1);
    put_f64(out, a.config.beta2);
    put_f64(out, a.config.epsilon);
    put_u64(out, a.step);
    put_doubles(out, a.m);
    put_doubles(out, a.v);
  }
  Fnv1a h;
  h.update(out.data(), out.size());
  put_u64(out, h.value());

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw NnError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw NnError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw NnError("cannot open '" + path + "'");
  const std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Cursor c(b, path);
  if (b.size() < sizeof kMagic + 8 || std::memcmp(b.data(), kMagic, sizeof kMagic) != 0) {
    c.fail("bad magic, not a checkpoint");
  }
  Fnv1a h;
  h.update(b.data(), b.size() - 8);
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(b[b.size() - 8 + i]) << (8 * i);
  if (stored != h.value()) c.fail("checksum mismatch");

  (void)c.u64("magic");
  const std::uint64_t version = c.u64("version");
  if (version != kCheckpointVersion) c.fail(fmt::format("unsupported version {}", version));
  Checkpoint ckpt;
  ckpt.spec_digest = c.u64("spec digest");
  ckpt.spec_json = c.str("spec");
  ckpt.train_step = c.u64("train step");
  const std::uint64_t n = c.u64("tensor count");
  for (std::uint64_t i = 0; i < n; ++i) {
    NamedTensor t;
    t.name = c.str("tensor name");
    const std::uint64_t rank = c.u64("tensor rank");
    if (rank > 8) c.fail("implausible tensor rank");
    for (std::uint64_t d = 0; d < rank; ++d) t.shape.push_back(c.u64("tensor shape"));
    t.data = c.doubles("tensor values");
    if (t.data.size() != shape_size(t.shape)) c.fail("tensor '" + t.name + "' size does not match its shape");
    ckpt.tensors.push_back(std::move(t));
  }
  if (c.u64("adam flag") != 0) {
    AdamState a;
    a.config.lr = c.f64("adam lr");
    a.config.beta1 = c.f64("adam beta1");
    a.config.beta2 = c.f64("adam beta2");
    a.config.epsilon = c.f64("adam epsilon");
    a.step = c.u64("adam step");
    a.m = c.doubles("adam m");
    a.v = c.doubles("adam v");
    ckpt.adam = std::move(a);
  }
  if (c.pos() + 8 != b.size()) c.fail("unexpected bytes before the checksum");
  return ckpt;
}

}  // namespace cirforge::nn
