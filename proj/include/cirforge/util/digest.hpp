#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace cirforge {

// 64-bit FNV-1a. Used for scene/spec digests and file checksums, not security.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size);
  void update(std::string_view s) { update(s.data(), s.size()); }
  void update(std::span<const double> values) { update(values.data(), values.size_bytes()); }
  template <typename T>
  void update_pod(const T& v) {
    update(&v, sizeof(T));
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);
std::uint64_t file_digest(const std::string& path);

}  // namespace cirforge
