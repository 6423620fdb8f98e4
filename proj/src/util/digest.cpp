#include "cirforge/util/digest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace cirforge {

void Fnv1a::update(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= p[i];
    state_ *= 0x100000001B3ULL;
  }
}

std::uint64_t fnv1a(std::string_view s) {
  Fnv1a h;
  h.update(s);
  return h.value();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  Fnv1a h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.value();
}

}  // namespace cirforge
