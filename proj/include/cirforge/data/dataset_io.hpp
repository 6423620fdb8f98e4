#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cirforge/data/dataset.hpp"

namespace cirforge::data {

// Raised for truncated, corrupt or foreign files. offset() is the byte offset
// at which decoding stopped.
class CorruptFileError : public DatasetError {
 public:
  CorruptFileError(const std::string& path, std::uint64_t offset, const std::string& what);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

inline constexpr std::uint32_t kCirdsVersion = 1;

// Binary .cirds layout (all fields little-endian):
//   magic "CIRDS\0\r\n", u32 version, fixed header, records, u64 FNV-1a trailer
//   over every preceding byte.
std::vector<std::uint8_t> encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

// Digest over positions and clean CIRs only, in record order. Stable across
// the binary and CSV representations.
std::uint64_t records_digest(std::span<const SampleRecord> records);

// CSV with header x,y,z,re_1,im_1,...; one row per record, clean labels,
// printed with 17 significant digits so a re-import is exact.
void export_csv(const Dataset& dataset, const std::string& path);
std::vector<SampleRecord> import_csv(const std::string& path);

}  // namespace cirforge::data
