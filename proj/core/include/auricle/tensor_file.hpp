#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "auricle/tensor.hpp"

namespace auricle {

// On-disk container for named float32 tensors plus a free-form config text
// block. Used for checkpoints and feature dumps.
//
// Layout, all integers 4-byte little-endian:
//   "COLA" | version | config length | config bytes
//   | tensor count | per tensor: name length, name bytes, rank, dims..., f32 data
//
// Writes go to a temp file in the same directory and are renamed into place.
// Loads reject anything malformed with the byte offset of the failure and
// never modify the file.

inline constexpr std::uint32_t kTensorFileVersion = 1;

struct TensorFile {
    std::string config_text;
    std::vector<std::pair<std::string, Tensor>> tensors;
};

void save_tensor_file(const std::string& path, const TensorFile& file);
TensorFile load_tensor_file(const std::string& path);

}  // namespace auricle
