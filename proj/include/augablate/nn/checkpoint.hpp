#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "augablate/core/tensor.hpp"

namespace augb {

// Checkpoint container: magic "AUGB", then u32 version, u32 tensor count;
// per tensor a u32 name length + UTF-8 name, u32 rank, u64 extents, and the
// raw float32 payload. All integers and floats little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor<float>*>>& tensors);

std::map<std::string, Tensor<float>> load_checkpoint(const std::string& path);

}  // namespace augb
