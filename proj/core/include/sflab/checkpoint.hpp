#pragma once

// Versioned binary parameter checkpoints.
//
// Layout (all integers little-endian):
//   bytes 0..7   magic "SFLABCKP"
//   u32          format version (1)
//   u32          metadata entry count M
//   M x { u32 key length, key bytes, u32 value length, value bytes }
//   u32          tensor count N
//   N x { u32 name length, name bytes, u32 rows, u32 cols,
//         rows*cols IEEE-754 float64 values in row-major order }

#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "sflab/numnet.hpp"

namespace sflab::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  Matrix value;
};

struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::vector<CheckpointTensor> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(std::span<const Parameter* const> params,
                           std::map<std::string, std::string> metadata = {});
/// Loads tensors by name into `params`; names and shapes must match exactly.
void restore_checkpoint(const Checkpoint& checkpoint, std::span<Parameter* const> params);

}  // namespace sflab::nn
