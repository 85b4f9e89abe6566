#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "numeric/tensor.hpp"
#include "preservation/preservation.hpp"
#include "prototype/model.hpp"

namespace princ {

inline constexpr std::uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Binary layout, all integers little-endian, floats IEEE-754 binary64:
//   "PRINC1\0\0"  u32 version  u32 tensor_count
//   per tensor: u32 name_len, name, u32 rank, u64 dims[rank], f64 data[]
//   vocab:      u32 count, per token u32 len + bytes (id order)
//   prototypes: u32 count, per entry u32 len + intent + u8 stage
//   u8 flag [snapshot: u32 count + tensors as above]
//   u8 flag [memory: u32 capacity, u32 count, per item
//            u32 len + text, u32 len + label, u64 index, u32 n, f64 soft[n]]
//   u8 flag [config: u32 len + UTF-8 JSON]
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  NamedTensors tensors;
  std::vector<std::string> vocab;
  std::vector<std::pair<std::string, Stage>> prototype_tags;
  std::optional<NamedTensors> snapshot;
  std::optional<ReplayMemory> memory;
  std::optional<std::string> config;

  bool operator==(const Checkpoint& other) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

// Model parameters followed by prototypes ("prototype/<intent>").
Checkpoint make_checkpoint(const IntentModel& model);
// Rebuilds a model; the encoder kind is inferred from the tensors present.
IntentModel model_from_checkpoint(const Checkpoint& ckpt, std::shared_ptr<const EmbeddingTable> embeddings = nullptr);

NamedTensors to_named(const ParameterSnapshot& s);
ParameterSnapshot snapshot_from(const NamedTensors& t);

}  // namespace princ
