#pragma once

#include <string>
#include <vector>

#include "params.hpp"

#include "json.hpp"

namespace tag {

// Single-file format: a magic line, a one-line JSON manifest
// ({version, meta, tensors: [{name, shape, dtype, offset}]}), then raw
// little-endian float64 payloads at the stated offsets.
void save_checkpoint(const std::string& path, const ParamStore& params, const nlohmann::json& meta);

struct CheckpointData {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

// Rejects unknown versions and malformed payloads.
CheckpointData load_checkpoint(const std::string& path);

// Copies loaded values into an existing store; names and shapes must match
// exactly in both directions.
void restore_params(ParamStore& params, const CheckpointData& ckpt);

}  // namespace tag
