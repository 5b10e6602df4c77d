// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>

#include "flowhigh/cfm.hpp"
#include "flowhigh/estimator.hpp"

namespace flowhigh {

struct Checkpoint {
  EstimatorParams<float> params;
  PathKind kind = PathKind::kDataPrior;
  PathParams path;
  std::optional<AdamState<float>> adam;
};

// Binary layout: "FHCK", version u32, config block (7 x u32), path kind u32,
// sigma_min f64, tensor count u32, tensors (name length u32 + bytes, rank u32,
// dims u32..., f32 data), then an Adam flag u32 optionally followed by the
// step u64 and both moment tensor sets. Everything little-endian.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Throws FormatError for bad magic, unknown versions and truncation, and
// ConfigError when `expected` is given and does not match the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path, const EstimatorConfig* expected = nullptr);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const EstimatorConfig* expected = nullptr);

}  // namespace flowhigh
