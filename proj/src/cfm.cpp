// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/cfm.hpp"

namespace flowhigh {

std::string_view path_kind_name(PathKind kind) {
  switch (kind) {
    case PathKind::kStandardGaussianPrior: return "standard";
    case PathKind::kConstantSigma: return "constant-sigma";
    case PathKind::kDataPrior: return "data-prior";
  }
  return "unknown";
}

PathKind parse_path_kind(std::string_view name) {
  if (name == "standard") return PathKind::kStandardGaussianPrior;
  if (name == "constant-sigma") return PathKind::kConstantSigma;
  if (name == "data-prior") return PathKind::kDataPrior;
  throw ConfigError("unknown path kind '" + std::string(name) + "' (expected standard|constant-sigma|data-prior)");
}

}  // namespace flowhigh
