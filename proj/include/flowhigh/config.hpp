// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowhigh/cfm.hpp"
#include "flowhigh/estimator.hpp"
#include "flowhigh/frontend.hpp"
#include "flowhigh/resample.hpp"
#include "flowhigh/sampler.hpp"

namespace flowhigh {

struct DegradationConfig {
  int order_min = 2;
  int order_max = 10;
  double ripple_min_db = 0.01;
  double ripple_max_db = 1.0;
  int eval_order = 8;
  double eval_ripple_db = 0.05;
  PhaseMode phase = PhaseMode::kCausal;

  bool operator==(const DegradationConfig&) const = default;
};

struct TrainConfig {
  int batch = 16;
  int steps = 2000;
  int crop_frames = 64;
  int checkpoint_every = 500;
  int threads = 1;

  bool operator==(const TrainConfig&) const = default;
};

struct CorpusConfig {
  int utterances = 200;
  double duration_s = 2.0;
  double eval_fraction = 0.2;

  bool operator==(const CorpusConfig&) const = default;
};

// Everything a run needs. Serialised as flat "key = value" text.
struct RunConfig {
  int sample_rate = 16000;
  std::vector<int> train_rates{4000, 8000};
  std::vector<int> eval_rates{4000, 8000};
  StftConfig stft;
  MelConfig mel;
  PathKind path = PathKind::kDataPrior;
  PathParams path_params;
  EstimatorConfig model;
  AdamConfig adam{.lr = 5e-4};  // desk scale; the optimizer default is 3e-4
  TrainConfig train;
  SolverConfig solver;
  DegradationConfig degrade;
  CorpusConfig corpus;
  int postproc_crossfade_bins = 0;
  std::vector<int> bench_nfe{1, 2, 4, 8};
  int bench_repeats = 3;  // timing per utterance is the fastest of this many runs
  int threads = 1;
  std::uint64_t seed = 1234;

  // Throws ConfigError on inconsistent values.
  void validate() const;
  bool operator==(const RunConfig&) const = default;

  EstimatorConfig estimator_config() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);

// Applies one "key = value" assignment.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);
std::vector<std::string> config_keys();

}  // namespace flowhigh
