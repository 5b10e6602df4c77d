// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowhigh/checkpoint.hpp"
#include "flowhigh/config.hpp"
#include "flowhigh/metrics.hpp"

namespace flowhigh {

namespace fs = std::filesystem;

// ---- corpus ----

struct CorpusManifest {
  fs::path all, train, eval;  // manifest files, one wav path per line
  std::vector<fs::path> train_files, eval_files;
};

// Seeded harmonic "speech-like" utterance at cfg.sample_rate. Every utterance
// carries more than 1% of its energy above the highest configured low-rate
// Nyquist frequency.
AudioSignal synth_utterance(const RunConfig& cfg, int index);

// Fraction of spectral energy above cutoff_hz.
double high_band_energy_ratio(const AudioSignal& signal, double cutoff_hz, const StftConfig& cfg);

CorpusManifest synth_corpus(const RunConfig& cfg, const fs::path& out_dir);

std::vector<fs::path> read_manifest(const fs::path& manifest);

// ---- paired features ----

enum class PrepareMode { kTrain, kEval };

struct FeatureRecord {
  std::string id;
  fs::path x0;  // mel of x_h (FHSP)
  fs::path x1;  // mel of y_h (FHSP)
  int low_rate = 0;
  int order = 0;
  double ripple_db = 0.0;
  fs::path source;
};

// Training mode draws (order, ripple, low rate) per utterance from the
// configured ranges; evaluation mode uses the fixed evaluation filter and
// writes one pair per configured evaluation rate. Unreadable inputs are
// skipped with a warning on `log`; an empty result is a DataError.
std::vector<FeatureRecord> prepare_features(const RunConfig& cfg, const fs::path& manifest, const fs::path& out_dir,
                                            PrepareMode mode, std::ostream* log = nullptr);

std::vector<FeatureRecord> read_feature_index(const fs::path& dir);

// ---- training ----

struct TrainOptions {
  fs::path features_dir;
  fs::path checkpoint_out;
  std::optional<fs::path> resume;
  std::optional<fs::path> loss_log;  // CSV "step,loss"
  std::function<void(int step, double loss)> on_step;
};

struct TrainResult {
  std::vector<double> losses;  // one per step actually run
  int first_step = 1;
  Checkpoint checkpoint;
  double max_abs_activation = 0.0;
};

TrainResult train(const RunConfig& cfg, const TrainOptions& opts);

// Same loop on in-memory pairs (x0 = mel of x_h, x1 = mel of y_h).
TrainResult train_on_pairs(const RunConfig& cfg, const std::vector<ConditionPair<float>>& pairs,
                           std::optional<Checkpoint> resume = std::nullopt,
                           const std::function<void(int, double)>& on_step = {});

// ---- inference ----

struct InferResult {
  AudioSignal output;        // final waveform at cfg.sample_rate
  SuperResolution detail;
  double seconds = 0.0;
};

InferResult infer_signal(const RunConfig& cfg, const Checkpoint& ckpt, const AudioSignal& x_l,
                         const SolverConfig& solver, bool postproc);

// ---- evaluation ----

struct EvalRow {
  std::string utterance;  // "<system>:<input rate>:<utterance>" or "mean:<system>:<input rate>"
  LsdReport report;
  double rtf = 0.0;
  std::uint64_t forward_calls = 0;
};

struct EvalOptions {
  bool ablate_postproc = false;
};

std::vector<EvalRow> evaluate(const RunConfig& cfg, const Checkpoint& ckpt, const std::vector<fs::path>& eval_files,
                              const EvalOptions& opts = {});

// CSV: utterance,lsd,lsd_lf,lsd_hf,rtf
std::string eval_csv(const std::vector<EvalRow>& rows);

struct BenchRow {
  SolverMethod method = SolverMethod::kEuler;
  int nfe = 1;
  std::uint64_t forward_calls = 0;  // per utterance, as counted
  double rtf = 0.0;
  double lsd = 0.0;
};

std::vector<BenchRow> bench(const RunConfig& cfg, const Checkpoint& ckpt, const std::vector<fs::path>& eval_files,
                            const std::vector<int>& nfe_list);

// CSV: method,nfe,forward_calls,rtf,lsd
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace flowhigh
