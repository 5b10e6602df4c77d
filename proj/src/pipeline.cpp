// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "flowhigh/postproc.hpp"
#include "flowhigh/resample.hpp"
#include "parallel.hpp"

namespace flowhigh {
namespace {

// Stream tags keep the seeded generators of different stages independent.
constexpr std::uint64_t kCorpusStream = 0x636f72;
constexpr std::uint64_t kPrepareStream = 0x707265;
constexpr std::uint64_t kTrainStream = 0x747261;
constexpr std::uint64_t kInitStream = 0x696e69;
constexpr std::uint64_t kEvalStream = 0x657661;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return stream_rng(seed, stream, index)();
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_lines(const fs::path& path, const std::vector<fs::path>& lines) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l.string() << "\n";
}

int max_low_rate(const RunConfig& cfg) {
  int m = 0;
  for (int r : cfg.train_rates) m = std::max(m, r);
  for (int r : cfg.eval_rates) m = std::max(m, r);
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

MatrixRM<float> crop_rows(const MatrixRM<float>& m, Eigen::Index start, Eigen::Index len) {
  return m.middleRows(start, len);
}

}  // namespace

// ---- corpus ----

double high_band_energy_ratio(const AudioSignal& signal, double cutoff_hz, const StftConfig& cfg) {
  const Grid power = magnitude(stft(signal, cfg)).array().square().matrix();
  const int kc = cutoff_bin(cutoff_hz, cfg, signal.sample_rate);
  const double total = power.sum();
  if (total <= 0.0) return 0.0;
  return power.rightCols(power.cols() - kc - 1).sum() / total;
}

AudioSignal synth_utterance(const RunConfig& cfg, int index) {
  const int sr = cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(cfg.corpus.duration_s * sr));
  const double nyquist = 0.5 * sr;
  const double high_edge = 0.5 * max_low_rate(cfg);
  auto rng = stream_rng(cfg.seed, kCorpusStream, static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  for (int attempt = 0;; ++attempt) {
    const double f0 = 80.0 + 220.0 * u01(rng);
    const int harmonics = 3 + static_cast<int>(u01(rng) * 6.0);  // 3..8
    const double fm_depth = 0.03;
    const int k_max = static_cast<int>(std::floor(0.95 * nyquist / (f0 * (1.0 + fm_depth))));
    const int k_high = static_cast<int>(std::ceil(1.1 * high_edge / f0));

    // Fundamental, one partial above the highest low-rate Nyquist, the rest anywhere.
    std::vector<int> ks{1};
    if (k_high <= k_max) ks.push_back(k_high + static_cast<int>(u01(rng) * (k_max - k_high + 1)));
    while (static_cast<int>(ks.size()) < harmonics && static_cast<int>(ks.size()) < k_max) {
      const int k = 2 + static_cast<int>(u01(rng) * (k_max - 1));
      if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
    }
    std::sort(ks.begin(), ks.end());

    std::vector<double> amp, phase;
    for (int k : ks) {
      amp.push_back(std::pow(static_cast<double>(k), -0.3) * (0.6 + 0.4 * u01(rng)));
      phase.push_back(two_pi * u01(rng));
    }
    const double am_rate = 1.0 + 3.0 * u01(rng), am_phase = two_pi * u01(rng);
    const double fm_rate = 2.0 + 4.0 * u01(rng), fm_phase = two_pi * u01(rng);

    AudioSignal sig;
    sig.sample_rate = sr;
    sig.samples.resize(n);
    double base_phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sr;
      const double f = f0 * (1.0 + fm_depth * std::sin(two_pi * fm_rate * t + fm_phase));
      base_phase += two_pi * f / sr;
      double v = 0.0;
      for (std::size_t j = 0; j < ks.size(); ++j) v += amp[j] * std::sin(ks[j] * base_phase + phase[j]);
      const double env = 0.55 + 0.45 * std::sin(two_pi * am_rate * t + am_phase);
      sig.samples[i] = env * v;
    }
    double peak = 0.0, energy = 0.0;
    for (double v : sig.samples) {
      peak = std::max(peak, std::abs(v));
      energy += v * v;
    }
    const double gain = 0.5 / peak;
    const double noise_std = gain * std::sqrt(energy / n) * std::pow(10.0, -40.0 / 20.0);
    std::normal_distribution<double> noise(0.0, noise_std);
    for (double& v : sig.samples) v = v * gain + noise(rng);

    bool ok = true;
    for (const auto* rates : {&cfg.train_rates, &cfg.eval_rates}) {
      for (int r : *rates) ok = ok && high_band_energy_ratio(sig, 0.5 * r, cfg.stft) > 0.01;
    }
    if (ok || attempt >= 64) return sig;
  }
}

CorpusManifest synth_corpus(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  const int count = cfg.corpus.utterances;
  std::vector<fs::path> files(static_cast<std::size_t>(count));
  detail::parallel_for(files.size(), cfg.threads, [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "utt_%04zu.wav", i);
    files[i] = out_dir / name;
    write_wav(synth_utterance(cfg, static_cast<int>(i)), files[i], WavDepth::kFloat32);
  });

  std::vector<std::size_t> order(files.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rng = stream_rng(cfg.seed, kCorpusStream, 0xffffffffULL);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_eval = static_cast<std::size_t>(std::llround(cfg.corpus.eval_fraction * count));
  std::vector<std::size_t> eval_idx(order.begin(), order.begin() + static_cast<long>(n_eval));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_eval), order.end());
  std::sort(eval_idx.begin(), eval_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  CorpusManifest m;
  for (auto i : train_idx) m.train_files.push_back(files[i]);
  for (auto i : eval_idx) m.eval_files.push_back(files[i]);
  m.all = out_dir / "manifest.txt";
  m.train = out_dir / "train.txt";
  m.eval = out_dir / "eval.txt";
  write_lines(m.all, files);
  write_lines(m.train, m.train_files);
  write_lines(m.eval, m.eval_files);
  return m;
}

std::vector<fs::path> read_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest " + manifest.string());
  std::vector<fs::path> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fs::path p(line);
    if (p.is_relative() && !fs::exists(p)) p = manifest.parent_path() / p;
    out.push_back(p);
  }
  return out;
}

// ---- features ----

namespace {
constexpr const char* kIndexName = "features.tsv";
}

std::vector<FeatureRecord> prepare_features(const RunConfig& cfg, const fs::path& manifest, const fs::path& out_dir,
                                            PrepareMode mode, std::ostream* log) {
  cfg.validate();
  const auto files = read_manifest(manifest);
  fs::create_directories(out_dir);
  const MelFrontend frontend(cfg.stft, cfg.mel, cfg.sample_rate);

  const std::size_t per_file = mode == PrepareMode::kTrain ? 1 : cfg.eval_rates.size();
  std::vector<std::optional<FeatureRecord>> slots(files.size() * per_file);
  std::vector<std::string> warnings(files.size());

  detail::parallel_for(files.size(), cfg.threads, [&](std::size_t i) {
    AudioSignal y;
    try {
      y = read_wav(files[i]);
    } catch (const Error& e) {
      warnings[i] = "warning: skipping " + files[i].string() + ": " + e.what();
      return;
    }
    if (y.sample_rate != cfg.sample_rate) y = resample(y, cfg.sample_rate);
    if (y.samples.empty()) {
      warnings[i] = "warning: skipping empty file " + files[i].string();
      return;
    }
    auto rng = stream_rng(cfg.seed, kPrepareStream, i);
    const MelSpectrogram x1 = frontend.analyze(y);
    for (std::size_t v = 0; v < per_file; ++v) {
      FeatureRecord rec;
      if (mode == PrepareMode::kTrain) {
        std::uniform_int_distribution<int> order(cfg.degrade.order_min, cfg.degrade.order_max);
        std::uniform_real_distribution<double> ripple(cfg.degrade.ripple_min_db, cfg.degrade.ripple_max_db);
        std::uniform_int_distribution<std::size_t> rate(0, cfg.train_rates.size() - 1);
        rec.order = order(rng);
        rec.ripple_db = ripple(rng);
        rec.low_rate = cfg.train_rates[rate(rng)];
      } else {
        rec.order = cfg.degrade.eval_order;
        rec.ripple_db = cfg.degrade.eval_ripple_db;
        rec.low_rate = cfg.eval_rates[v];
      }
      const ChebyshevSpec spec{rec.order, rec.ripple_db, 0.5 * rec.low_rate};
      DegradedPair pair = simulate_lr(y, rec.low_rate, spec, cfg.degrade.phase);
      pair.x_h.samples.resize(y.size(), 0.0);
      const MelSpectrogram x0 = frontend.analyze(pair.x_h);

      char id[64];
      std::snprintf(id, sizeof id, "%05zu_%d", i, rec.low_rate);
      rec.id = id;
      rec.source = files[i];
      rec.x0 = out_dir / (rec.id + ".x0.fhsp");
      rec.x1 = out_dir / (rec.id + ".x1.fhsp");
      write_spectrogram(x0, rec.x0);
      write_spectrogram(x1, rec.x1);
      slots[i * per_file + v] = rec;
    }
  });

  for (const auto& w : warnings) {
    if (!w.empty() && log != nullptr) *log << w << "\n";
  }
  std::vector<FeatureRecord> records;
  for (auto& s : slots) {
    if (s) records.push_back(std::move(*s));
  }
  if (records.empty()) throw DataError("prepare: no usable utterances in " + manifest.string());

  std::ofstream index(out_dir / kIndexName);
  if (!index) throw IoError("cannot write feature index in " + out_dir.string());
  index << "id\tx0\tx1\tlow_rate\torder\tripple_db\tsource\n";
  for (const auto& r : records) {
    index << r.id << '\t' << r.x0.filename().string() << '\t' << r.x1.filename().string() << '\t' << r.low_rate
          << '\t' << r.order << '\t' << fmt6(r.ripple_db) << '\t' << r.source.string() << '\n';
  }
  return records;
}

std::vector<FeatureRecord> read_feature_index(const fs::path& dir) {
  std::ifstream in(dir / kIndexName);
  if (!in) throw DataError("no feature index in " + dir.string() + " (run prepare first)");
  std::vector<FeatureRecord> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> cols;
    std::string c;
    while (std::getline(ss, c, '\t')) cols.push_back(c);
    if (cols.size() != 7) throw DataError("malformed feature index line: " + line);
    FeatureRecord r;
    r.id = cols[0];
    r.x0 = dir / cols[1];
    r.x1 = dir / cols[2];
    r.low_rate = std::stoi(cols[3]);
    r.order = std::stoi(cols[4]);
    r.ripple_db = std::stod(cols[5]);
    r.source = cols[6];
    out.push_back(r);
  }
  if (out.empty()) throw DataError("feature index in " + dir.string() + " is empty");
  return out;
}

// ---- training ----

TrainResult train_on_pairs(const RunConfig& cfg, const std::vector<ConditionPair<float>>& pairs,
                           std::optional<Checkpoint> resume, const std::function<void(int, double)>& on_step) {
  cfg.validate();
  if (pairs.empty()) throw DataError("train: no training pairs");
  const EstimatorConfig ecfg = cfg.estimator_config();
  for (const auto& p : pairs) {
    if (p.x0.cols() != ecfg.mel_bins || p.x1.cols() != ecfg.mel_bins || p.x0.rows() != p.x1.rows()) {
      throw DataError("train: pair shape does not match mel_bins " + std::to_string(ecfg.mel_bins));
    }
  }

  TrainResult result;
  Checkpoint& ck = result.checkpoint;
  if (resume) {
    if (!(resume->params.config == ecfg)) throw ConfigError("train: resume checkpoint config differs from run config");
    if (resume->kind != cfg.path) throw ConfigError("train: resume checkpoint path kind differs from run config");
    ck = std::move(*resume);
    if (!ck.adam) ck.adam = AdamState<float>::fresh(ecfg);
  } else {
    ck.params = EstimatorParams<float>::initialized(ecfg, stream_seed(cfg.seed, kInitStream, 0));
    ck.kind = cfg.path;
    ck.path = cfg.path_params;
    ck.adam = AdamState<float>::fresh(ecfg);
  }
  result.first_step = static_cast<int>(ck.adam->step) + 1;

  EstimatorParams<float> grads = EstimatorParams<float>::zeros(ecfg);
  std::vector<TrainingSample<float>> batch(static_cast<std::size_t>(cfg.train.batch));
  std::vector<std::size_t> picked(batch.size());
  ForwardStats stats;
  for (int step = result.first_step; step <= cfg.train.steps; ++step) {
    auto rng = stream_rng(cfg.seed, kTrainStream, static_cast<std::uint64_t>(step));
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      picked[b] = pick(rng);
      const auto& full = pairs[picked[b]];
      const Eigen::Index frames = full.x0.rows();
      const Eigen::Index len = std::min<Eigen::Index>(frames, cfg.train.crop_frames);
      std::uniform_int_distribution<Eigen::Index> start(0, frames - len);
      const Eigen::Index s = start(rng);
      const ConditionPair<float> z{crop_rows(full.x0, s, len), crop_rows(full.x1, s, len)};
      TrainingPoint<float> tp = draw_training_point(cfg.path, z, cfg.path_params, rng);
      batch[b] = {std::move(tp.point.x_t), z.x0, std::move(tp.target), tp.point.t};
    }
    double loss = 0.0;
    try {
      loss = loss_and_grad<float>(ck.params, batch, grads, cfg.train.threads, &stats);
    } catch (const NumericError&) {
      std::ostringstream msg;
      msg << "train: non-finite loss at step " << step << "; batch items";
      for (auto i : picked) msg << ' ' << i;
      msg << "; t values";
      for (const auto& s : batch) msg << ' ' << s.t;
      throw NumericError(msg.str());
    }
    adam_step(ck.params, grads, *ck.adam, cfg.adam);
    result.losses.push_back(loss);
    if (on_step) on_step(step, loss);
  }
  result.max_abs_activation = stats.max_abs_activation;
  return result;
}

TrainResult train(const RunConfig& cfg, const TrainOptions& opts) {
  const auto records = read_feature_index(opts.features_dir);
  std::vector<ConditionPair<float>> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) {
    pairs.push_back({read_spectrogram(r.x0).cast<float>(), read_spectrogram(r.x1).cast<float>()});
  }
  std::optional<Checkpoint> resume;
  if (opts.resume) resume = load_checkpoint(*opts.resume, nullptr);

  std::ofstream log;
  if (opts.loss_log) {
    const bool append = opts.resume.has_value() && fs::exists(*opts.loss_log);
    log.open(*opts.loss_log, append ? std::ios::app : std::ios::trunc);
    if (!log) throw IoError("cannot write " + opts.loss_log->string());
    if (!append) log << "step,loss\n";
    log.precision(9);
  }

  const int every = cfg.train.checkpoint_every;
  TrainResult result;
  RunConfig run = cfg;
  int start_step = resume && resume->adam ? static_cast<int>(resume->adam->step) : 0;
  std::optional<Checkpoint> carry = std::move(resume);
  std::vector<double> losses;
  // Training runs in checkpoint-sized chunks; chaining them is bit-identical
  // to one uninterrupted run because every step reseeds its own generator.
  while (true) {
    const int chunk_end = every > 0 ? std::min(cfg.train.steps, (start_step / every + 1) * every) : cfg.train.steps;
    run.train.steps = chunk_end;
    TrainResult part = train_on_pairs(run, pairs, std::move(carry), [&](int step, double loss) {
      if (log.is_open()) log << step << ',' << loss << '\n';
      if (opts.on_step) opts.on_step(step, loss);
    });
    losses.insert(losses.end(), part.losses.begin(), part.losses.end());
    result.max_abs_activation = std::max(result.max_abs_activation, part.max_abs_activation);
    if (!opts.checkpoint_out.empty()) save_checkpoint(part.checkpoint, opts.checkpoint_out);
    start_step = chunk_end;
    if (chunk_end >= cfg.train.steps) {
      result.checkpoint = std::move(part.checkpoint);
      break;
    }
    carry = std::move(part.checkpoint);
  }
  result.losses = std::move(losses);
  result.first_step = result.checkpoint.adam ? static_cast<int>(result.checkpoint.adam->step) -
                                                   static_cast<int>(result.losses.size()) + 1
                                             : 1;
  return result;
}

// ---- inference ----

InferResult infer_signal(const RunConfig& cfg, const Checkpoint& ckpt, const AudioSignal& x_l,
                         const SolverConfig& solver, bool postproc) {
  const MelFrontend frontend(cfg.stft, cfg.mel, cfg.sample_rate);
  const auto start = std::chrono::steady_clock::now();
  InferResult r;
  r.detail = super_resolve(ckpt.params, ckpt.kind, x_l, frontend, solver, ckpt.kind, ckpt.path);
  r.output = postproc ? replace_lowband(r.detail.y, x_l, 0.5 * x_l.sample_rate, cfg.stft, cfg.postproc_crossfade_bins)
                      : r.detail.y;
  r.seconds = seconds_since(start);
  return r;
}

// ---- evaluation ----

namespace {

struct UtteranceEval {
  std::vector<EvalRow> rows;  // per system for one (utterance, rate)
};

const char* const kSystems[] = {"flowhigh", "flowhigh-nopost", "input", "gt-recon"};

}  // namespace

std::vector<EvalRow> evaluate(const RunConfig& cfg, const Checkpoint& ckpt, const std::vector<fs::path>& eval_files,
                              const EvalOptions& opts) {
  cfg.validate();
  if (eval_files.empty()) throw DataError("eval: empty evaluation set");
  const MelFrontend frontend(cfg.stft, cfg.mel, cfg.sample_rate);
  const std::size_t n_rates = cfg.eval_rates.size();
  std::vector<std::vector<EvalRow>> per(eval_files.size() * n_rates);

  detail::parallel_for(eval_files.size(), cfg.threads, [&](std::size_t i) {
    AudioSignal y = read_wav(eval_files[i]);
    if (y.sample_rate != cfg.sample_rate) y = resample(y, cfg.sample_rate);
    const std::string utt = eval_files[i].stem().string();
    const AudioSignal gt_recon = frontend.synthesize(frontend.analyze(y), y.size());
    for (std::size_t ri = 0; ri < n_rates; ++ri) {
      const int l = cfg.eval_rates[ri];
      const double cutoff = 0.5 * l;
      const ChebyshevSpec spec{cfg.degrade.eval_order, cfg.degrade.eval_ripple_db, cutoff};
      const DegradedPair pair = simulate_lr(y, l, spec, cfg.degrade.phase);
      SolverConfig solver = cfg.solver;
      solver.seed = stream_seed(cfg.solver.seed, kEvalStream, i * 1000003ULL + static_cast<std::uint64_t>(l));
      const InferResult r = infer_signal(cfg, ckpt, pair.x_l, solver, true);
      const std::string tag = ":" + std::to_string(l) + ":" + utt;
      auto& rows = per[i * n_rates + ri];
      rows.push_back({"flowhigh" + tag, lsd_report(y, r.output, cutoff, cfg.stft), rtf(pair.x_l.duration_seconds(), r.seconds),
                      r.detail.forward_calls});
      if (opts.ablate_postproc) {
        rows.push_back({"flowhigh-nopost" + tag, lsd_report(y, r.detail.y, cutoff, cfg.stft), 0.0, r.detail.forward_calls});
      }
      rows.push_back({"input" + tag, lsd_report(y, r.detail.x_h, cutoff, cfg.stft), 0.0, 0});
      rows.push_back({"gt-recon" + tag, lsd_report(y, gt_recon, cutoff, cfg.stft), 0.0, 0});
    }
  });

  std::vector<EvalRow> out;
  for (std::size_t ri = 0; ri < n_rates; ++ri) {
    const int l = cfg.eval_rates[ri];
    for (std::size_t i = 0; i < eval_files.size(); ++i) {
      for (const auto& row : per[i * n_rates + ri]) out.push_back(row);
    }
    for (const char* system : kSystems) {
      const std::string prefix = std::string(system) + ":" + std::to_string(l) + ":";
      EvalRow mean;
      mean.utterance = "mean:" + std::string(system) + ":" + std::to_string(l);
      mean.report.cutoff_hz = 0.5 * l;
      int count = 0;
      for (std::size_t i = 0; i < eval_files.size(); ++i) {
        for (const auto& row : per[i * n_rates + ri]) {
          if (row.utterance.rfind(prefix, 0) != 0) continue;
          mean.report.lsd += row.report.lsd;
          mean.report.lsd_lf += row.report.lsd_lf;
          mean.report.lsd_hf += row.report.lsd_hf;
          mean.rtf += row.rtf;
          mean.forward_calls += row.forward_calls;
          ++count;
        }
      }
      if (count == 0) continue;
      mean.report.lsd /= count;
      mean.report.lsd_lf /= count;
      mean.report.lsd_hf /= count;
      mean.rtf /= count;
      out.push_back(mean);
    }
  }
  return out;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::string out = "utterance,lsd,lsd_lf,lsd_hf,rtf\n";
  for (const auto& r : rows) {
    out += r.utterance + "," + fmt6(r.report.lsd) + "," + fmt6(r.report.lsd_lf) + "," + fmt6(r.report.lsd_hf) + "," +
           fmt6(r.rtf) + "\n";
  }
  return out;
}

std::vector<BenchRow> bench(const RunConfig& cfg, const Checkpoint& ckpt, const std::vector<fs::path>& eval_files,
                            const std::vector<int>& nfe_list) {
  cfg.validate();
  if (eval_files.empty()) throw DataError("bench: empty evaluation set");
  const int l = cfg.eval_rates.front();
  const double cutoff = 0.5 * l;
  const ChebyshevSpec spec{cfg.degrade.eval_order, cfg.degrade.eval_ripple_db, cutoff};
  std::vector<AudioSignal> refs, inputs;
  for (const auto& f : eval_files) {
    AudioSignal y = read_wav(f);
    if (y.sample_rate != cfg.sample_rate) y = resample(y, cfg.sample_rate);
    inputs.push_back(simulate_lr(y, l, spec, cfg.degrade.phase).x_l);
    refs.push_back(std::move(y));
  }

  std::vector<BenchRow> rows;
  std::vector<SolverConfig> solvers;
  for (SolverMethod method : {SolverMethod::kEuler, SolverMethod::kMidpoint}) {
    for (int nfe : nfe_list) {
      if (method == SolverMethod::kMidpoint && nfe % 2 != 0) continue;
      solvers.push_back(solver_for_nfe(method, nfe, cfg.solver.seed));
      rows.push_back(BenchRow{method, nfe, 0, 0.0, 0.0});
    }
  }
  // Repeats cycle through every solver so slow phases of the machine are
  // shared rather than landing on one row.
  std::vector<double> wall(rows.size(), 0.0);
  double audio = 0.0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto seed = stream_seed(cfg.solver.seed, kEvalStream, i * 1000003ULL + static_cast<std::uint64_t>(l));
    std::vector<double> fastest(rows.size(), std::numeric_limits<double>::infinity());
    for (int rep = 0; rep < cfg.bench_repeats; ++rep) {
      for (std::size_t c = 0; c < rows.size(); ++c) {
        SolverConfig solver = solvers[c];
        solver.seed = seed;
        const InferResult r = infer_signal(cfg, ckpt, inputs[i], solver, true);
        fastest[c] = std::min(fastest[c], r.seconds);
        if (rep == 0) {
          rows[c].lsd += lsd(refs[i], r.output, cfg.stft);
          rows[c].forward_calls = r.detail.forward_calls;
        }
      }
    }
    for (std::size_t c = 0; c < rows.size(); ++c) wall[c] += fastest[c];
    audio += inputs[i].duration_seconds();
  }
  for (std::size_t c = 0; c < rows.size(); ++c) {
    rows[c].lsd /= static_cast<double>(refs.size());
    rows[c].rtf = rtf(audio, wall[c]);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "method,nfe,forward_calls,rtf,lsd\n";
  for (const auto& r : rows) {
    out += std::string(solver_method_name(r.method)) + "," + std::to_string(r.nfe) + "," +
           std::to_string(r.forward_calls) + "," + fmt6(r.rtf) + "," + fmt6(r.lsd) + "\n";
  }
  return out;
}

}  // namespace flowhigh
