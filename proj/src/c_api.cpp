// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/flowhigh.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <new>
#include <string>

#include "flowhigh/pipeline.hpp"

struct fh_config {
  flowhigh::RunConfig cfg;
};

struct fh_model {
  flowhigh::RunConfig cfg;
  flowhigh::Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

fh_status status_for(flowhigh::ErrorKind kind) {
  using flowhigh::ErrorKind;
  switch (kind) {
    case ErrorKind::kDomain: return FH_ERR_DOMAIN;
    case ErrorKind::kFormat: return FH_ERR_FORMAT;
    case ErrorKind::kUnsupported: return FH_ERR_UNSUPPORTED;
    case ErrorKind::kIo: return FH_ERR_IO;
    case ErrorKind::kConfig: return FH_ERR_CONFIG;
    case ErrorKind::kData: return FH_ERR_DATA;
    case ErrorKind::kNumeric: return FH_ERR_NUMERIC;
  }
  return FH_ERR_INTERNAL;
}

fh_status fail(fh_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
fh_status guarded(F&& fn) {
  try {
    g_last_error.clear();
    fn();
    return FH_OK;
  } catch (const flowhigh::Error& e) {
    return fail(status_for(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(FH_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FH_ERR_INTERNAL, "unknown error");
  }
}

#define FH_REQUIRE(cond, what) \
  if (!(cond)) return fail(FH_ERR_ARGUMENT, what)

flowhigh::SolverConfig solver_from(const fh_model* model, const fh_infer_options* opts) {
  if (opts == nullptr) return model->cfg.solver;
  if (opts->method != 0 && opts->method != 1) throw flowhigh::ConfigError("method must be 0 (euler) or 1 (midpoint)");
  const auto method = opts->method == 0 ? flowhigh::SolverMethod::kEuler : flowhigh::SolverMethod::kMidpoint;
  return flowhigh::solver_for_nfe(method, opts->nfe, opts->seed);
}

void write_text(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw flowhigh::IoError(std::string("cannot write ") + path);
  out << text;
  if (!out) throw flowhigh::IoError(std::string("write failed: ") + path);
}

}  // namespace

extern "C" {

const char* fh_last_error(void) { return g_last_error.c_str(); }

const char* fh_status_name(fh_status status) {
  switch (status) {
    case FH_OK: return "ok";
    case FH_ERR_INTERNAL: return "internal";
    case FH_ERR_CONFIG: return "config";
    case FH_ERR_DATA: return "data";
    case FH_ERR_NUMERIC: return "numeric";
    case FH_ERR_IO: return "io";
    case FH_ERR_FORMAT: return "format";
    case FH_ERR_DOMAIN: return "domain";
    case FH_ERR_UNSUPPORTED: return "unsupported";
    case FH_ERR_ARGUMENT: return "argument";
  }
  return "unknown";
}

const char* fh_version(void) { return "0.1.0"; }

fh_status fh_config_new(fh_config** out) {
  FH_REQUIRE(out != nullptr, "fh_config_new: out is NULL");
  return guarded([&] { *out = new fh_config{}; });
}

fh_status fh_config_load(const char* path, fh_config** out) {
  FH_REQUIRE(path != nullptr && out != nullptr, "fh_config_load: NULL argument");
  return guarded([&] { *out = new fh_config{flowhigh::load_config(path)}; });
}

fh_status fh_config_parse(const char* text, fh_config** out) {
  FH_REQUIRE(text != nullptr && out != nullptr, "fh_config_parse: NULL argument");
  return guarded([&] { *out = new fh_config{flowhigh::parse_config(text)}; });
}

void fh_config_free(fh_config* cfg) { delete cfg; }

fh_status fh_config_set(fh_config* cfg, const char* key, const char* value) {
  FH_REQUIRE(cfg != nullptr && key != nullptr && value != nullptr, "fh_config_set: NULL argument");
  return guarded([&] { flowhigh::set_config_value(cfg->cfg, key, value); });
}

fh_status fh_config_get(const fh_config* cfg, const char* key, char* buf, size_t buf_len, size_t* needed) {
  FH_REQUIRE(cfg != nullptr && key != nullptr, "fh_config_get: NULL argument");
  return guarded([&] {
    const std::string v = flowhigh::get_config_value(cfg->cfg, key);
    if (needed != nullptr) *needed = v.size() + 1;
    if (buf != nullptr && buf_len > 0) {
      const size_t n = std::min(buf_len - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

fh_status fh_config_save(const fh_config* cfg, const char* path) {
  FH_REQUIRE(cfg != nullptr && path != nullptr, "fh_config_save: NULL argument");
  return guarded([&] { write_text(path, flowhigh::serialize_config(cfg->cfg)); });
}

fh_status fh_config_validate(const fh_config* cfg) {
  FH_REQUIRE(cfg != nullptr, "fh_config_validate: NULL argument");
  return guarded([&] { cfg->cfg.validate(); });
}

fh_status fh_synth_corpus(const fh_config* cfg, const char* out_dir) {
  FH_REQUIRE(cfg != nullptr && out_dir != nullptr, "fh_synth_corpus: NULL argument");
  return guarded([&] { flowhigh::synth_corpus(cfg->cfg, out_dir); });
}

fh_status fh_prepare(const fh_config* cfg, const char* manifest, const char* out_dir, int mode) {
  FH_REQUIRE(cfg != nullptr && manifest != nullptr && out_dir != nullptr, "fh_prepare: NULL argument");
  FH_REQUIRE(mode == 0 || mode == 1, "fh_prepare: mode must be 0 or 1");
  return guarded([&] {
    flowhigh::prepare_features(cfg->cfg, manifest, out_dir,
                               mode == 0 ? flowhigh::PrepareMode::kTrain : flowhigh::PrepareMode::kEval, &std::cerr);
  });
}

fh_status fh_train(const fh_config* cfg, const char* features_dir, const char* checkpoint_out, const char* resume,
                   const char* loss_log, fh_step_callback cb, void* user) {
  FH_REQUIRE(cfg != nullptr && features_dir != nullptr && checkpoint_out != nullptr, "fh_train: NULL argument");
  return guarded([&] {
    flowhigh::TrainOptions opts;
    opts.features_dir = features_dir;
    opts.checkpoint_out = checkpoint_out;
    if (resume != nullptr) opts.resume = resume;
    if (loss_log != nullptr) opts.loss_log = loss_log;
    if (cb != nullptr) opts.on_step = [cb, user](int step, double loss) { cb(step, loss, user); };
    flowhigh::train(cfg->cfg, opts);
  });
}

fh_status fh_model_load(const fh_config* cfg, const char* checkpoint, fh_model** out) {
  FH_REQUIRE(cfg != nullptr && checkpoint != nullptr && out != nullptr, "fh_model_load: NULL argument");
  return guarded([&] {
    cfg->cfg.validate();
    const flowhigh::EstimatorConfig expected = cfg->cfg.estimator_config();
    *out = new fh_model{cfg->cfg, flowhigh::load_checkpoint(checkpoint, &expected)};
  });
}

void fh_model_free(fh_model* model) { delete model; }

void fh_infer_options_default(const fh_config* cfg, fh_infer_options* out) {
  if (out == nullptr) return;
  const flowhigh::SolverConfig s = cfg != nullptr ? cfg->cfg.solver : flowhigh::SolverConfig{};
  out->method = s.method == flowhigh::SolverMethod::kEuler ? 0 : 1;
  out->nfe = s.nfe();
  out->seed = s.seed;
  out->postprocess = 1;
}

fh_status fh_super_resolve(const fh_model* model, const double* samples, size_t count, int in_rate,
                           const fh_infer_options* opts, double** out, size_t* out_count, uint64_t* forward_calls) {
  FH_REQUIRE(model != nullptr && out != nullptr && out_count != nullptr, "fh_super_resolve: NULL argument");
  FH_REQUIRE(samples != nullptr || count == 0, "fh_super_resolve: samples is NULL");
  return guarded([&] {
    flowhigh::AudioSignal x_l;
    x_l.sample_rate = in_rate;
    x_l.samples.assign(samples, samples + count);
    const bool post = opts == nullptr || opts->postprocess != 0;
    const auto r = flowhigh::infer_signal(model->cfg, model->ckpt, x_l, solver_from(model, opts), post);
    auto* buf = static_cast<double*>(std::malloc(sizeof(double) * std::max<size_t>(r.output.size(), 1)));
    if (buf == nullptr) throw std::bad_alloc();
    std::copy(r.output.samples.begin(), r.output.samples.end(), buf);
    *out = buf;
    *out_count = r.output.size();
    if (forward_calls != nullptr) *forward_calls = r.detail.forward_calls;
  });
}

void fh_buffer_free(double* buf) { std::free(buf); }

fh_status fh_infer_file(const fh_model* model, const char* in_wav, const char* out_wav, const fh_infer_options* opts) {
  FH_REQUIRE(model != nullptr && in_wav != nullptr && out_wav != nullptr, "fh_infer_file: NULL argument");
  return guarded([&] {
    const flowhigh::AudioSignal x_l = flowhigh::read_wav(in_wav);
    const bool post = opts == nullptr || opts->postprocess != 0;
    const auto r = flowhigh::infer_signal(model->cfg, model->ckpt, x_l, solver_from(model, opts), post);
    flowhigh::write_wav(r.output, out_wav);
  });
}

fh_status fh_eval(const fh_model* model, const char* eval_manifest, const char* csv_out, int ablate_postproc) {
  FH_REQUIRE(model != nullptr && eval_manifest != nullptr && csv_out != nullptr, "fh_eval: NULL argument");
  return guarded([&] {
    flowhigh::EvalOptions opts;
    opts.ablate_postproc = ablate_postproc != 0;
    const auto rows = flowhigh::evaluate(model->cfg, model->ckpt, flowhigh::read_manifest(eval_manifest), opts);
    write_text(csv_out, flowhigh::eval_csv(rows));
  });
}

fh_status fh_bench(const fh_model* model, const char* eval_manifest, const int* nfe_list, size_t nfe_count,
                   const char* csv_out) {
  FH_REQUIRE(model != nullptr && eval_manifest != nullptr && csv_out != nullptr, "fh_bench: NULL argument");
  FH_REQUIRE(nfe_list != nullptr || nfe_count == 0, "fh_bench: nfe_list is NULL");
  return guarded([&] {
    std::vector<int> nfe = nfe_count > 0 ? std::vector<int>(nfe_list, nfe_list + nfe_count) : model->cfg.bench_nfe;
    const auto rows = flowhigh::bench(model->cfg, model->ckpt, flowhigh::read_manifest(eval_manifest), nfe);
    write_text(csv_out, flowhigh::bench_csv(rows));
  });
}

}  // extern "C"
