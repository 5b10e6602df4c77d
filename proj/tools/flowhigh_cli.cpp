// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Command-line front end over the C API.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flowhigh/flowhigh.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code(fh_status s) {
  switch (s) {
    case FH_OK: return kExitOk;
    case FH_ERR_CONFIG:
    case FH_ERR_ARGUMENT: return kExitConfig;
    case FH_ERR_DATA:
    case FH_ERR_IO:
    case FH_ERR_FORMAT:
    case FH_ERR_DOMAIN:
    case FH_ERR_UNSUPPORTED: return kExitData;
    case FH_ERR_NUMERIC: return kExitNumeric;
    case FH_ERR_INTERNAL: return kExitInternal;
  }
  return kExitInternal;
}

struct Failure {
  fh_status status;
};

void check(fh_status s) {
  if (s != FH_OK) throw Failure{s};
}

struct ConfigDeleter {
  void operator()(fh_config* c) const { fh_config_free(c); }
};
struct ModelDeleter {
  void operator()(fh_model* m) const { fh_model_free(m); }
};
using ConfigPtr = std::unique_ptr<fh_config, ConfigDeleter>;
using ModelPtr = std::unique_ptr<fh_model, ModelDeleter>;

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  long long seed = -1;
  std::string path;
  int threads = 0;
};

ConfigPtr make_config(const Globals& g) {
  fh_config* raw = nullptr;
  check(g.config_path.empty() ? fh_config_new(&raw) : fh_config_load(g.config_path.c_str(), &raw));
  ConfigPtr cfg(raw);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      throw Failure{FH_ERR_CONFIG};
    }
    check(fh_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (g.seed >= 0) {
    const std::string s = std::to_string(g.seed);
    check(fh_config_set(cfg.get(), "seed", s.c_str()));
    check(fh_config_set(cfg.get(), "solver.seed", s.c_str()));
  }
  if (!g.path.empty()) check(fh_config_set(cfg.get(), "path", g.path.c_str()));
  if (g.threads > 0) {
    const std::string t = std::to_string(g.threads);
    check(fh_config_set(cfg.get(), "threads", t.c_str()));
    check(fh_config_set(cfg.get(), "train.threads", t.c_str()));
  }
  check(fh_config_validate(cfg.get()));
  return cfg;
}

ModelPtr load_model(const fh_config* cfg, const std::string& ckpt) {
  fh_model* raw = nullptr;
  check(fh_model_load(cfg, ckpt.c_str(), &raw));
  return ModelPtr(raw);
}

void print_step(int step, double loss, void*) {
  if (step == 1 || step % 100 == 0) std::fprintf(stderr, "step %d loss %.6f\n", step, loss);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowhigh: single-step flow-matching audio super-resolution"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Configuration file (key = value lines)");
  app.add_option("--set", g.overrides, "Override a configuration key (key=value), repeatable");
  app.add_option("--seed", g.seed, "Seed for corpus, training and sampling noise");
  app.add_option("--path", g.path, "Probability path")
      ->check(CLI::IsMember({"standard", "constant-sigma", "data-prior"}));
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string out, manifest, features, checkpoint, input, resume, loss_log;
  bool eval_mode = false, no_postproc = false, ablate = false;
  std::string method;
  int nfe = 0, steps = 0;
  std::vector<int> nfe_list;

  auto* synth = app.add_subcommand("synth-corpus", "Generate the synthetic training/evaluation corpus");
  synth->add_option("--out", out, "Output directory")->required();

  auto* prep = app.add_subcommand("prepare", "Degrade utterances and store paired mel features");
  prep->add_option("--manifest", manifest, "Manifest of WAV paths")->required();
  prep->add_option("--out", out, "Feature directory")->required();
  prep->add_flag("--eval", eval_mode, "Use the fixed evaluation filter, one pair per evaluation rate");

  auto* tr = app.add_subcommand("train", "Train the vector-field estimator");
  tr->add_option("--features", features, "Feature directory from prepare")->required();
  tr->add_option("--out", checkpoint, "Checkpoint to write")->required();
  tr->add_option("--resume", resume, "Checkpoint to resume from");
  tr->add_option("--loss-log", loss_log, "CSV of step,loss");

  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--method", method, "ODE solver")->check(CLI::IsMember({"euler", "midpoint"}));
    auto* n = sub->add_option("--nfe", nfe, "Network evaluations")->check(CLI::PositiveNumber);
    sub->add_option("--steps", steps, "Solver steps")->check(CLI::PositiveNumber)->excludes(n);
  };

  auto* inf = app.add_subcommand("infer", "Super-resolve one WAV file");
  inf->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  inf->add_option("--input", input, "Low-rate WAV")->required();
  inf->add_option("--output", out, "Output WAV")->required();
  inf->add_flag("--no-postproc", no_postproc, "Skip low-band replacement");
  add_solver_flags(inf);

  auto* ev = app.add_subcommand("eval", "LSD report over an evaluation manifest");
  ev->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  ev->add_option("--manifest", manifest, "Evaluation manifest")->required();
  ev->add_option("--out", out, "CSV output")->required();
  ev->add_flag("--ablate-postproc", ablate, "Also report outputs without low-band replacement");
  add_solver_flags(ev);

  auto* be = app.add_subcommand("bench", "RTF and LSD across solvers and NFE");
  be->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  be->add_option("--manifest", manifest, "Evaluation manifest")->required();
  be->add_option("--out", out, "CSV output")->required();
  be->add_option("--nfe", nfe_list, "NFE values, e.g. 1,2,4,8 (default from config)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    ConfigPtr cfg = make_config(g);
    const bool solver_flags = !method.empty() || nfe > 0 || steps > 0;
    auto solver_options = [&] {
      fh_infer_options o;
      fh_infer_options_default(cfg.get(), &o);
      if (!method.empty()) o.method = method == "euler" ? 0 : 1;
      if (nfe > 0) o.nfe = nfe;
      if (steps > 0) o.nfe = o.method == 1 ? 2 * steps : steps;
      if (nfe == 0 && steps == 0 && !method.empty()) o.nfe = o.method == 1 ? 2 : 1;
      o.postprocess = no_postproc ? 0 : 1;
      return o;
    };

    if (*synth) {
      check(fh_synth_corpus(cfg.get(), out.c_str()));
    } else if (*prep) {
      check(fh_prepare(cfg.get(), manifest.c_str(), out.c_str(), eval_mode ? 1 : 0));
    } else if (*tr) {
      check(fh_train(cfg.get(), features.c_str(), checkpoint.c_str(), resume.empty() ? nullptr : resume.c_str(),
                     loss_log.empty() ? nullptr : loss_log.c_str(), print_step, nullptr));
    } else if (*inf) {
      ModelPtr model = load_model(cfg.get(), checkpoint);
      const fh_infer_options o = solver_options();
      check(fh_infer_file(model.get(), input.c_str(), out.c_str(), &o));
    } else if (*ev) {
      if (solver_flags) {
        const fh_infer_options o = solver_options();
        const std::string steps_value = std::to_string(o.method == 1 ? o.nfe / 2 : o.nfe);
        if (o.method == 1 && o.nfe % 2 != 0) {
          std::fprintf(stderr, "error: midpoint needs an even --nfe\n");
          return kExitConfig;
        }
        check(fh_config_set(cfg.get(), "solver.method", o.method == 1 ? "midpoint" : "euler"));
        check(fh_config_set(cfg.get(), "solver.steps", steps_value.c_str()));
      }
      ModelPtr model = load_model(cfg.get(), checkpoint);
      check(fh_eval(model.get(), manifest.c_str(), out.c_str(), ablate ? 1 : 0));
    } else if (*be) {
      ModelPtr model = load_model(cfg.get(), checkpoint);
      check(fh_bench(model.get(), manifest.c_str(), nfe_list.empty() ? nullptr : nfe_list.data(), nfe_list.size(),
                     out.c_str()));
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", fh_status_name(f.status), fh_last_error());
    return exit_code(f.status);
  }
  return kExitOk;
}
