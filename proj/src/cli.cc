/*
 * Copyright 2026 The LEMoN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lemon/cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lemon/common.h"
#include "lemon/dataset.h"
#include "lemon/metrics.h"
#include "lemon/noise.h"
#include "lemon/scoring.h"
#include "lemon/synthetic.h"
#include "lemon/theory.h"
#include "lemon/tuning.h"

namespace lemon::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
};

struct SynthArgs {
  std::string spec;
  std::string out;
};

struct NoiseArgs {
  std::string dataset;
  std::string noise_type;
  double rate = 0.0;
  std::string split = "train";
  std::string perm;
  int num_classes = 0;
  std::string out;
};

struct DetectArgs {
  std::string dataset;
  std::string method = "lemon";
  std::string params = "-";
  std::string reference_split = "train";
  std::string query_split = "test";
  int num_clusters = 100;
  std::string out;
};

struct TuneArgs {
  std::string dataset;
  std::string val_split = "val";
  std::string reference_split = "train";
  bool full_grid = false;
  bool discrete_labels = false;
  std::string out;
};

struct EvaluateArgs {
  std::string scores;
  std::string dataset;
  std::string split = "test";
  std::string out;
};

struct FilterArgs {
  std::string scores;
  double fraction = 0.0;
  std::string out;
};

struct TheoryArgs {
  std::string params;
  std::int64_t trials = 200000;
  double sigma = 1.0;
  double eps = 1.0;
  double lipschitz = 1.0;
  std::string out;
};

void emit_json(const std::string& json, const std::string& out_path,
               std::ostream& out) {
  if (out_path.empty()) {
    out << json;
  } else {
    write_file_atomic(out_path, json);
  }
}

int run_synth(const SynthArgs& a, std::ostream& log) {
  const GeneratorSpec spec = generator_spec_from_json(read_file(a.spec));
  const Dataset ds = generate(spec);
  write_dataset(ds, a.out);
  log << "synth: wrote " << ds.size() << " samples to " << a.out << "\n";
  return kSuccess;
}

int run_inject(const NoiseArgs& a, const Globals& g, std::ostream& log) {
  const Dataset ds = load_dataset(a.dataset);
  NoiseSpec spec;
  spec.noise_type = parse_noise_type(a.noise_type);
  spec.rate = a.rate;
  spec.seed = g.seed;
  spec.split = a.split == "all" ? std::nullopt
                                : std::optional<Split>(parse_split(a.split));
  if (!a.perm.empty()) {
    try {
      spec.class_permutation =
          Json::parse(read_file(a.perm)).get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(a.perm + ": " + e.what());
    }
  }
  NoiseReport report;
  const Dataset noised = inject_noise(ds, spec, a.num_classes, &report);
  write_dataset(noised, a.out);
  std::size_t flagged = 0;
  for (const auto& r : noised.records) {
    if (r.mislabel_flag.value_or(false)) ++flagged;
  }
  log << "inject-noise: flagged " << flagged << " records\n";
  if (spec.noise_type == NoiseType::kNoun && report.flagged < report.requested) {
    log << "inject-noise: shortfall of " << report.requested - report.flagged
        << " records without a noun-sharing donor\n";
  }
  return kSuccess;
}

int run_detect(const DetectArgs& a, const Globals& g, std::ostream& log) {
  const Dataset ds = load_dataset(a.dataset);
  MethodConfig config;
  config.params = a.params == "-" ? lemon_fix_params()
                                  : params_from_json(read_file(a.params));
  config.num_text_clusters = a.num_clusters;
  config.cluster_seed = g.seed;
  const ScoreTable table =
      score_split(ds, parse_split(a.reference_split), parse_split(a.query_split),
                  a.method, config, g.threads);
  write_scores(table, a.out);
  log << "detect: wrote " << table.size() << " " << a.method << " scores to "
      << a.out << "\n";
  return kSuccess;
}

int run_tune(const TuneArgs& a, const Globals& g, std::ostream& log) {
  const Dataset ds = load_dataset(a.dataset);
  TuneOptions options;
  options.discrete_labels = a.discrete_labels;
  options.reference_split = parse_split(a.reference_split);
  options.threads = g.threads;
  const TuneResult result =
      tune_lemon(ds, parse_split(a.val_split), options, a.full_grid);
  write_file_atomic(a.out, tune_result_to_json(result));
  log << "tune: best validation F1 " << format_double(result.best_val_f1)
      << " (" << provenance_name(result.provenance) << ", "
      << result.trials.size() << " trials)\n";
  return kSuccess;
}

int run_evaluate(const EvaluateArgs& a, std::ostream& log) {
  const Dataset ds = load_dataset(a.dataset);
  const ScoreTable table = read_scores(a.scores);
  const Split split = parse_split(a.split);
  std::vector<double> scores;
  std::unique_ptr<bool[]> flags(new bool[table.size()]);
  std::size_t n = 0;
  for (const ScoreRow& row : table) {
    if (row.index < 0 || static_cast<std::size_t>(row.index) >= ds.size()) {
      throw ValidationError("scores: index " + std::to_string(row.index) +
                            " is outside the dataset");
    }
    const SampleRecord& r = ds.records[static_cast<std::size_t>(row.index)];
    if (r.split != split) continue;
    if (!r.mislabel_flag) {
      throw ValidationError("record " + std::to_string(row.index) +
                            " has no mislabel_flag");
    }
    scores.push_back(row.score);
    flags[n++] = *r.mislabel_flag;
  }
  if (n == 0) {
    throw ValidationError("no scored rows belong to split '" + a.split + "'");
  }
  const MetricsReport report =
      evaluate_scores(scores, std::span<const bool>(flags.get(), n));
  write_file_atomic(a.out, metrics_to_json(report));
  log << "evaluate: AUROC " << format_double(report.auroc) << " over " << n
      << " samples\n";
  return kSuccess;
}

int run_filter(const FilterArgs& a, std::ostream& log) {
  if (!(a.fraction >= 0.0 && a.fraction <= 1.0)) {
    throw ValidationError("--fraction must lie in [0, 1]");
  }
  const ScoreTable table = read_scores(a.scores);
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  // Most suspect first; among equal scores the higher index goes first so
  // the lower index is kept.
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (table[x].score != table[y].score) return table[x].score > table[y].score;
    return table[x].index > table[y].index;
  });
  const auto removed = static_cast<std::size_t>(
      std::floor(a.fraction * static_cast<double>(table.size()) + 1e-9));
  std::vector<std::int64_t> kept;
  for (std::size_t i = removed; i < order.size(); ++i) {
    kept.push_back(table[order[i]].index);
  }
  std::sort(kept.begin(), kept.end());
  std::string text;
  for (std::int64_t idx : kept) text += std::to_string(idx) + "\n";
  write_file_atomic(a.out, text);
  log << "filter: kept " << kept.size() << " of " << table.size() << "\n";
  return kSuccess;
}

int run_theory_closed_form(const TheoryArgs& a, std::ostream& out) {
  const auto params = theory::theory_params_from_json(read_file(a.params));
  Json j;
  j["auroc"] = theory::closed_form_auroc(params);
  j["mixture_auroc"] = theory::mixture_auroc(params);
  j["zeta_mean"] = params.zeta_mean();
  j["zeta_variance"] = params.zeta_variance();
  j["lemma_regime"] = theory::lemma_regime_check(params);
  emit_json(j.dump(2) + "\n", a.out, out);
  return kSuccess;
}

int run_theory_sim(const TheoryArgs& a, const Globals& g, std::ostream& out) {
  const auto params = theory::theory_params_from_json(read_file(a.params));
  const auto sim = theory::simulate_auroc(params, a.trials, g.seed, g.threads);
  Json j;
  j["empirical_auroc"] = sim.auroc;
  j["std_error"] = sim.std_error;
  j["closed_form_auroc"] = theory::closed_form_auroc(params);
  j["trials"] = a.trials;
  j["seed"] = g.seed;
  emit_json(j.dump(2) + "\n", a.out, out);
  return kSuccess;
}

int run_theory_lipschitz(const TheoryArgs& a, const Globals& g,
                         std::ostream& out) {
  const auto r = theory::verify_lipschitz_bound(a.sigma, a.eps, a.lipschitz,
                                                a.trials, g.seed, g.threads);
  Json j;
  j["empirical_rate"] = r.empirical_rate;
  j["delta_bound"] = r.delta_bound;
  j["std_error"] = r.std_error;
  j["bound_holds"] = r.empirical_rate >= r.delta_bound - 3.0 * r.std_error;
  j["trials"] = a.trials;
  j["seed"] = g.seed;
  emit_json(j.dump(2) + "\n", a.out, out);
  return kSuccess;
}

std::string single_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Label-error detection for paired image-text embeddings",
               "lemon"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for noise, clustering and simulation");
  app.add_option("--threads", g.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--spec", synth.spec, "Generator spec JSON")->required();
  synth_cmd->add_option("--out", synth.out, "Output dataset directory")->required();

  NoiseArgs noise;
  auto* noise_cmd = app.add_subcommand("inject-noise", "Inject synthetic label noise");
  noise_cmd->add_option("--dataset", noise.dataset)->required();
  noise_cmd->add_option("--noise-type", noise.noise_type,
                        "random, cat, noun, symmetric or asymmetric")
      ->required();
  noise_cmd->add_option("--rate", noise.rate)->required();
  noise_cmd->add_option("--split", noise.split, "train, val, test or all");
  noise_cmd->add_option("--perm", noise.perm, "JSON array mapping class c to perm[c]");
  noise_cmd->add_option("--num-classes", noise.num_classes);
  noise_cmd->add_option("--out", noise.out)->required();

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Score samples for label errors");
  detect_cmd->add_option("--dataset", detect.dataset)->required();
  detect_cmd->add_option("--method", detect.method,
                         "lemon, clip-sim, deep-knn or discrepancy");
  detect_cmd->add_option("--params", detect.params,
                         "Params JSON, or - for the fixed preset");
  detect_cmd->add_option("--reference-split", detect.reference_split);
  detect_cmd->add_option("--query-split", detect.query_split);
  detect_cmd->add_option("--num-clusters", detect.num_clusters,
                         "Text clusters for deep-knn on captions");
  detect_cmd->add_option("--out", detect.out, "Score CSV")->required();

  TuneArgs tune;
  auto* tune_cmd = app.add_subcommand("tune", "Select hyperparameters on a labeled split");
  tune_cmd->add_option("--dataset", tune.dataset)->required();
  tune_cmd->add_option("--val-split", tune.val_split);
  tune_cmd->add_option("--reference-split", tune.reference_split);
  tune_cmd->add_flag("--full-grid", tune.full_grid);
  tune_cmd->add_flag("--discrete-labels", tune.discrete_labels,
                     "Use class_id with the discrete metric for d_Y");
  tune_cmd->add_option("--out", tune.out)->required();

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score quality against mislabel flags");
  eval_cmd->add_option("--scores", eval.scores)->required();
  eval_cmd->add_option("--dataset", eval.dataset)->required();
  eval_cmd->add_option("--split", eval.split);
  eval_cmd->add_option("--out", eval.out)->required();

  FilterArgs filter;
  auto* filter_cmd = app.add_subcommand("filter", "Drop the most suspect fraction");
  filter_cmd->add_option("--scores", filter.scores)->required();
  filter_cmd->add_option("--fraction", filter.fraction)->required();
  filter_cmd->add_option("--out", filter.out)->required();

  TheoryArgs theory_args;
  auto* theory_cmd = app.add_subcommand("theory", "Neighbor-score theory checks");
  theory_cmd->require_subcommand(1);
  auto* closed_cmd = theory_cmd->add_subcommand("closed-form", "Closed-form AUROC");
  closed_cmd->add_option("--params", theory_args.params)->required();
  closed_cmd->add_option("--out", theory_args.out);
  auto* sim_cmd = theory_cmd->add_subcommand("sim", "Monte Carlo AUROC");
  sim_cmd->add_option("--params", theory_args.params)->required();
  sim_cmd->add_option("--trials", theory_args.trials);
  sim_cmd->add_option("--out", theory_args.out);
  auto* lip_cmd = theory_cmd->add_subcommand("lipschitz", "Lipschitz bound check");
  lip_cmd->add_option("--sigma", theory_args.sigma)->required();
  lip_cmd->add_option("--eps", theory_args.eps)->required();
  lip_cmd->add_option("--L", theory_args.lipschitz)->required();
  lip_cmd->add_option("--trials", theory_args.trials);
  lip_cmd->add_option("--out", theory_args.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    err << "ERROR: " << single_line(e.what()) << "\n";
    return kUsageError;
  }

  try {
    if (*synth_cmd) return run_synth(synth, err);
    if (*noise_cmd) return run_inject(noise, g, err);
    if (*detect_cmd) return run_detect(detect, g, err);
    if (*tune_cmd) return run_tune(tune, g, err);
    if (*eval_cmd) return run_evaluate(eval, err);
    if (*filter_cmd) return run_filter(filter, err);
    if (*closed_cmd) return run_theory_closed_form(theory_args, out);
    if (*sim_cmd) return run_theory_sim(theory_args, g, out);
    if (*lip_cmd) return run_theory_lipschitz(theory_args, g, out);
  } catch (const ValidationError& e) {
    err << "ERROR: " << single_line(e.what()) << "\n";
    return kValidationError;
  } catch (const IoError& e) {
    err << "ERROR: " << single_line(e.what()) << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "ERROR: internal: " << single_line(e.what()) << "\n";
    return kInternalError;
  }
  err << "ERROR: no subcommand\n";
  return kUsageError;
}

}  // namespace lemon::cli
