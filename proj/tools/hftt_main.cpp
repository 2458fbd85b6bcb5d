// Copyright 2026 The HFTT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hftt: synth | train | score | eval | theory
//
// Exit codes: 0 success, 1 I/O, 2 validation, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "hftt/cli_config.hpp"
#include "hftt/corpus_synth.hpp"
#include "hftt/embedding_store.hpp"
#include "hftt/error.hpp"
#include "hftt/metrics.hpp"
#include "hftt/scoring.hpp"
#include "hftt/theory_lab.hpp"
#include "hftt/trainer.hpp"

namespace {

using hftt::ErrorKind;
using nlohmann::json;

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) hftt::fail(ErrorKind::kIo, "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) hftt::fail(ErrorKind::kIo, "write failed: " + path);
}

struct SynthArgs {
  std::string templates;
  std::string words;
  std::string mode = "corpus";
  std::string out;
  bool all_templates = false;
};

int run_synth(const SynthArgs& a) {
  std::vector<hftt::PromptTemplate> templates;
  if (a.templates.empty()) {
    templates.emplace_back(std::string(a.mode == "indist" ? "{}" : hftt::kDefaultCorpusTemplate));
  } else {
    templates = hftt::load_templates(a.templates);
  }
  const auto words = hftt::load_word_set(a.words);
  std::vector<std::string> lines;
  if (a.mode == "corpus") {
    if (!a.all_templates) templates.erase(templates.begin() + 1, templates.end());
    lines = hftt::word2data(words.words(), templates);
  } else {
    lines = hftt::synthesize_in_distribution(words.words(), templates);
  }
  hftt::write_lines(lines, a.out);
  std::cout << lines.size() << '\n';
  return 0;
}

struct TrainArgs {
  std::string task;
  std::string indist;
  std::string corpus;
  std::string config;
  std::string out;
  std::string report;
  hftt::KeyValues overrides;
};

int run_train(const TrainArgs& a) {
  hftt::TrainConfig cfg;
  hftt::KeyValues merged;
  if (!a.config.empty()) merged = hftt::read_key_values(a.config);
  for (const auto& [k, v] : a.overrides) merged[k] = v;
  if (!merged.count("seed")) {
    if (const char* env = std::getenv("HFTT_SEED"); env != nullptr && *env != '\0') {
      merged["seed"] = env;
    }
  }
  hftt::apply_key_values(cfg, merged);
  cfg.validate();

  const auto task = hftt::task_embeddings_from_store(hftt::load_store(a.task));
  const auto indist = hftt::load_store(a.indist);
  const auto corpus = hftt::load_store(a.corpus);

  const hftt::TrainReport report = hftt::train(cfg, task, indist, corpus);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  hftt::save_model(report.final_model, a.out, &cfg);

  json j = {
      {"steps", report.steps},
      {"loss_trace", report.loss_trace},
      {"clamp_events", report.clamp_events},
      {"warnings", report.warnings},
      {"temperature", report.final_model.temperature},
      {"config", cfg},
  };
  const std::string report_path =
      a.report.empty() ? (std::filesystem::path(a.out) / "train_report.json").string() : a.report;
  write_json(j, report_path);
  std::cout << "steps " << report.steps << ", final loss "
            << (report.loss_trace.empty() ? 0.0 : report.loss_trace.back()) << '\n';
  return 0;
}

struct ScoreArgs {
  std::string model;
  std::string task;
  std::string input;
  std::string method = "hftt";
  std::string out;
  std::optional<double> temperature;
  double mcm_temperature = 1.0;
};

int run_score(const ScoreArgs& a) {
  const auto method = hftt::parse_score_method(a.method);
  const auto input = hftt::load_store(a.input);
  hftt::ScoreSet set;
  if (method == hftt::ScoreMethod::kHftt) {
    if (a.model.empty()) hftt::fail(ErrorKind::kValidation, "--method hftt requires --model");
    set = hftt::score_hftt(hftt::load_model(a.model), input);
  } else {
    hftt::TaskEmbeddings task;
    if (!a.model.empty()) {
      task = hftt::load_model(a.model).task;
    } else if (!a.task.empty()) {
      task = hftt::task_embeddings_from_store(hftt::load_store(a.task));
    } else {
      hftt::fail(ErrorKind::kValidation, "baselines need --task or --model");
    }
    const double tau = method == hftt::ScoreMethod::kMcm
                           ? a.mcm_temperature
                           : a.temperature.value_or(input.temperature());
    set = hftt::score_baseline(method, task, input, tau);
  }
  hftt::export_scores(set, a.out);
  std::cout << set.size() << " scores (" << hftt::to_string(method) << ")\n";
  return 0;
}

struct EvalArgs {
  std::string id;
  std::string ood;
  std::string out;
  std::string id_name = "in";
  std::string ood_name = "out";
  std::string method;
};

int run_eval(const EvalArgs& a) {
  auto id = hftt::import_scores(a.id);
  auto ood = hftt::import_scores(a.ood);
  if (!a.method.empty()) id.method = ood.method = hftt::parse_score_method(a.method);
  const auto report = hftt::eval_report(id, ood, a.id_name, a.ood_name);
  if (!a.out.empty()) write_json(report, a.out);
  std::cout << hftt::render_table_header() << '\n' << hftt::render_table_row(report) << '\n';
  return 0;
}

struct TheoryArgs {
  std::size_t dim = 64;
  std::size_t samples = 10000;
  double noise = 0.3;
  std::uint64_t seed = 42;
  std::string out;
  std::string dump_dir;
  hftt::FitOptions fit;
};

int run_theory(const TheoryArgs& a) {
  const auto cfg = hftt::default_bimodal_config(a.dim, a.samples, a.noise, a.seed);
  const auto sample = hftt::sample_bimodal(cfg);
  const auto report = hftt::run_theory(cfg, sample, a.fit);
  if (!a.dump_dir.empty()) {
    const std::filesystem::path dir(a.dump_dir);
    std::filesystem::create_directories(dir);
    hftt::save_store(sample.u_minus, dir / "u_minus.hemb");
    hftt::save_store(sample.u_plus, dir / "u_plus.hemb");
    hftt::save_store(sample.v_minus, dir / "v_minus.hemb");
    hftt::save_store(sample.v_plus, dir / "v_plus.hemb");
  }
  if (!a.out.empty()) write_json(report, a.out);
  std::cout << "cosine(closed, fitted) = " << report.cosine
            << ", corollary holds = " << (report.corollary.holds ? "true" : "false")
            << ", accuracy = " << report.accuracy << '\n';
  if (!report.fit_converged) {
    std::cerr << "warning: fit stopped after " << report.fit_steps << " steps without converging\n";
  }
  return report.corollary.holds ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-only training and evaluation of unwanted-content detectors on "
               "vision-language embeddings"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Cross prompt templates with a word list");
  synth_cmd->add_option("--templates", synth.templates,
                        "Template file, one pattern with a single {} per line "
                        "(default: \"This is a photo of a {}.\" for corpus, \"{}\" for indist)");
  synth_cmd->add_option("--words", synth.words, "Word or class-name file")->required();
  synth_cmd->add_option("--mode", synth.mode, "corpus | indist (default corpus)")
      ->check(CLI::IsMember({"corpus", "indist"}));
  synth_cmd->add_option("--out", synth.out, "Output text file")->required();
  synth_cmd->add_flag("--all-templates", synth.all_templates,
                      "corpus mode: cross every template instead of only the first");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Learn trainable embeddings from text embeddings");
  train_cmd->add_option("--task", train.task, "Task embeddings (.hemb)")->required();
  train_cmd->add_option("--indist", train.indist, "In-distribution text embeddings (.hemb)")
      ->required();
  train_cmd->add_option("--corpus", train.corpus, "Synthesized corpus embeddings (.hemb)")
      ->required();
  train_cmd->add_option("--config", train.config, "key = value config file; flags win");
  train_cmd->add_option("--out", train.out, "Model directory")->required();
  train_cmd->add_option("--report", train.report,
                        "Training report JSON (default <out>/train_report.json)");
  struct Knob {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Knob knobs[] = {
      {"--batch-size", "batch_size", "Mini-batch size (default 256)"},
      {"--lr", "learning_rate", "SGD learning rate (default 1.0)"},
      {"--epochs", "epochs", "Passes over the corpus (default 1)"},
      {"--n-trainable", "n_trainable", "Number of trainable embeddings N (default 10)"},
      {"--lambda", "lambda", "In/out balance lambda in [0,1] (default 0)"},
      {"--gamma", "gamma", "Focal exponent gamma >= 0 (default 1.0)"},
      {"--seed", "seed", "Random seed (default 42, or HFTT_SEED)"},
      {"--renormalize", "renormalize", "Project trainable embeddings to the sphere (default true)"},
      {"--loss-variant", "loss_variant", "proposed | original (default proposed)"},
      {"--init", "init", "random_unit | corpus_mean_perturbed (default random_unit)"},
      {"--sampling", "sampling", "shuffle | iid corpus batches (default shuffle)"},
      {"--reduction", "reduction", "mean | sum scaling of the SGD step (default mean)"},
      {"--temperature", "temperature", "Softmax temperature (default: corpus file value, 0.01)"},
  };
  static std::map<std::string, std::string> knob_values;
  for (const auto& k : knobs) train_cmd->add_option(k.flag, knob_values[k.key], k.help);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score embeddings (higher = more out-distribution)");
  score_cmd->add_option("--model", score.model, "Model directory (required for hftt)");
  score_cmd->add_option("--task", score.task, "Task embeddings (.hemb) for baselines");
  score_cmd->add_option("--input", score.input, "Embeddings to score (.hemb)")->required();
  score_cmd->add_option("--method", score.method, "hftt | msp | maxlogit | energy | mcm (default hftt)")
      ->check(CLI::IsMember({"hftt", "msp", "maxlogit", "energy", "mcm"}));
  score_cmd->add_option("--out", score.out, "Output CSV (id,score)")->required();
  score_cmd->add_option("--temperature", score.temperature,
                        "Logit temperature for msp/maxlogit/energy (default: input file value)");
  score_cmd->add_option("--mcm-temperature", score.mcm_temperature,
                        "Softmax temperature for mcm (default 1.0)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "AUROC and FPR95 of two score files");
  eval_cmd->add_option("--id", eval.id, "In-distribution scores CSV")->required();
  eval_cmd->add_option("--ood", eval.ood, "Out-distribution scores CSV")->required();
  eval_cmd->add_option("--out", eval.out, "Report JSON");
  eval_cmd->add_option("--id-name", eval.id_name, "Label of the in-distribution set");
  eval_cmd->add_option("--ood-name", eval.ood_name, "Label of the out-distribution set");
  eval_cmd->add_option("--method", eval.method, "Method label for the report");

  TheoryArgs theory;
  auto* theory_cmd = app.add_subcommand("theory", "Cross-modal transfer check on synthetic data");
  theory_cmd->add_option("--dim", theory.dim, "Embedding dimension (default 64)");
  theory_cmd->add_option("--samples", theory.samples, "Samples per class and modality (default 10000)");
  theory_cmd->add_option("--noise", theory.noise, "Isotropic noise scale (default 0.3)");
  theory_cmd->add_option("--seed", theory.seed, "Random seed (default 42)");
  theory_cmd->add_option("--out", theory.out, "Report JSON");
  theory_cmd->add_option("--dump-dir", theory.dump_dir, "Write the four sets as .hemb files here");
  theory_cmd->add_option("--steps", theory.fit.max_steps, "Max projected-gradient steps (default 5000)");
  theory_cmd->add_option("--fit-lr", theory.fit.learning_rate, "Fit learning rate (default 0.5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*train_cmd) {
      for (const auto& k : knobs) {
        if (train_cmd->count(k.flag) > 0) train.overrides[k.key] = knob_values[k.key];
      }
      return run_train(train);
    }
    if (*score_cmd) return run_score(score);
    if (*eval_cmd) return run_eval(eval);
    if (*theory_cmd) return run_theory(theory);
  } catch (const hftt::Error& e) {
    std::cerr << "hftt: " << hftt::to_string(e.kind()) << ": " << e.what() << '\n';
    return hftt::exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "hftt: I/O error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
