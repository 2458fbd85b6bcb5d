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

#include "hftt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "hftt/error.hpp"

namespace hftt {
namespace {

constexpr std::size_t kInitSampleSize = 1000;
constexpr double kInitNoiseScale = 0.1;
constexpr const char* kCreatedBy = "hftt 0.1.0";

Matrix gather_rows(const EmbeddingStore& store, std::span<const std::size_t> indices) {
  Matrix batch(indices.size(), store.dim());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = store.row(indices[r]);
    std::copy(src.begin(), src.end(), batch.row(r).begin());
  }
  return batch;
}

bool rows_unit(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (std::abs(l2_norm(m.row(i)) - 1.0) > kUnitNormTolerance) return false;
  }
  return true;
}

}  // namespace

const char* to_string(InitKind k) noexcept {
  return k == InitKind::kRandomUnit ? "random_unit" : "corpus_mean_perturbed";
}

const char* to_string(CorpusSampling s) noexcept {
  return s == CorpusSampling::kShuffle ? "shuffle" : "iid";
}

const char* to_string(Reduction r) noexcept {
  return r == Reduction::kMean ? "mean" : "sum";
}

Reduction parse_reduction(const std::string& name) {
  if (name == "mean") return Reduction::kMean;
  if (name == "sum") return Reduction::kSum;
  fail(ErrorKind::kValidation, "unknown reduction '" + name + "'");
}

InitKind parse_init_kind(const std::string& name) {
  if (name == "random_unit") return InitKind::kRandomUnit;
  if (name == "corpus_mean_perturbed") return InitKind::kCorpusMeanPerturbed;
  fail(ErrorKind::kValidation, "unknown init '" + name + "'");
}

CorpusSampling parse_corpus_sampling(const std::string& name) {
  if (name == "shuffle") return CorpusSampling::kShuffle;
  if (name == "iid") return CorpusSampling::kIid;
  fail(ErrorKind::kValidation, "unknown corpus sampling '" + name + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) fail(ErrorKind::kValidation, "batch_size must be positive");
  if (epochs == 0) fail(ErrorKind::kValidation, "epochs must be positive");
  if (n_trainable == 0) fail(ErrorKind::kValidation, "n_trainable must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::kValidation, "learning_rate must be a finite value >= 0");
  }
  if (temperature && (!(*temperature > 0.0) || !std::isfinite(*temperature))) {
    fail(ErrorKind::kValidation, "temperature must be positive");
  }
  loss_config().validate();
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
  j = nlohmann::json{
      {"batch_size", cfg.batch_size},
      {"learning_rate", cfg.learning_rate},
      {"epochs", cfg.epochs},
      {"n_trainable", cfg.n_trainable},
      {"lambda", cfg.lambda},
      {"gamma", cfg.gamma},
      {"seed", cfg.seed},
      {"renormalize", cfg.renormalize},
      {"loss_variant", to_string(cfg.loss_variant)},
      {"init", to_string(cfg.init)},
      {"sampling", to_string(cfg.sampling)},
      {"reduction", to_string(cfg.reduction)},
  };
  if (cfg.temperature) {
    j["temperature"] = *cfg.temperature;
  } else {
    j["temperature"] = nullptr;
  }
}

std::size_t planned_steps(std::size_t corpus_count, const TrainConfig& cfg) {
  return (corpus_count + cfg.batch_size - 1) / cfg.batch_size * cfg.epochs;
}

Matrix init_trainable(std::size_t n, std::size_t dim, std::mt19937_64& rng, InitKind kind,
                      const EmbeddingStore* corpus) {
  if (n == 0 || dim == 0) fail(ErrorKind::kValidation, "init needs n > 0 and dim > 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix out(n, dim);

  std::vector<double> center(dim, 0.0);
  double noise = 1.0;
  if (kind == InitKind::kCorpusMeanPerturbed) {
    if (corpus == nullptr || corpus->count() == 0) {
      fail(ErrorKind::kValidation, "corpus_mean_perturbed init needs a non-empty corpus");
    }
    if (corpus->dim() != dim) fail(ErrorKind::kValidation, "corpus dim mismatch in init");
    std::uniform_int_distribution<std::size_t> pick(0, corpus->count() - 1);
    const std::size_t samples = std::min(kInitSampleSize, corpus->count());
    for (std::size_t s = 0; s < samples; ++s) {
      const auto row = corpus->row(pick(rng));
      for (std::size_t k = 0; k < dim; ++k) center[k] += row[k];
    }
    for (double& c : center) c /= static_cast<double>(samples);
    noise = kInitNoiseScale;
  }

  for (std::size_t j = 0; j < n; ++j) {
    auto row = out.row(j);
    do {
      for (std::size_t k = 0; k < dim; ++k) row[k] = center[k] + noise * gauss(rng);
    } while (l2_norm(row) == 0.0);
    normalize_in_place(row);
  }
  return out;
}

Matrix init_trainable(std::size_t n, std::size_t dim, std::uint64_t seed, InitKind kind,
                      const EmbeddingStore* corpus) {
  std::mt19937_64 rng(seed);
  return init_trainable(n, dim, rng, kind, corpus);
}

TrainReport train(const TrainConfig& cfg, const TaskEmbeddings& task,
                  const EmbeddingStore& in_texts, const EmbeddingStore& corpus,
                  const StepObserver& observer) {
  cfg.validate();
  if (corpus.count() == 0) fail(ErrorKind::kValidation, "training corpus is empty");
  if (in_texts.count() == 0) fail(ErrorKind::kValidation, "in-distribution texts are empty");
  if (task.size() == 0) fail(ErrorKind::kValidation, "no task embeddings");
  if (in_texts.dim() != task.dim() || corpus.dim() != task.dim()) {
    fail(ErrorKind::kValidation, "store dimensions disagree: task " +
                                     std::to_string(task.dim()) + ", in-distribution " +
                                     std::to_string(in_texts.dim()) + ", corpus " +
                                     std::to_string(corpus.dim()));
  }

  TrainReport report;
  for (const EmbeddingStore* s : {&in_texts, &corpus}) {
    if (s->modality() == Modality::kImage) {
      report.warnings.push_back(
          std::string("training on an image-modality store; expected text or synthetic (") +
          (s == &corpus ? "corpus" : "in-distribution") + ")");
    }
  }
  const double tau = round_to_storage(cfg.temperature.value_or(corpus.temperature()));
  if (!cfg.temperature && in_texts.temperature() != corpus.temperature()) {
    report.warnings.push_back("in-distribution and corpus temperatures differ; using corpus");
  }

  std::mt19937_64 rng(cfg.seed);
  DetectorModel model;
  model.task = task;
  model.temperature = tau;
  model.trainable = init_trainable(cfg.n_trainable, task.dim(), rng, cfg.init, &corpus);
  model.validate();
  report.initial_trainable = model.trainable;

  const LossConfig loss_cfg = cfg.loss_config();
  std::vector<std::size_t> order(corpus.count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uniform_int_distribution<std::size_t> pick_in(0, in_texts.count() - 1);
  std::uniform_int_distribution<std::size_t> pick_corpus(0, corpus.count() - 1);
  std::vector<std::size_t> in_idx;
  std::vector<std::size_t> all_idx;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.sampling == CorpusSampling::kShuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < corpus.count(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, corpus.count() - start);
      if (cfg.sampling == CorpusSampling::kShuffle) {
        all_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                       order.begin() + static_cast<std::ptrdiff_t>(start + len));
      } else {
        all_idx.resize(len);
        for (auto& i : all_idx) i = pick_corpus(rng);
      }
      in_idx.resize(len);
      for (auto& i : in_idx) i = pick_in(rng);

      const Matrix batch_all = gather_rows(corpus, all_idx);
      const Matrix batch_in = gather_rows(in_texts, in_idx);
      auto [br, grad] = loss_and_gradient(model, batch_in, batch_all, loss_cfg);
      if (!std::isfinite(br.total)) {
        fail(ErrorKind::kNumerical,
             "non-finite loss at step " + std::to_string(report.steps));
      }
      const double scale =
          cfg.reduction == Reduction::kMean ? 1.0 / static_cast<double>(len) : 1.0;
      report.loss_trace.push_back(br.total * scale);
      report.clamp_events += br.clamp_events;

      const double step = cfg.learning_rate * scale;
      for (std::size_t j = 0; j < model.trainable.rows(); ++j) {
        auto w = model.trainable.row(j);
        const auto g = grad.row(j);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= step * g[k];
        if (cfg.renormalize && normalize_in_place(w) == 0.0) {
          fail(ErrorKind::kNumerical, "trainable embedding " + std::to_string(j) +
                                          " collapsed to zero at step " +
                                          std::to_string(report.steps));
        }
      }
      if (observer) observer(report.steps, model);
      ++report.steps;
    }
  }

  // Storage precision, so the saved model reloads bit-exactly.
  for (double& v : model.trainable.data()) v = round_to_storage(v);
  report.final_model = std::move(model);
  return report;
}

void save_model(const DetectorModel& model, const std::filesystem::path& dir,
                const TrainConfig* config) {
  model.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create model directory " + dir.string());

  save_store(task_embeddings_to_store(model.task, model.temperature), dir / "task.hemb");
  EmbeddingStore::Manifest manifest{rows_unit(model.trainable), model.temperature,
                                    Modality::kSynthetic};
  save_store(EmbeddingStore(model.trainable, manifest), dir / "trainable.hemb");

  nlohmann::json j = {
      {"format", "hftt-model"},
      {"version", 1},
      {"dim", model.dim()},
      {"K", model.task.size()},
      {"N", model.trainable.rows()},
      {"temperature", round_to_storage(model.temperature)},
      {"created_by", kCreatedBy},
  };
  if (config) j["config"] = *config;
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

DetectorModel load_model(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  for (const auto& p : {manifest_path, dir / "task.hemb", dir / "trainable.hemb"}) {
    if (!std::filesystem::exists(p)) {
      fail(ErrorKind::kIo, "model directory incomplete, missing " + p.string());
    }
  }
  nlohmann::json j;
  {
    std::ifstream in(manifest_path);
    if (!in) fail(ErrorKind::kIo, "cannot open " + manifest_path.string());
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kFormat, manifest_path.string() + ": " + e.what());
    }
  }

  DetectorModel model;
  std::size_t dim = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  try {
    if (j.at("format").get<std::string>() != "hftt-model") {
      fail(ErrorKind::kFormat, manifest_path.string() + ": not an hftt model manifest");
    }
    dim = j.at("dim").get<std::size_t>();
    k = j.at("K").get<std::size_t>();
    n = j.at("N").get<std::size_t>();
    model.temperature = j.at("temperature").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, manifest_path.string() + ": " + e.what());
  }

  const EmbeddingStore task = load_store(dir / "task.hemb");
  const EmbeddingStore trainable = load_store(dir / "trainable.hemb");
  if (task.count() != k) {
    fail(ErrorKind::kValidation, "manifest K=" + std::to_string(k) + " but task.hemb has " +
                                     std::to_string(task.count()) + " rows");
  }
  if (trainable.count() != n) {
    fail(ErrorKind::kValidation, "manifest N=" + std::to_string(n) +
                                     " but trainable.hemb has " +
                                     std::to_string(trainable.count()) + " rows");
  }
  if (task.dim() != dim || trainable.dim() != dim) {
    fail(ErrorKind::kValidation, "manifest dim=" + std::to_string(dim) +
                                     " disagrees with stored embeddings");
  }
  model.task = task_embeddings_from_store(task);
  model.trainable = trainable.matrix();
  model.validate();
  return model;
}

}  // namespace hftt
