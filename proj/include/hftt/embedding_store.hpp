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

// Embedding matrices exchanged with the encoder exporter, and the .hemb
// on-disk format.
//
// Layout (little-endian):
//   bytes 0-7   magic "HFTTEMB1"
//   u32         version (1)
//   u32         dim
//   u64         count
//   u8          normalized (0/1)
//   u8          modality (0=text, 1=image, 2=synthetic)
//   f32         temperature
//   f32[count*dim] row-major payload
//
// Optional sidecar "<stem>.labels.txt" holds one label per line.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hftt/matrix.hpp"

namespace hftt {

inline constexpr double kDefaultTemperature = 0.01;
inline constexpr double kUnitNormTolerance = 1e-4;
inline constexpr std::uint32_t kHembVersion = 1;

enum class Modality : std::uint8_t { kText = 0, kImage = 1, kSynthetic = 2 };

const char* to_string(Modality m) noexcept;

/// Immutable set of embeddings with its manifest.
///
/// Values are held in double precision but are always exactly representable
/// as 32-bit floats (the constructor rounds them), so a save/load cycle is
/// bit-exact.
class EmbeddingStore {
 public:
  struct Manifest {
    bool normalized = true;
    double temperature = kDefaultTemperature;
    Modality modality = Modality::kText;
  };

  EmbeddingStore() = default;

  /// Validates every invariant; throws hftt::Error on violation.
  EmbeddingStore(Matrix matrix, Manifest manifest,
                 std::optional<std::vector<std::string>> labels = std::nullopt);

  std::size_t dim() const noexcept { return matrix_.cols(); }
  std::size_t count() const noexcept { return matrix_.rows(); }
  bool normalized() const noexcept { return manifest_.normalized; }
  double temperature() const noexcept { return manifest_.temperature; }
  Modality modality() const noexcept { return manifest_.modality; }
  const Manifest& manifest() const noexcept { return manifest_; }

  const Matrix& matrix() const noexcept { return matrix_; }
  std::span<const double> row(std::size_t i) const noexcept { return matrix_.row(i); }
  const std::optional<std::vector<std::string>>& labels() const noexcept {
    return labels_;
  }

  /// Label of row `i`, or its decimal index when the store is unlabeled.
  std::string id(std::size_t i) const;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b);

 private:
  Matrix matrix_;
  Manifest manifest_;
  std::optional<std::vector<std::string>> labels_;
};

EmbeddingStore load_store(const std::filesystem::path& path);

/// Writes through a temporary file and renames it into place. A labels
/// sidecar is written when the store has labels and removed otherwise.
void save_store(const EmbeddingStore& store, const std::filesystem::path& path);

std::filesystem::path labels_path_for(const std::filesystem::path& hemb_path);

/// Returns a copy with every row scaled to unit L2 norm.
Matrix normalize_rows(const Matrix& matrix);

struct TaskEmbeddings {
  Matrix embeddings;  // K x dim, unit rows
  std::vector<std::string> names;

  std::size_t size() const noexcept { return embeddings.rows(); }
  std::size_t dim() const noexcept { return embeddings.cols(); }

  friend bool operator==(const TaskEmbeddings&, const TaskEmbeddings&) = default;
};

using EmbeddingGroup = std::pair<std::string, std::vector<std::vector<double>>>;

/// Prompt ensembling: each group's members are averaged and the mean is
/// renormalized. Members are expected to be unit vectors already. Outputs are
/// rounded to storage precision so a saved model reloads bit-exactly.
TaskEmbeddings build_task_embeddings(const std::vector<EmbeddingGroup>& groups);

/// Interprets every row of `store` as one task embedding, named by label.
TaskEmbeddings task_embeddings_from_store(const EmbeddingStore& store);

EmbeddingStore task_embeddings_to_store(const TaskEmbeddings& task, double temperature);

/// Rounds to the nearest 32-bit float, the on-disk precision.
double round_to_storage(double v) noexcept;

}  // namespace hftt
