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

#include "hftt/embedding_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hftt/error.hpp"

namespace hftt {
namespace {

constexpr std::array<char, 8> kMagic = {'H', 'F', 'T', 'T', 'E', 'M', 'B', '1'};
constexpr std::size_t kHeaderSize = 8 + 4 + 4 + 8 + 1 + 1 + 4;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void put_le(std::string& out, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.append(bytes.data(), bytes.size());
}

template <typename T>
T get_le(const char* src) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  return std::bit_cast<T>(bytes);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::kIo, "read failed: " + path.string());
  return bytes;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorKind::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::kIo, "cannot rename into " + path.string());
  }
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    labels.push_back(std::move(line));
  }
  return labels;
}

}  // namespace

const char* to_string(Modality m) noexcept {
  switch (m) {
    case Modality::kText:
      return "text";
    case Modality::kImage:
      return "image";
    case Modality::kSynthetic:
      return "synthetic";
  }
  return "unknown";
}

double round_to_storage(double v) noexcept {
  return static_cast<double>(static_cast<float>(v));
}

EmbeddingStore::EmbeddingStore(Matrix matrix, Manifest manifest,
                               std::optional<std::vector<std::string>> labels)
    : matrix_(std::move(matrix)), manifest_(manifest), labels_(std::move(labels)) {
  if (matrix_.cols() == 0) fail(ErrorKind::kValidation, "store dim must be positive");
  if (!(manifest_.temperature > 0.0) || !std::isfinite(manifest_.temperature)) {
    fail(ErrorKind::kValidation, "store temperature must be a positive finite value");
  }
  manifest_.temperature = round_to_storage(manifest_.temperature);
  for (double& v : matrix_.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::kValidation, "store contains NaN/Inf entries");
    v = round_to_storage(v);
  }
  if (manifest_.normalized) {
    for (std::size_t i = 0; i < matrix_.rows(); ++i) {
      const double norm = l2_norm(matrix_.row(i));
      if (std::abs(norm - 1.0) > kUnitNormTolerance) {
        std::ostringstream msg;
        msg << "row " << i << " has norm " << norm << " in a normalized store";
        fail(ErrorKind::kValidation, msg.str());
      }
    }
  }
  if (labels_) {
    if (labels_->size() != matrix_.rows()) {
      fail(ErrorKind::kValidation, "label count " + std::to_string(labels_->size()) +
                                       " != row count " + std::to_string(matrix_.rows()));
    }
    for (const auto& label : *labels_) {
      if (label.find('\n') != std::string::npos) {
        fail(ErrorKind::kValidation, "labels may not contain newlines");
      }
    }
  }
}

std::string EmbeddingStore::id(std::size_t i) const {
  return labels_ ? (*labels_)[i] : std::to_string(i);
}

bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
  return a.matrix_ == b.matrix_ && a.manifest_.normalized == b.manifest_.normalized &&
         a.manifest_.temperature == b.manifest_.temperature &&
         a.manifest_.modality == b.manifest_.modality && a.labels_ == b.labels_;
}

std::filesystem::path labels_path_for(const std::filesystem::path& hemb_path) {
  auto p = hemb_path;
  p.replace_extension(".labels.txt");
  return p;
}

EmbeddingStore load_store(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < kMagic.size() ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    fail(ErrorKind::kFormat, path.string() + ": bad magic, not an .hemb file");
  }
  if (bytes.size() < kHeaderSize) {
    fail(ErrorKind::kCorruption, path.string() + ": truncated header");
  }
  const char* p = bytes.data() + kMagic.size();
  const auto version = get_le<std::uint32_t>(p);
  p += 4;
  if (version != kHembVersion) {
    fail(ErrorKind::kFormat,
         path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto dim = get_le<std::uint32_t>(p);
  p += 4;
  const auto count = get_le<std::uint64_t>(p);
  p += 8;
  const auto normalized = static_cast<std::uint8_t>(*p++);
  const auto modality = static_cast<std::uint8_t>(*p++);
  const auto temperature = get_le<float>(p);
  p += 4;

  if (dim == 0) fail(ErrorKind::kFormat, path.string() + ": dim is zero");
  if (normalized > 1) fail(ErrorKind::kFormat, path.string() + ": bad normalized flag");
  if (modality > 2) fail(ErrorKind::kFormat, path.string() + ": bad modality code");

  const std::size_t payload = bytes.size() - kHeaderSize;
  if (count > payload / sizeof(float) / dim ||
      payload != count * dim * sizeof(float)) {
    fail(ErrorKind::kCorruption, path.string() + ": payload is " +
                                     std::to_string(payload) + " bytes, expected " +
                                     std::to_string(count) + "x" + std::to_string(dim) +
                                     " floats");
  }

  std::vector<double> values(count * dim);
  for (std::size_t i = 0; i < values.size(); ++i, p += 4) {
    const float v = get_le<float>(p);
    if (!std::isfinite(v)) {
      fail(ErrorKind::kValidation, path.string() + ": non-finite value in row " +
                                       std::to_string(i / dim));
    }
    values[i] = v;
  }

  std::optional<std::vector<std::string>> labels;
  const auto lp = labels_path_for(path);
  if (std::filesystem::exists(lp)) labels = read_labels(lp);

  EmbeddingStore::Manifest manifest;
  manifest.normalized = normalized == 1;
  manifest.modality = static_cast<Modality>(modality);
  manifest.temperature = temperature;
  try {
    return EmbeddingStore(Matrix(count, dim, std::move(values)), manifest,
                          std::move(labels));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::string bytes;
  bytes.reserve(kHeaderSize + store.count() * store.dim() * sizeof(float));
  bytes.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(bytes, kHembVersion);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(store.dim()));
  put_le<std::uint64_t>(bytes, store.count());
  bytes.push_back(static_cast<char>(store.normalized() ? 1 : 0));
  bytes.push_back(static_cast<char>(store.modality()));
  put_le<float>(bytes, static_cast<float>(store.temperature()));
  for (double v : store.matrix().data()) put_le<float>(bytes, static_cast<float>(v));

  write_file_atomically(path, bytes);

  const auto lp = labels_path_for(path);
  if (store.labels()) {
    std::string text;
    for (const auto& label : *store.labels()) {
      text += label;
      text += '\n';
    }
    write_file_atomically(lp, text);
  } else {
    std::error_code ec;
    std::filesystem::remove(lp, ec);
  }
}

Matrix normalize_rows(const Matrix& matrix) {
  Matrix out = matrix;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    if (normalize_in_place(out.row(i)) == 0.0) {
      fail(ErrorKind::kDegenerate, "row " + std::to_string(i) + " is all zeros");
    }
  }
  return out;
}

TaskEmbeddings build_task_embeddings(const std::vector<EmbeddingGroup>& groups) {
  if (groups.empty()) fail(ErrorKind::kValidation, "no task groups given");
  TaskEmbeddings task;
  for (const auto& [name, members] : groups) {
    if (members.empty()) fail(ErrorKind::kDegenerate, "task group '" + name + "' is empty");
    const std::size_t dim = members.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& m : members) {
      if (m.size() != dim) {
        fail(ErrorKind::kValidation, "task group '" + name + "' mixes dimensions");
      }
      for (std::size_t k = 0; k < dim; ++k) mean[k] += m[k];
    }
    for (double& v : mean) v /= static_cast<double>(members.size());
    if (l2_norm(mean) < 1e-8) {
      fail(ErrorKind::kDegenerate, "task group '" + name + "' averages to ~zero");
    }
    normalize_in_place(mean);
    for (double& v : mean) v = round_to_storage(v);
    task.embeddings.append_row(mean);
    task.names.push_back(name);
  }
  return task;
}

TaskEmbeddings task_embeddings_from_store(const EmbeddingStore& store) {
  if (store.count() == 0) fail(ErrorKind::kValidation, "task store is empty");
  TaskEmbeddings task;
  task.embeddings = store.matrix();
  if (!store.normalized()) {
    task.embeddings = normalize_rows(task.embeddings);
    for (double& v : task.embeddings.data()) v = round_to_storage(v);
  }
  for (std::size_t i = 0; i < store.count(); ++i) {
    task.names.push_back(store.labels() ? store.id(i) : "task_" + std::to_string(i));
  }
  return task;
}

EmbeddingStore task_embeddings_to_store(const TaskEmbeddings& task, double temperature) {
  EmbeddingStore::Manifest manifest{true, temperature, Modality::kText};
  return EmbeddingStore(task.embeddings, manifest, task.names);
}

}  // namespace hftt
