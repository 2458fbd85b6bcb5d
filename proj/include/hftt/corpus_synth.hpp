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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hftt {

/// A prompt with exactly one "{}" slot, e.g. "This is a photo of a {}.".
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string pattern);

  const std::string& pattern() const noexcept { return pattern_; }

  /// Single-pass substitution; braces inside `word` are not expanded.
  std::string apply(std::string_view word) const;

 private:
  std::string pattern_;
  std::size_t slot_ = 0;
};

inline constexpr std::string_view kDefaultCorpusTemplate = "This is a photo of a {}.";

/// Ordered, case-sensitively deduplicated, non-empty words.
class WordCorpus {
 public:
  WordCorpus() = default;
  explicit WordCorpus(const std::vector<std::string>& words);

  const std::vector<std::string>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::vector<std::string> words_;
};

/// Reads newline-delimited words, dropping blank lines and later duplicates.
WordCorpus load_word_set(const std::filesystem::path& path);

/// Reads one template per non-blank line. Errors name the 0-based line index
/// of the first template missing its slot.
std::vector<PromptTemplate> load_templates(const std::filesystem::path& path);

/// Words-major, templates-minor cross product.
std::vector<std::string> word2data(const std::vector<std::string>& words,
                                   const std::vector<PromptTemplate>& templates);

/// Same contract as word2data over task class names or phrases. Use the
/// identity template "{}" to pass phrases through unchanged.
std::vector<std::string> synthesize_in_distribution(
    const std::vector<std::string>& names, const std::vector<PromptTemplate>& templates);

void write_lines(const std::vector<std::string>& lines, const std::filesystem::path& path);

}  // namespace hftt
