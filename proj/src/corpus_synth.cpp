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

#include "hftt/corpus_synth.hpp"

#include <fstream>
#include <unordered_set>

#include "hftt/error.hpp"

namespace hftt {
namespace {

std::vector<std::string> read_nonblank_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(std::move(line));
  }
  if (in.bad()) fail(ErrorKind::kIo, "read failed: " + path.string());
  return lines;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string pattern) : pattern_(std::move(pattern)) {
  slot_ = pattern_.find("{}");
  if (slot_ == std::string::npos) {
    fail(ErrorKind::kValidation, "template \"" + pattern_ + "\" has no {} placeholder");
  }
  if (pattern_.find("{}", slot_ + 2) != std::string::npos) {
    fail(ErrorKind::kValidation,
         "template \"" + pattern_ + "\" has more than one {} placeholder");
  }
}

std::string PromptTemplate::apply(std::string_view word) const {
  std::string out;
  out.reserve(pattern_.size() + word.size());
  out.append(pattern_, 0, slot_);
  out.append(word);
  out.append(pattern_, slot_ + 2);
  return out;
}

WordCorpus::WordCorpus(const std::vector<std::string>& words) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(words.size());
  for (const auto& w : words) {
    if (w.empty()) continue;
    if (seen.insert(w).second) words_.push_back(w);
  }
}

WordCorpus load_word_set(const std::filesystem::path& path) {
  WordCorpus corpus(read_nonblank_lines(path));
  if (corpus.size() == 0) fail(ErrorKind::kValidation, path.string() + ": word set is empty");
  return corpus;
}

std::vector<PromptTemplate> load_templates(const std::filesystem::path& path) {
  const auto lines = read_nonblank_lines(path);
  if (lines.empty()) fail(ErrorKind::kValidation, path.string() + ": no templates");
  std::vector<PromptTemplate> templates;
  templates.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      templates.emplace_back(lines[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "template " + std::to_string(i) + ": " + e.what());
    }
  }
  return templates;
}

std::vector<std::string> word2data(const std::vector<std::string>& words,
                                   const std::vector<PromptTemplate>& templates) {
  if (templates.empty()) fail(ErrorKind::kValidation, "no prompt templates given");
  std::vector<std::string> out;
  out.reserve(words.size() * templates.size());
  for (const auto& w : words) {
    for (const auto& t : templates) out.push_back(t.apply(w));
  }
  return out;
}

std::vector<std::string> synthesize_in_distribution(
    const std::vector<std::string>& names, const std::vector<PromptTemplate>& templates) {
  if (names.empty()) fail(ErrorKind::kValidation, "no in-distribution names given");
  return word2data(names, templates);
}

void write_lines(const std::vector<std::string>& lines, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  for (const auto& line : lines) out << line << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

}  // namespace hftt
