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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "hftt/error.hpp"
#include "hftt/metrics.hpp"
#include "hftt/scoring.hpp"
#include "oracles.hpp"

using namespace hftt;
using namespace hftt::testing;

namespace {

TaskEmbeddings orthogonal_tasks(std::size_t k, std::size_t dim) {
  TaskEmbeddings t;
  t.embeddings = Matrix(k, dim);
  for (std::size_t i = 0; i < k; ++i) {
    t.embeddings(i, i) = 1.0;
    t.names.push_back("task" + std::to_string(i));
  }
  return t;
}

EmbeddingStore store_of(std::vector<std::vector<double>> rows, std::vector<std::string> labels = {}) {
  Matrix m;
  for (const auto& r : rows) m.append_row(r);
  std::optional<std::vector<std::string>> l;
  if (!labels.empty()) l = labels;
  return EmbeddingStore(std::move(m), {true, 0.01, Modality::kImage}, l);
}

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("method names") {
  for (auto m : {ScoreMethod::kHftt, ScoreMethod::kMsp, ScoreMethod::kMaxLogit, ScoreMethod::kEnergy, ScoreMethod::kMcm}) {
    CHECK(parse_score_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_score_method("knn"), Error);
}

TEST_CASE("msp: one-hot input, two orthogonal tasks, temperature 1") {
  const auto s = score_baseline(ScoreMethod::kMsp, orthogonal_tasks(2, 3), store_of({{1, 0, 0}}), 1.0);
  CHECK(s.scores[0] == doctest::Approx(1.0 - std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-12));
  CHECK(s.scores[0] == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK(s.method == ScoreMethod::kMsp);
  CHECK(s.convention == std::string(kScoreConvention));
}

TEST_CASE("maxlogit: cosine extremes") {
  const auto task = orthogonal_tasks(2, 3);
  const auto s = score_baseline(ScoreMethod::kMaxLogit, task, store_of({{0, 0, 1}, {1, 0, 0}}), 0.01);
  CHECK(s.scores[0] == 0.0);
  CHECK(s.scores[1] == doctest::Approx(-100.0).epsilon(1e-12));
}

TEST_CASE("energy and mcm formulas") {
  const auto task = orthogonal_tasks(2, 3);
  const auto x = store_of({{1, 0, 0}});
  const auto e = score_baseline(ScoreMethod::kEnergy, task, x, 0.5);
  CHECK(e.scores[0] == doctest::Approx(-std::log(std::exp(2.0) + 1.0)).epsilon(1e-12));
  const auto msp = score_baseline(ScoreMethod::kMsp, task, x, 1.0);
  const auto mcm = score_baseline(ScoreMethod::kMcm, task, x, 1.0);
  CHECK(msp.scores == mcm.scores);
}

TEST_CASE("softmax methods need two tasks") {
  const auto task = orthogonal_tasks(1, 3);
  const auto x = store_of({{1, 0, 0}});
  CHECK_THROWS_AS(score_baseline(ScoreMethod::kMsp, task, x, 1.0), Error);
  CHECK_THROWS_AS(score_baseline(ScoreMethod::kMcm, task, x, 1.0), Error);
  CHECK_NOTHROW(score_baseline(ScoreMethod::kMaxLogit, task, x, 1.0));
  CHECK_NOTHROW(score_baseline(ScoreMethod::kEnergy, task, x, 1.0));
  CHECK_THROWS_AS(score_baseline(ScoreMethod::kHftt, task, x, 1.0), Error);
}

TEST_CASE("hftt: task direction scores near 0, trainable direction near 1") {
  DetectorModel m;
  m.task = orthogonal_tasks(2, 4);
  m.trainable = Matrix(1, 4, std::vector<double>{0, 0, 1, 0});
  m.temperature = 0.01;
  const auto s = score_hftt(m, store_of({{1, 0, 0, 0}, {0, 0, 1, 0}}, {"cat", "weapon"}));
  CHECK(s.scores[0] < 1e-40);
  CHECK(s.scores[1] > 1.0 - 1e-15);
  CHECK(s.scores[1] < 1.0);
  CHECK(s.ids == std::vector<std::string>{"cat", "weapon"});
  CHECK(score_hftt(m, EmbeddingStore(Matrix(0, 4), {})).size() == 0);
  CHECK_THROWS_AS(score_hftt(m, store_of({{1, 0, 0}})), Error);
}

TEST_CASE("hftt scores lie in (0,1); permutation equivariance") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(12, 3, 5, trial % 2 ? 0.01 : 1.0, rng);
    const Matrix x = random_unit_rows(50, 12, rng);
    const auto s = score_hftt(m, EmbeddingStore(x, {}));
    for (double v : s.scores) CHECK((v > 0.0 && v < 1.0));

    std::vector<std::size_t> perm(50);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix xp;
    for (auto p : perm) xp.append_row(x.row(p));
    const auto sp = score_hftt(m, EmbeddingStore(xp, {}));
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(sp.scores[i] == s.scores[perm[i]]);
    for (auto method : {ScoreMethod::kMsp, ScoreMethod::kEnergy}) {
      const auto b = score_baseline(method, m.task, EmbeddingStore(x, {}), 0.1);
      const auto bp = score_baseline(method, m.task, EmbeddingStore(xp, {}), 0.1);
      for (std::size_t i = 0; i < perm.size(); ++i) CHECK(bp.scores[i] == b.scores[perm[i]]);
    }
  }
}

TEST_CASE("maxlogit ranking does not depend on temperature") {
  std::mt19937_64 rng(4);
  const auto m = random_model(10, 4, 1, 1.0, rng);
  const EmbeddingStore x(random_unit_rows(200, 10, rng), {});
  auto order = [&](double tau) {
    const auto s = score_baseline(ScoreMethod::kMaxLogit, m.task, x, tau).scores;
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s[a] < s[b]; });
    return idx;
  };
  const auto ref = order(1.0);
  for (double tau : {0.01, 0.07, 3.0}) CHECK(order(tau) == ref);
}

TEST_CASE("every baseline ranks the fixture's out-distribution images higher") {
  const auto sample = sample_bimodal(default_bimodal_config(32, 2000, 0.3, 42));
  auto cfg = default_bimodal_config(32);
  std::vector<double> other(32, 0.0);
  other[5] = 1.0;
  const auto task = build_task_embeddings({{"in", {cfg.mean_u_minus}}, {"other", {other}}});
  for (auto method : {ScoreMethod::kMsp, ScoreMethod::kMaxLogit, ScoreMethod::kEnergy, ScoreMethod::kMcm}) {
    const double tau = method == ScoreMethod::kMcm ? 1.0 : 0.01;
    const auto id = score_baseline(method, task, sample.v_minus, tau);
    const auto ood = score_baseline(method, task, sample.v_plus, tau);
    CAPTURE(to_string(method));
    CHECK(auroc(id.scores, ood.scores) > 0.5);
  }
}

TEST_CASE("csv round-trip") {
  TempDir dir;
  ScoreSet s;
  s.method = ScoreMethod::kEnergy;
  s.scores = {0.1, -1.0 / 3.0, 1e-300};
  s.ids = {"a", "with,comma", "with \"quote\""};
  export_scores(s, dir / "s.csv");
  std::ifstream in(dir / "s.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "id,score");
  const auto back = import_scores(dir / "s.csv");
  CHECK(back.scores == s.scores);
  CHECK(back.ids == s.ids);
  CHECK(back.method == ScoreMethod::kUnknown);
  CHECK_THROWS_AS(import_scores(dir / "missing.csv"), Error);
}

TEST_CASE("csv: 10k rows read back by python's csv module") {
  TempDir dir;
  ScoreSet s;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10000; ++i) {
    s.scores.push_back(g(rng) * std::pow(10.0, i % 40 - 20));
    s.ids.push_back(i % 7 == 0 ? "img,\"" + std::to_string(i) + "\"" : "img" + std::to_string(i));
  }
  export_scores(s, dir / "big.csv");
  const std::string cmd =
      "python3 -c \"import csv,sys; r=list(csv.reader(open(sys.argv[1], newline=''))); "
      "assert r[0]==['id','score']; assert all(len(x)==2 for x in r); "
      "print(len(r)-1, repr(sum(float(x[1]) for x in r[1:])), sum(1 for x in r[1:] if ',' in x[0]))\" " +
      (dir / "big.csv").string();
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[256] = {};
  const bool got = std::fgets(buf, sizeof buf, p) != nullptr;
  const int rc = pclose(p);
  REQUIRE(got);
  CHECK(rc == 0);
  std::size_t rows = 0, commas = 0;
  double sum = 0.0;
  char sum_text[128] = {};
  REQUIRE(std::sscanf(buf, "%zu %127s %zu", &rows, sum_text, &commas) == 3);
  sum = std::strtod(sum_text, nullptr);
  CHECK(rows == 10000);
  CHECK(commas == 1429);
  double expected = 0.0;
  for (double v : s.scores) expected += v;
  CHECK(sum == expected);
}

}  // TEST_SUITE
