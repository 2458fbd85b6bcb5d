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

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "doctest.h"
#include "hftt/embedding_store.hpp"
#include "hftt/error.hpp"
#include "oracles.hpp"

using namespace hftt;
using hftt::testing::TempDir;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected hftt::Error");
  return ErrorKind::kIo;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("embedding_store") {

TEST_CASE("hand-checked unit rows load as normalized") {
  TempDir dir;
  Matrix m(3, 4, 0.5);
  save_store(EmbeddingStore(m, {true, 0.01, Modality::kText}), dir / "q.hemb");
  const auto s = load_store(dir / "q.hemb");
  CHECK(s.count() == 3);
  CHECK(s.dim() == 4);
  CHECK(s.normalized());
  for (std::size_t i = 0; i < 3; ++i) CHECK(l2_norm(s.row(i)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random stores round-trip bit-exactly, labels in order") {
  TempDir dir;
  std::mt19937_64 rng(3);
  for (std::size_t trial = 0; trial < 10; ++trial) {
    const auto rows = hftt::testing::random_unit_rows(10, 7 + trial, rng);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < 10; ++i) labels.push_back("row " + std::to_string(i) + ", a/b");
    const EmbeddingStore s(rows, {true, 0.0123, Modality::kImage},
                           trial % 2 ? std::optional(labels) : std::nullopt);
    save_store(s, dir / "r.hemb");
    const auto back = load_store(dir / "r.hemb");
    CHECK(back == s);
    CHECK(std::filesystem::exists(dir / "r.labels.txt") == (trial % 2 == 1));
  }
}

TEST_CASE("empty store round-trips") {
  TempDir dir;
  const EmbeddingStore s(Matrix(0, 512), {true, 0.01, Modality::kSynthetic});
  save_store(s, dir / "e.hemb");
  const auto back = load_store(dir / "e.hemb");
  CHECK(back.count() == 0);
  CHECK(back.dim() == 512);
  CHECK(back == s);
}

TEST_CASE("header layout is little-endian as documented") {
  TempDir dir;
  save_store(EmbeddingStore(Matrix(2, 3, 1.0), {false, 0.5, Modality::kImage}), dir / "h.hemb");
  const std::string b = slurp(dir / "h.hemb");
  REQUIRE(b.size() == 30 + 2 * 3 * 4);
  CHECK(b.substr(0, 8) == "HFTTEMB1");
  CHECK(static_cast<unsigned char>(b[8]) == 1);   // version
  CHECK(static_cast<unsigned char>(b[12]) == 3);  // dim
  CHECK(static_cast<unsigned char>(b[16]) == 2);  // count
  CHECK(b[24] == 0);                              // normalized
  CHECK(b[25] == 1);                              // modality
  float tau;
  std::memcpy(&tau, b.data() + 26, 4);
  CHECK(tau == 0.5f);
}

TEST_CASE("bad magic, version, truncation and NaN are rejected") {
  TempDir dir;
  save_store(EmbeddingStore(Matrix(2, 4, 0.5), {true, 0.01, Modality::kText}), dir / "ok.hemb");
  const std::string good = slurp(dir / "ok.hemb");
  auto write = [&](const std::string& name, const std::string& bytes) {
    std::ofstream(dir / name, std::ios::binary) << bytes;
    return dir / name;
  };

  std::string bad_magic = good;
  bad_magic.replace(0, 8, "XXXXXXXX");
  CHECK(kind_of([&] { load_store(write("m.hemb", bad_magic)); }) == ErrorKind::kFormat);

  std::string bad_version = good;
  bad_version[8] = 2;
  CHECK(kind_of([&] { load_store(write("v.hemb", bad_version)); }) == ErrorKind::kFormat);

  CHECK(kind_of([&] { load_store(write("t.hemb", good.substr(0, good.size() - 3))); }) ==
        ErrorKind::kCorruption);
  CHECK(kind_of([&] { load_store(write("th.hemb", good.substr(0, 20))); }) ==
        ErrorKind::kCorruption);

  std::string nan = good;
  const float q = std::nanf("");
  std::memcpy(nan.data() + 30, &q, 4);
  CHECK(kind_of([&] { load_store(write("n.hemb", nan)); }) == ErrorKind::kValidation);

  CHECK(kind_of([&] { load_store(dir / "missing.hemb"); }) == ErrorKind::kIo);
}

TEST_CASE("store invariants") {
  CHECK(kind_of([] { EmbeddingStore(Matrix(1, 2, 1.0), {true, 0.01, Modality::kText}); }) ==
        ErrorKind::kValidation);
  CHECK(kind_of([] { EmbeddingStore(Matrix(1, 2, 0.0), {false, 0.0, Modality::kText}); }) ==
        ErrorKind::kValidation);
  CHECK(kind_of([] {
          EmbeddingStore(Matrix(2, 2, 0.0), {false, 0.01, Modality::kText},
                         std::vector<std::string>{"only one"});
        }) == ErrorKind::kValidation);
  const EmbeddingStore unnormalized(Matrix(1, 2, 3.0), {false, 0.01, Modality::kText});
  CHECK(unnormalized.row(0)[0] == 3.0);
}

TEST_CASE("normalize_rows") {
  const Matrix m(1, 2, std::vector<double>{3.0, 4.0});
  const Matrix n = normalize_rows(m);
  CHECK(n(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(n(0, 1) == doctest::Approx(0.8).epsilon(1e-15));

  std::mt19937_64 rng(11);
  const Matrix u = hftt::testing::random_unit_rows(20, 9, rng);
  const Matrix again = normalize_rows(u);
  for (std::size_t i = 0; i < u.data().size(); ++i) CHECK(std::abs(again.data()[i] - u.data()[i]) < 1e-7);
  const Matrix twice = normalize_rows(again);
  for (std::size_t i = 0; i < u.data().size(); ++i) CHECK(std::abs(twice.data()[i] - again.data()[i]) < 1e-7);

  Matrix z(3, 2, 1.0);
  z(1, 0) = z(1, 1) = 0.0;
  try {
    normalize_rows(z);
    FAIL("zero row accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerate);
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("build_task_embeddings") {
  const auto single = build_task_embeddings({{"dog", {{0.6, 0.8}}}});
  CHECK(single.size() == 1);
  CHECK(single.embeddings(0, 0) == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(single.embeddings(0, 1) == doctest::Approx(0.8).epsilon(1e-7));

  const auto pair = build_task_embeddings({{"a", {{1.0, 0.0}, {0.0, 1.0}}}});
  CHECK(pair.embeddings(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));
  CHECK(pair.embeddings(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-7));

  const auto two = build_task_embeddings({{"cat", {{1.0, 0.0}}}, {"bird", {{0.0, 1.0}}}});
  CHECK(two.size() == 2);
  CHECK(two.names == std::vector<std::string>{"cat", "bird"});

  std::mt19937_64 rng(5);
  const Matrix members = hftt::testing::random_unit_rows(6, 5, rng);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < 6; ++i) rows.emplace_back(members.row(i).begin(), members.row(i).end());
  const auto a = build_task_embeddings({{"g", rows}});
  std::reverse(rows.begin(), rows.end());
  std::swap(rows[1], rows[4]);
  const auto b = build_task_embeddings({{"g", rows}});
  for (std::size_t k = 0; k < 5; ++k) CHECK(a.embeddings(0, k) == doctest::Approx(b.embeddings(0, k)).epsilon(1e-7));

  CHECK(kind_of([] { build_task_embeddings({{"empty", {}}}); }) == ErrorKind::kDegenerate);
  CHECK(kind_of([] { build_task_embeddings({{"cancel", {{1.0, 0.0}, {-1.0, 0.0}}}}); }) ==
        ErrorKind::kDegenerate);
}

}  // TEST_SUITE
