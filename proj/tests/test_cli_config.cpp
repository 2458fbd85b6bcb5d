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

#include <fstream>

#include "doctest.h"
#include "hftt/cli_config.hpp"
#include "hftt/error.hpp"
#include "oracles.hpp"

using namespace hftt;

TEST_SUITE("cli_config") {

TEST_CASE("key = value parsing") {
  const auto kv = parse_key_values("# comment\nbatch_size = 64\n\n  lr=0.5   # trailing\nseed=3\nseed=4\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("batch_size") == "64");
  CHECK(kv.at("lr") == "0.5");
  CHECK(kv.at("seed") == "4");
  CHECK_THROWS_AS(parse_key_values("batch_size 64"), Error);
  CHECK_THROWS_AS(parse_key_values("= 3"), Error);
}

TEST_CASE("every key reaches the config") {
  TrainConfig cfg;
  apply_key_values(cfg, {{"batch_size", "32"}, {"learning_rate", "0.25"}, {"epochs", "2"},
                         {"n_trainable", "5"}, {"lambda", "0.5"}, {"gamma", "2"},
                         {"seed", "9"}, {"renormalize", "no"}, {"loss_variant", "original"},
                         {"init", "corpus_mean_perturbed"}, {"sampling", "iid"},
                         {"reduction", "sum"}, {"temperature", "0.07"}});
  CHECK(cfg.batch_size == 32);
  CHECK(cfg.learning_rate == 0.25);
  CHECK(cfg.epochs == 2);
  CHECK(cfg.n_trainable == 5);
  CHECK(cfg.lambda == 0.5);
  CHECK(cfg.gamma == 2.0);
  CHECK(cfg.seed == 9);
  CHECK_FALSE(cfg.renormalize);
  CHECK(cfg.loss_variant == LossVariant::kOriginal);
  CHECK(cfg.init == InitKind::kCorpusMeanPerturbed);
  CHECK(cfg.sampling == CorpusSampling::kIid);
  CHECK(cfg.reduction == Reduction::kSum);
  CHECK(cfg.temperature == 0.07);

  apply_key_values(cfg, {{"lr", "1"}, {"N", "7"}});
  CHECK(cfg.learning_rate == 1.0);
  CHECK(cfg.n_trainable == 7);
  CHECK(train_config_keys().size() == 13);
}

TEST_CASE("rejects unknown keys and bad values") {
  TrainConfig cfg;
  CHECK_THROWS_AS(apply_key_values(cfg, {{"batchsize", "3"}}), Error);
  CHECK_THROWS_AS(apply_key_values(cfg, {{"batch_size", "3x"}}), Error);
  CHECK_THROWS_AS(apply_key_values(cfg, {{"renormalize", "maybe"}}), Error);
  CHECK_THROWS_AS(apply_key_values(cfg, {{"loss_variant", "hinge"}}), Error);
  CHECK_THROWS_AS(read_key_values("/nonexistent/cfg.txt"), Error);
}

TEST_CASE("reads files") {
  testing::TempDir dir;
  std::ofstream(dir / "c.txt") << "gamma = 3\n";
  CHECK(read_key_values(dir / "c.txt").at("gamma") == "3");
}

}  // TEST_SUITE
