// tests/test_config.cc

// Copyright 2026  The ldmi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "ldmi/config.h"

using namespace ldmi;

namespace {

ExperimentConfig parse(const std::string &text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_of(const std::string &text) {
  try {
    parse(text);
  } catch (const ConfigError &e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults") {
  const ExperimentConfig c = parse("");
  CHECK(c.train.loss == LossKind::kDmi);
  CHECK(c.train.validation == ValidationMode::kFullSet);
  CHECK(c.train.include_pretrained);
  CHECK(c.train.hidden == std::vector<std::size_t>{32});
  CHECK(c.train.dataset.blobs.samples == 70000);
  CHECK(c.sweep.cases == std::vector<int>{1, 2, 3});
  CHECK(c.sweep.repetitions == 5);
}

TEST_CASE("every field is addressable") {
  const ExperimentConfig c = parse(R"(
# comment line
seed = 42
loss = ce              # trailing comment
epochs = 7
learning_rate = 1e-4
batch_size = 256
pretrain_epochs = 0
pretrain_learning_rate = 0.01
validation = batch
include_pretrained = false
grid_search = true
channel = flip:2:0>1@0.25
checkpoint = out/model.txt
optimizer.kind = sgd
optimizer.momentum = 0.8
optimizer.weight_decay = 1e-4
optimizer.beta1 = 0.85
optimizer.beta2 = 0.99
optimizer.epsilon = 1e-7
model.hidden = 16, 8
model.activation = tanh
dataset.samples = 1000
dataset.seed = 9
dataset.split = 0.8,0.1,0.1
dataset.class.0.prior = 0.3
dataset.class.0.mean = -1,0,2
dataset.class.0.variance = 1,2,3
dataset.class.1.prior = 0.7
dataset.class.1.mean = 1,1,1
sweep.cases = 2,3
sweep.r = 0, 0.5
sweep.repetitions = 3
sweep.threads = 4
)");
  const TrainConfig &t = c.train;
  CHECK(t.seed == 42);
  CHECK(t.loss == LossKind::kCe);
  CHECK(t.epochs == 7);
  CHECK(t.learning_rate == 1e-4);
  CHECK(t.batch_size == 256);
  CHECK(t.pretrain_epochs == 0);
  CHECK(t.pretrain_learning_rate == 0.01);
  CHECK(t.validation == ValidationMode::kRandomBatch);
  CHECK_FALSE(t.include_pretrained);
  CHECK(t.grid_search);
  CHECK(t.channel == "flip:2:0>1@0.25");
  CHECK(t.checkpoint_path == "out/model.txt");
  CHECK(t.optimizer.kind == OptimizerKind::kSgdMomentum);
  CHECK(t.optimizer.momentum == 0.8);
  CHECK(t.optimizer.weight_decay == 1e-4);
  CHECK(t.optimizer.beta1 == 0.85);
  CHECK(t.optimizer.beta2 == 0.99);
  CHECK(t.optimizer.epsilon == 1e-7);
  CHECK(t.hidden == std::vector<std::size_t>{16, 8});
  CHECK(t.activation == Activation::kTanh);
  CHECK(t.dataset.blobs.samples == 1000);
  CHECK(t.dataset.seed == 9u);
  CHECK(t.dataset.fractions == std::array<double, 3>{0.8, 0.1, 0.1});
  REQUIRE(t.dataset.blobs.classes.size() == 2);
  CHECK(t.dataset.blobs.classes[0].mean == std::vector<double>{-1, 0, 2});
  CHECK(t.dataset.blobs.classes[0].variance == std::vector<double>{1, 2, 3});
  CHECK(t.dataset.blobs.classes[1].variance == std::vector<double>{1, 1, 1});
  CHECK(c.sweep.cases == std::vector<int>{2, 3});
  CHECK(c.sweep.r_values == std::vector<double>{0, 0.5});
  CHECK(c.sweep.repetitions == 3);
  CHECK(c.sweep.threads == 4);

  SUBCASE("write_config round trip") {
    std::ostringstream os;
    write_config(os, t);
    const ExperimentConfig back = parse(os.str());
    std::ostringstream again;
    write_config(again, back.train);
    CHECK(again.str() == os.str());
    CHECK(back.train.learning_rate == t.learning_rate);
    CHECK(back.train.dataset.fractions == t.dataset.fractions);
  }
}

TEST_CASE("idx datasets") {
  const ExperimentConfig c = parse("dataset.kind = idx\ndataset.images = a.idx\ndataset.labels = b.idx\n"
                                   "dataset.positive_classes = 8\n");
  CHECK(c.train.dataset.kind == DatasetSpec::Kind::kIdx);
  CHECK(c.train.dataset.positive_classes == std::vector<Label>{8});
  CHECK(c.train.hidden == std::vector<std::size_t>{64});
  CHECK(parse("dataset.kind = idx\ndataset.images = a\ndataset.labels = b\nmodel.hidden = 5\n").train.hidden ==
        std::vector<std::size_t>{5});
  CHECK(parse("model.hidden = none\n").train.hidden.empty());
  CHECK(error_of("dataset.kind = idx\n").find("dataset.images") != std::string::npos);
}

TEST_CASE("rejections name the line") {
  CHECK(error_of("seed = 1\nbogus = 3\n").find("line 2") != std::string::npos);
  CHECK(error_of("seed = 1\nbogus = 3\n").find("unknown key 'bogus'") != std::string::npos);
  CHECK(error_of("optimizer.nesterov = true\n").find("unknown key") != std::string::npos);
  CHECK(error_of("epochs = 3\nepochs = 4\n").find("already set on line 1") != std::string::npos);
  CHECK(error_of("epochs 3\n").find("key = value") != std::string::npos);
  CHECK_FALSE(error_of("epochs = -3\n").empty());
  CHECK_FALSE(error_of("epochs = 3.5\n").empty());
  CHECK_FALSE(error_of("learning_rate = fast\n").empty());
  CHECK_FALSE(error_of("learning_rate = nan\n").empty());
  CHECK_FALSE(error_of("loss = mse\n").empty());
  CHECK_FALSE(error_of("validation = sometimes\n").empty());
  CHECK_FALSE(error_of("include_pretrained = maybe\n").empty());
  CHECK_FALSE(error_of("optimizer.kind = rmsprop\n").empty());
  CHECK_FALSE(error_of("model.activation = gelu\n").empty());
  CHECK_FALSE(error_of("dataset.split = 0.5,0.5\n").empty());
  CHECK_FALSE(error_of("sweep.cases = 4\n").empty());
  CHECK_FALSE(error_of("dataset.class.1.prior = 1\n").empty());          // class 0 missing
  CHECK_FALSE(error_of("dataset.class.0.prior = 0.5\ndataset.class.1.prior = 0.5\n").empty());  // no means
  CHECK_FALSE(error_of("dataset.class.0.shape = 2\n").empty());
  CHECK_FALSE(error_of("dataset.class.0.prior = 0.5\ndataset.class.0.mean = 0\n"
                       "dataset.class.1.prior = 0.4\ndataset.class.1.mean = 1\n")
                  .empty());  // priors do not sum to 1
  CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), ConfigError);
}
