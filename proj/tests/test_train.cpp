#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "fixtures.hpp"
#include "nestner/models/serialization.hpp"
#include "nestner/train/trainer.hpp"
#include "synthetic.hpp"

using namespace nestner;

namespace {

std::filesystem::path temp_dir() {
  const char* env = std::getenv("NESTNER_TMP");
  std::filesystem::path dir = env ? env : std::filesystem::temp_directory_path() / "nestner_test";
  dir /= "train";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("Adam first step moves by the learning rate") {
  nn::Parameters params;
  auto w = params.add("w", nn::Matrix::Zero(2, 1));
  train::OptimizerConfig config;
  config.learning_rate = 0.1;
  train::Adam adam(params, config);
  nn::Gradients grads(params);
  grads.accumulate(w, nn::Matrix::Constant(2, 1, 1.0));
  adam.step(params, grads);
  CHECK(params.value(w)(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(adam.steps() == 1);
  CHECK(adam.first_moment(w)(0, 0) == doctest::Approx(0.1));
  CHECK(adam.second_moment(w)(0, 0) == doctest::Approx(0.02));
}

TEST_CASE("lazy updates leave untouched rows bit-identical") {
  for (bool lazy : {true, false}) {
    nn::Parameters params;
    auto table = params.add("table", nn::Matrix::Constant(3, 2, 0.5));
    train::OptimizerConfig config;
    config.lazy = lazy;
    train::Adam adam(params, config);
    nn::Gradients grads(params);
    grads.accumulate_row(table, 0, nn::Vector::Constant(2, 1.0));
    adam.step(params, grads);
    grads.clear();
    grads.accumulate_row(table, 1, nn::Vector::Constant(2, 1.0));
    adam.step(params, grads);
    CHECK(params.value(table)(2, 0) == 0.5);
    if (lazy) {
      CHECK(adam.first_moment(table)(0, 0) == doctest::Approx(0.1));
      CHECK(adam.first_moment(table).row(2).isZero());
    } else {
      // momentum keeps moving row 0 on the second step
      CHECK(adam.first_moment(table)(0, 0) == doctest::Approx(0.09));
    }
  }
}

TEST_CASE("non-finite gradients are rejected without touching parameters") {
  nn::Parameters params;
  auto a = params.add("a", nn::Matrix::Constant(2, 1, 1.0));
  auto b = params.add("b", nn::Matrix::Constant(2, 1, 1.0));
  train::Adam adam(params, {});
  nn::Gradients grads(params);
  grads.accumulate(a, nn::Matrix::Constant(2, 1, 1.0));
  grads.accumulate_row(b, 1, nn::Vector::Constant(1, std::nan("")));
  try {
    adam.step(params, grads);
    FAIL("expected NonFiniteGradient");
  } catch (const train::NonFiniteGradient& e) {
    CHECK(e.parameter() == "b");
  }
  CHECK(params.value(a)(0, 0) == 1.0);
  CHECK(adam.steps() == 0);
}

TEST_CASE("optimizer and regularization configs validate") {
  train::OptimizerConfig bad;
  bad.beta2 = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  train::RegularizationConfig reg;
  reg.dropout_rate = 1.0;
  CHECK_THROWS_AS(reg.validate(), Error);
  train::TrainConfig tc;
  tc.batch_size = 0;
  CHECK_THROWS_AS(tc.validate(), Error);
}

TEST_CASE("bernoulli and word dropout rates") {
  nn::Rng rng(1);
  std::size_t hits = 0;
  for (int i = 0; i < 20000; ++i) hits += train::bernoulli(0.2, rng);
  CHECK(std::abs(hits / 20000.0 - 0.2) < 0.015);
  CHECK_FALSE(train::bernoulli(0.0, rng));

  std::vector<std::size_t> ids(10000, 7);
  auto out = train::word_dropout(ids, 0.2, 1, rng);
  auto dropped = std::count(out.begin(), out.end(), 1u);
  CHECK(std::count(out.begin(), out.end(), 7u) + dropped == 10000);
  CHECK(std::abs(dropped / 10000.0 - 0.2) < 0.02);
  CHECK(train::word_dropout(ids, 0.0, 1, rng) == ids);
}

TEST_CASE("inverted dropout") {
  nn::Parameters params;
  nn::Graph g(params);
  nn::Rng rng(2);
  auto x = g.input(nn::Matrix::Ones(1000, 1));
  nn::Matrix y = g.value(train::dropout(g, x, 0.5, rng));
  std::size_t zeros = 0;
  for (nn::Index i = 0; i < y.rows(); ++i) {
    CHECK((y(i, 0) == 0.0 || y(i, 0) == 2.0));
    zeros += y(i, 0) == 0.0;
  }
  CHECK(zeros > 420);
  CHECK(zeros < 580);
  CHECK(g.value(train::dropout(g, x, 0.0, rng)) == nn::Matrix::Ones(1000, 1));
}

TEST_CASE("batches partition the data and repeat under a seed") {
  std::vector<std::size_t> lengths;
  for (std::size_t i = 0; i < 150; ++i) lengths.push_back(1 + (i * 37) % 23);
  nn::Rng a(4), b(4);
  auto batches = train::make_batches(lengths, 8, a);
  CHECK(batches == train::make_batches(lengths, 8, b));
  std::multiset<std::size_t> seen;
  for (const auto& batch : batches) {
    CHECK(batch.size() <= 8);
    CHECK_FALSE(batch.empty());
    seen.insert(batch.begin(), batch.end());
  }
  CHECK(seen.size() == 150);
  CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == 150);
  std::size_t full = std::count_if(batches.begin(), batches.end(), [](const auto& x) { return x.size() == 8; });
  CHECK(full >= 150 / 8 - 2);
}

TEST_CASE("epoch metrics serialize as one JSON line") {
  train::EpochMetrics m{3, 1.5, std::nullopt};
  auto j = nlohmann::json::parse(m.to_json());
  CHECK(j["epoch"] == 3);
  CHECK(j["train_loss"] == 1.5);
  CHECK(j["dev_f1"].is_null());
  m.dev_f1 = 0.75;
  CHECK(nlohmann::json::parse(m.to_json())["dev_f1"] == 0.75);
  CHECK(m.to_json().find('\n') == std::string::npos);
}

TEST_CASE("training repeats exactly under a seed") {
  auto data = testing::synthetic_corpus(12, 3);
  train::TrainOptions options;
  options.train.epochs = 2;
  options.train.seed = 9;
  for (auto kind : {models::ModelKind::crf, models::ModelKind::seq2seq}) {
    auto a = train::train(data, nullptr, kind, testing::tiny_config(), options);
    auto b = train::train(data, nullptr, kind, testing::tiny_config(), options);
    REQUIRE(a.metrics.size() == 2);
    CHECK(a.metrics[0].train_loss == b.metrics[0].train_loss);
    CHECK(a.metrics[1].train_loss == b.metrics[1].train_loss);
    CHECK(models::serialize(*a.model) == models::serialize(*b.model));
    options.train.seed = 10;
    auto c = train::train(data, nullptr, kind, testing::tiny_config(), options);
    CHECK(c.metrics[1].train_loss != a.metrics[1].train_loss);
    options.train.seed = 9;
  }
}

TEST_CASE("dev selection writes a checkpoint and restores the best epoch") {
  auto data = testing::synthetic_corpus(24, 5);
  auto dev = testing::synthetic_corpus(8, 6);
  auto path = (temp_dir() / "best.model").string();
  std::filesystem::remove(path);
  train::TrainOptions options;
  options.train.epochs = 4;
  options.optimizer.learning_rate = 5e-3;
  options.checkpoint_path = path;
  auto result = train::train(data, &dev, models::ModelKind::crf, testing::tiny_config(), options);
  REQUIRE(result.metrics.size() == 4);
  double best = 0.0;
  for (const auto& m : result.metrics) {
    REQUIRE(m.dev_f1.has_value());
    best = std::max(best, *m.dev_f1);
  }
  CHECK(train::corpus_f1(*result.model, dev) == doctest::Approx(best));
  REQUIRE(std::filesystem::exists(path));
  auto loaded = models::load(path);
  CHECK(train::predict_corpus(*loaded, dev) == train::predict_corpus(*result.model, dev));
}

TEST_CASE("include_dev merges the dev sentences into the vocabulary") {
  corpus::TaggedCorpus data;
  data.sentences = {testing::court_sentence()};
  corpus::TaggedCorpus dev;
  Sentence extra;
  extra.tokens = {{"Prague", {}, {}}};
  extra.mentions = {{"LOC", {0, 1}}};
  dev.sentences = {extra};
  train::TrainOptions options;
  options.train.epochs = 1;
  auto plain = train::train(data, &dev, models::ModelKind::crf, testing::tiny_config(), options);
  CHECK_FALSE(plain.model->vocabulary().forms.contains("Prague"));
  options.train.include_dev_in_train = true;
  auto merged = train::train(data, &dev, models::ModelKind::crf, testing::tiny_config(), options);
  CHECK(merged.model->vocabulary().forms.contains("Prague"));
  CHECK(merged.model->alphabet().contains("U-LOC"));
}

TEST_CASE("gold mentions and corpus F1") {
  corpus::TaggedCorpus data;
  data.sentences = {testing::court_sentence()};
  CHECK(train::gold_mentions(data) == std::vector<std::vector<Mention>>{testing::court_sentence().mentions});
}
