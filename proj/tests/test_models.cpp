#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "nestner/models/crf_tagger.hpp"
#include "nestner/models/serialization.hpp"
#include "nestner/models/seq2seq_tagger.hpp"
#include "nestner/train/trainer.hpp"
#include "synthetic.hpp"

using namespace nestner;
using models::ModelKind;

namespace {

std::unique_ptr<models::Tagger> fixture_model(ModelKind kind, const models::TaggerConfig& config,
                                              std::uint64_t seed = 1) {
  std::vector<Sentence> data{testing::court_sentence()};
  return models::make_tagger(kind, config, corpus::build_vocabulary(data),
                             models::build_label_alphabet(kind, data), seed);
}

}  // namespace

TEST_CASE("label alphabets per model kind") {
  std::vector<Sentence> data{testing::court_sentence()};
  auto multilabels = models::build_label_alphabet(ModelKind::crf, data);
  CHECK(multilabels.size() == 6);
  CHECK(multilabels.label(0) == "O");
  auto components = models::build_label_alphabet(ModelKind::seq2seq, data);
  CHECK(components.strings() ==
        std::vector<std::string>{"<eow>", "B-ORG", "I-ORG", "U-GPE", "B-GPE", "L-ORG", "L-GPE"});
}

TEST_CASE("model kind names") {
  CHECK(models::parse_model_kind("crf") == ModelKind::crf);
  CHECK(models::to_string(ModelKind::seq2seq) == "seq2seq");
  CHECK_THROWS_AS(models::parse_model_kind("hmm"), Error);
}

TEST_CASE("training targets") {
  auto crf = fixture_model(ModelKind::crf, testing::tiny_config());
  auto example = crf->prepare(testing::court_sentence(), nullptr);
  CHECK(example.target == std::vector<std::size_t>{0, 1, 2, 3, 2, 3, 3, 4, 5, 0});

  auto s2s = fixture_model(ModelKind::seq2seq, testing::tiny_config());
  example = s2s->prepare(testing::court_sentence(), nullptr);
  CHECK(example.target.size() == 22);
  CHECK(std::count(example.target.begin(), example.target.end(), 0u) == 10);
  CHECK(std::vector<std::size_t>(example.target.begin(), example.target.begin() + 6) ==
        std::vector<std::size_t>{0, 1, 0, 2, 3, 0});
}

TEST_CASE("nesting deeper than max_components is rejected") {
  auto config = testing::tiny_config();
  config.max_components = 1;
  auto s2s = fixture_model(ModelKind::seq2seq, config);
  CHECK_THROWS_AS(s2s->prepare(testing::court_sentence(), nullptr), Error);
}

TEST_CASE("unseen labels fall back and are counted") {
  auto crf = fixture_model(ModelKind::crf, testing::tiny_config());
  Sentence s;
  s.tokens = {{"x", {}, {}}};
  s.mentions = {{"PER", {0, 1}}};
  auto before = crf->alphabet().fallback_count();
  auto example = crf->prepare(s, nullptr);
  CHECK(example.target == std::vector<std::size_t>{0});
  CHECK(crf->alphabet().fallback_count() == before + 1);
}

TEST_CASE("decoding is forced to terminate") {
  auto config = testing::tiny_config();
  config.max_components = 3;
  std::vector<Sentence> data{testing::court_sentence()};
  nn::Rng rng(1);
  models::Seq2seqTagger tagger(config, corpus::build_vocabulary(data),
                               models::build_label_alphabet(ModelKind::seq2seq, data), rng);
  // A decoder that always prefers the same non-<eow> component.
  tagger.parameters()["decoder.out.W"].setZero();
  tagger.parameters()["decoder.out.b"].setZero();
  tagger.parameters()["decoder.out.b"](1, 0) = 100.0;
  auto features = tagger.features(testing::court_sentence(), nullptr);
  std::size_t steps = 0;
  auto stream = tagger.greedy_stream(features, &steps);
  CHECK(steps == 10 * 4);
  CHECK(stream.size() == steps);
  CHECK(std::count(stream.begin(), stream.end(), 0u) == 10);
  auto mentions = tagger.predict(features);
  CHECK_FALSE(mentions.empty());
}

TEST_CASE("empty sentences predict nothing") {
  for (auto kind : {ModelKind::crf, ModelKind::seq2seq}) {
    auto model = fixture_model(kind, testing::tiny_config());
    CHECK(model->predict(Sentence{}, nullptr).empty());
  }
}

TEST_CASE("hard attention: a decoder step reads one encoder position") {
  std::vector<Sentence> data{testing::court_sentence()};
  nn::Rng rng(3);
  models::Seq2seqTagger tagger(testing::tiny_config(), corpus::build_vocabulary(data),
                               models::build_label_alphabet(ModelKind::seq2seq, data), rng);
  const nn::Index dim = 2 * tagger.config().hidden_dim;
  auto run = [&](double noise, std::size_t pointer) {
    nn::Graph g(tagger.parameters());
    std::vector<nn::Var> outputs;
    for (std::size_t t = 0; t < 4; ++t)
      outputs.push_back(g.input(nn::Matrix::Constant(dim, 1, t == pointer ? 0.3 : noise * (t + 1))));
    auto state = nn::lstm_zero_state(g, nn::find_lstm(tagger.parameters(), "decoder.lstm"));
    auto step = tagger.step(g, state, pointer, tagger.begin_symbol(), outputs);
    nn::Gradients grads(tagger.parameters());
    g.backward(g.sum(step.logits), grads);
    for (std::size_t t = 0; t < 4; ++t)
      if (t != pointer) CHECK(g.gradient(outputs[t]) == nullptr);
    CHECK(g.gradient(outputs[pointer]) != nullptr);
    return nn::Matrix(g.value(step.logits));
  };
  for (std::size_t pointer = 0; pointer < 4; ++pointer) CHECK(run(0.1, pointer) == run(-5.0, pointer));
}

TEST_CASE("both models fit the court sentence exactly") {
  corpus::TaggedCorpus data;
  data.sentences = {testing::court_sentence()};
  for (auto kind : {ModelKind::crf, ModelKind::seq2seq}) {
    train::TrainOptions options;
    options.train.epochs = 300;
    options.optimizer.learning_rate = 1e-2;
    options.regularization = {0.0, 0.0};
    options.on_epoch = [&](const train::EpochMetrics&, const models::Tagger& tagger) {
      return tagger.predict(data.sentences[0], nullptr) != data.sentences[0].mentions;
    };
    auto result = train::train(data, nullptr, kind, testing::tiny_config(), options);
    auto predicted = result.model->predict(data.sentences[0], nullptr);
    CHECK(predicted.size() == 4);
    CHECK(predicted == data.sentences[0].mentions);
  }
}

TEST_CASE("base64") {
  auto bytes = [](std::string_view s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  CHECK(models::base64_encode(bytes("Man")) == "TWFu");
  CHECK(models::base64_encode(bytes("Ma")) == "TWE=");
  CHECK(models::base64_encode(bytes("M")) == "TQ==");
  CHECK(models::base64_encode({}) == "");
  CHECK(models::base64_decode("TWFu") == bytes("Man"));
  CHECK(models::base64_decode("TQ==") == bytes("M"));
  CHECK_THROWS_AS(models::base64_decode("T@=="), Error);
}

TEST_CASE("serialization round trip") {
  auto data = testing::synthetic_corpus(6, 2);
  for (auto kind : {ModelKind::crf, ModelKind::seq2seq}) {
    auto model = models::make_tagger(kind, testing::tiny_config(), corpus::build_vocabulary(data),
                                     models::build_label_alphabet(kind, data.sentences), 5);
    std::string text = models::serialize(*model);
    auto loaded = models::deserialize(text);
    CHECK(loaded->kind() == kind);
    CHECK(loaded->vocabulary() == model->vocabulary());
    CHECK(loaded->alphabet().strings() == model->alphabet().strings());
    CHECK(models::serialize(*loaded) == text);
    for (std::size_t i = 0; i < model->parameters().size(); ++i) {
      nn::ParamId id{i};
      const auto& name = model->parameters().name(id);
      const auto& a = model->parameters().value(id);
      const auto& b = loaded->parameters()[name];
      CHECK(a.rows() == b.rows());
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
    }
    auto reloaded = models::deserialize(models::serialize(*loaded));
    for (const auto& s : data.sentences) CHECK(reloaded->predict(s, nullptr) == loaded->predict(s, nullptr));
  }
}

TEST_CASE("model files reject other versions and check pretrained dimensions") {
  auto model = fixture_model(ModelKind::crf, testing::tiny_config());
  std::string text = models::serialize(*model);
  auto pos = text.find("\"format_version\":1");
  REQUIRE(pos != std::string::npos);
  std::string other = text;
  other.replace(pos, 18, "\"format_version\":2");
  CHECK_THROWS_AS(models::deserialize(other), Error);
  CHECK_THROWS_AS(models::deserialize("{"), Error);
  CHECK_THROWS_AS(model->set_pretrained(std::make_shared<embed::PretrainedTable>(3)), Error);
}

TEST_CASE("contextual vectors are required once configured") {
  auto config = testing::tiny_config();
  config.embedding.contextual_dim = 2;
  auto model = fixture_model(ModelKind::seq2seq, config);
  CHECK_THROWS_AS(model->features(testing::court_sentence(), nullptr), Error);
  Eigen::MatrixXd ctx = Eigen::MatrixXd::Zero(10, 2);
  CHECK_NOTHROW(model->predict(testing::court_sentence(), &ctx));
}
