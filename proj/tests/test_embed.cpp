#include <doctest.h>

#include "fixtures.hpp"
#include "nestner/embed.hpp"
#include "nestner/nn/cells.hpp"
#include "nestner/nn/grad_check.hpp"

using namespace nestner;

TEST_CASE("pretrained table text format") {
  auto plain = embed::PretrainedTable::parse("a 1.0 2.0\nb 3.0 4.0\n", 2);
  auto header = embed::PretrainedTable::parse("2 2\na 1.0 2.0\nb 3.0 4.0\n", 2);
  CHECK(plain.size() == 2);
  CHECK(header.size() == 2);
  CHECK(plain.row(plain.find("b")) == header.row(header.find("b")));
  CHECK(plain.row(plain.find("b"))(1) == 4.0);

  auto inferred = embed::PretrainedTable::parse("x 1 2 3\n", 0);
  CHECK(inferred.dim() == 3);

  try {
    embed::PretrainedTable::parse("a 1.0 2.0\nb 3.0 4.0 5.0\n", 2);
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(embed::PretrainedTable::parse("a 1.0 x\n", 2), Error);
  CHECK_THROWS_AS(embed::PretrainedTable::parse("3 5\na 1.0 2.0\n", 2), Error);
}

TEST_CASE("pretrained lookup: first occurrence, lowercase first, zeros for unknown") {
  auto table = embed::PretrainedTable::parse("court 1 1\nCourt 2 2\ncourt 3 3\nNASA 4 4\n", 2);
  CHECK(table.size() == 3);
  CHECK(table.row(table.find("Court"))(0) == 1.0);
  CHECK(table.row(table.find("NASA"))(0) == 4.0);
  CHECK(table.find("unseen") == -1);
  CHECK(table.row(-1) == nn::Vector::Zero(2));
}

TEST_CASE("token vector length is the sum of enabled parts") {
  embed::EmbeddingConfig config;
  config.pretrained_dim = 300;
  CHECK(config.output_dim() == 300 + 256 + 256);

  Sentence s = testing::court_sentence();
  std::vector<Sentence> data{s};
  auto vocabulary = corpus::build_vocabulary(data);
  nn::Parameters params;
  nn::Rng rng(1);
  embed::EmbeddingConfig small;
  small.pretrained_dim = 3;
  small.trainable_dim = 5;
  small.char_dim = 2;
  small.char_rnn_dim = 4;
  small.contextual_dim = 2;
  embed::Embedder embedder(small, vocabulary, params, rng);
  CHECK_FALSE(params.contains("embed.pretrained"));

  embed::PretrainedTable table(3);
  table.add("court", {1.0, 2.0, 3.0});
  embedder.set_pretrained(&table);
  Eigen::MatrixXd ctx = Eigen::MatrixXd::Constant(10, 2, 0.5);
  auto features = embed::extract_features(s, vocabulary, &table, &ctx);

  nn::Graph g(params);
  auto court = g.value(embedder.embed_token(g, features, 5));
  CHECK(court.rows() == small.output_dim());
  CHECK(court.rows() == 3 + 5 + 8 + 2);
  CHECK(court(0) == 1.0);
  CHECK(court(17) == 0.5);
  auto in = g.value(embedder.embed_token(g, features, 0));
  CHECK(in.topRows(3).isZero());

  nn::Graph again(params);
  CHECK(again.value(embedder.embed_token(again, features, 5)) == court);
}

TEST_CASE("pos one-hot and lemma table") {
  Sentence s;
  s.tokens = {{"Praha", "Praha", "NNP"}, {"je", "b\xc3\xbdt", "VB"}};
  std::vector<Sentence> data{s};
  auto vocabulary = corpus::build_vocabulary(data);
  embed::EmbeddingConfig config;
  config.trainable_dim = 4;
  config.use_lemmas = true;
  config.use_pos_onehot = true;
  config.pos_count = static_cast<int>(vocabulary.pos.size());
  config.char_rnn_dim = 0;
  nn::Parameters params;
  nn::Rng rng(2);
  embed::Embedder embedder(config, vocabulary, params, rng);
  auto features = embed::extract_features(s, vocabulary, nullptr, nullptr);
  nn::Graph g(params);
  auto v = g.value(embedder.embed_token(g, features, 1));
  CHECK(v.rows() == 4 + 4 + config.pos_count);
  CHECK(v.bottomRows(config.pos_count).sum() == 1.0);
  CHECK(v(8 + static_cast<Eigen::Index>(vocabulary.pos.lookup("VB"))) == 1.0);
}

TEST_CASE("character BiGRU is direction symmetric") {
  nn::Parameters params;
  nn::Rng rng(5);
  auto fw = nn::add_gru(params, "fw", 3, 4, rng);
  auto bw = nn::add_gru(params, "bw", 3, 4, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    nn::Graph g(params);
    std::vector<nn::Var> chars, reversed;
    for (int i = 0; i < 5; ++i) {
      nn::Vector x(3);
      for (auto& value : x) value = u(rng);
      chars.push_back(g.input(x));
    }
    reversed.assign(chars.rbegin(), chars.rend());
    nn::Vector a = g.value(nn::bigru_final(g, fw, bw, chars));
    nn::Vector b = g.value(nn::bigru_final(g, bw, fw, reversed));
    CHECK((b.head(4) - a.tail(4)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((b.tail(4) - a.head(4)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("word dropout in training replaces form and pretrained, keeps characters") {
  Sentence s = testing::court_sentence();
  std::vector<Sentence> data{s};
  auto vocabulary = corpus::build_vocabulary(data);
  nn::Parameters params;
  nn::Rng init(1);
  embed::EmbeddingConfig config;
  config.trainable_dim = 4;
  config.char_dim = 2;
  config.char_rnn_dim = 2;
  config.pretrained_dim = 1;
  embed::Embedder embedder(config, vocabulary, params, init);
  embed::PretrainedTable table(1);
  for (const auto& t : s.tokens) table.add(embed::lowercase_ascii(t.form), {7.0});
  embedder.set_pretrained(&table);
  auto features = embed::extract_features(s, vocabulary, &table, nullptr);

  nn::Rng rng(3);
  embed::Noise noise{&rng, 0.0, 1.0};
  nn::Graph g(params);
  auto vectors = embedder.embed_sentence(g, features, noise);
  nn::Graph clean(params);
  auto reference = embedder.embed_sentence(clean, features, {});
  const auto& table_value = params["embed.form"];
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    auto v = g.value(vectors[t]);
    auto r = clean.value(reference[t]);
    CHECK(v(0) == 0.0);
    CHECK(r(0) == 7.0);
    CHECK(v.middleRows(1, 4) == table_value.row(corpus::FeatureMap::kUnk).transpose());
    CHECK(v.bottomRows(4) == r.bottomRows(4));
  }
}

TEST_CASE("embedding gradients reach tables and character GRUs") {
  Sentence s = testing::court_sentence();
  std::vector<Sentence> data{s};
  auto vocabulary = corpus::build_vocabulary(data);
  nn::Parameters params;
  nn::Rng rng(7);
  embed::EmbeddingConfig config;
  config.trainable_dim = 3;
  config.char_dim = 2;
  config.char_rnn_dim = 2;
  embed::Embedder embedder(config, vocabulary, params, rng);
  auto features = embed::extract_features(s, vocabulary, nullptr, nullptr);
  features.tokens.resize(3);
  auto report = nn::grad_check(
      [&](nn::Graph& g) {
        auto parts = embedder.embed_sentence(g, features, {});
        std::vector<nn::Var> squares;
        for (auto p : parts) squares.push_back(g.sum(g.cmul(g.tanh(p), p)));
        return g.add_n(squares);
      },
      params, 0.1, 1e-4, nn::Difference::extrapolated);
  CHECK(report.passed);
}
