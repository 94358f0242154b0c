#include "nestner/models/seq2seq_tagger.hpp"

#include <algorithm>

#include "nestner/log.hpp"

namespace nestner::models {

Seq2seqTagger::Seq2seqTagger(const TaggerConfig& config, corpus::Vocabulary vocabulary,
                             LabelAlphabet alphabet, nn::Rng& rng)
    : Tagger(ModelKind::seq2seq, config, std::move(vocabulary), std::move(alphabet)) {
  if (config_.max_components < 1) throw Error("max_components must be at least 1");
  init_encoder(rng);
  const nn::Index enc = 2 * config_.hidden_dim;
  const nn::Index dec = config_.decoder_dim;
  const nn::Index labels = static_cast<nn::Index>(alphabet_.size());

  nn::Matrix init(dec, enc);
  nn::init_uniform_fan_in(init, enc, rng);
  params_.add("decoder.init.W", std::move(init));
  params_.add("decoder.init.b", dec, 1);

  nn::Matrix table(labels + 1, config_.label_dim);
  nn::init_uniform_fan_in(table, config_.label_dim, rng);
  params_.add("decoder.label", std::move(table));

  nn::add_lstm(params_, "decoder.lstm", enc + config_.label_dim, dec, rng);

  nn::Matrix out(labels, dec);
  nn::init_uniform_fan_in(out, dec, rng);
  params_.add("decoder.out.W", std::move(out));
  params_.add("decoder.out.b", labels, 1);
  bind();
}

Seq2seqTagger::Seq2seqTagger(const TaggerConfig& config, corpus::Vocabulary vocabulary,
                             LabelAlphabet alphabet, nn::Parameters params)
    : Tagger(ModelKind::seq2seq, config, std::move(vocabulary), std::move(alphabet)) {
  params_ = std::move(params);
  bind_encoder();
  bind();
}

void Seq2seqTagger::bind() {
  init_weight_ = params_.id("decoder.init.W");
  init_bias_ = params_.id("decoder.init.b");
  label_table_ = params_.id("decoder.label");
  decoder_ = nn::find_lstm(params_, "decoder.lstm");
  out_weight_ = params_.id("decoder.out.W");
  out_bias_ = params_.id("decoder.out.b");
  const auto labels = static_cast<nn::Index>(alphabet_.size());
  if (params_.value(out_weight_).rows() != labels || params_.value(label_table_).rows() != labels + 1)
    throw Error("decoder parameters do not match the component alphabet");
}

Example Seq2seqTagger::prepare(const Sentence& sentence, const Eigen::MatrixXd* contextual) const {
  Example example;
  example.features = features(sentence, contextual);
  const auto encoded = codec::encode(sentence);
  for (std::size_t t = 0; t < encoded.length(); ++t) {
    const auto& components = encoded.labels[t].components;
    if (static_cast<int>(components.size()) > config_.max_components)
      throw Error("token " + std::to_string(t) + " carries " + std::to_string(components.size()) +
                  " nested components, more than max_components_per_token = " +
                  std::to_string(config_.max_components));
  }
  for (const auto& symbol : codec::flatten(encoded)) {
    if (!symbol) {
      example.target.push_back(kEndOfWord);
      continue;
    }
    auto id = alphabet_.find(symbol->to_string());
    if (id)
      example.target.push_back(*id);
    else
      alphabet_.lookup(symbol->to_string());  // counted as a fallback, then skipped
  }
  return example;
}

nn::LstmState Seq2seqTagger::initial_state(nn::Graph& g, const nn::BiLstmOutput& encoded) const {
  nn::Var finals = g.concat({encoded.forward_final, encoded.backward_final});
  nn::Var h = g.affine(g.param(init_weight_), finals, g.param(init_bias_));
  nn::Var c = g.input(nn::Matrix::Zero(decoder_.hidden_dim, 1));
  return {h, c};
}

Seq2seqTagger::Step Seq2seqTagger::step(nn::Graph& g, const nn::LstmState& state,
                                        std::size_t pointer, std::size_t previous,
                                        std::span<const nn::Var> encoder_outputs) const {
  nn::Var label = g.lookup(label_table_, static_cast<nn::Index>(previous));
  nn::Var input = g.concat({encoder_outputs[pointer], label});
  nn::LstmState next = nn::lstm_cell(g, decoder_, input, state);
  nn::Var logits = g.affine(g.param(out_weight_), next.h, g.param(out_bias_));
  return {logits, next};
}

nn::Var Seq2seqTagger::loss(nn::Graph& g, const Example& example, const embed::Noise& noise) const {
  nn::BiLstmOutput encoded = encode(g, example.features, noise);
  nn::LstmState state = initial_state(g, encoded);
  std::size_t previous = begin_symbol();
  std::size_t pointer = 0;
  std::vector<nn::Var> terms;
  terms.reserve(example.target.size());
  for (std::size_t symbol : example.target) {
    Step s = step(g, state, pointer, previous, encoded.outputs);
    terms.push_back(g.softmax_cross_entropy(s.logits, static_cast<nn::Index>(symbol)));
    state = s.state;
    previous = symbol;
    if (symbol == kEndOfWord) ++pointer;
  }
  return g.add_n(terms);
}

std::vector<std::size_t> Seq2seqTagger::greedy_stream(const embed::SentenceFeatures& features,
                                                      std::size_t* steps) const {
  std::vector<std::size_t> stream;
  std::size_t taken = 0;
  if (features.size() > 0) {
    nn::Graph g(params_);
    nn::BiLstmOutput encoded = encode(g, features, embed::Noise{});
    nn::LstmState state = initial_state(g, encoded);
    std::size_t previous = begin_symbol();
    int emitted = 0;
    for (std::size_t pointer = 0; pointer < features.size();) {
      Step s = step(g, state, pointer, previous, encoded.outputs);
      ++taken;
      state = s.state;
      const nn::Matrix& logits = g.value(s.logits);
      nn::Index best = 0;
      logits.col(0).maxCoeff(&best);
      std::size_t symbol = static_cast<std::size_t>(best);
      if (emitted >= config_.max_components) symbol = kEndOfWord;
      stream.push_back(symbol);
      previous = symbol;
      if (symbol == kEndOfWord) {
        ++pointer;
        emitted = 0;
      } else {
        ++emitted;
      }
    }
  }
  if (steps) *steps = taken;
  return stream;
}

codec::ComponentStream Seq2seqTagger::to_components(std::span<const std::size_t> ids) const {
  codec::ComponentStream stream;
  stream.reserve(ids.size());
  for (std::size_t id : ids) {
    if (id == kEndOfWord)
      stream.emplace_back(std::nullopt);
    else
      stream.emplace_back(LabelComponent::parse(alphabet_.label(id)));
  }
  return stream;
}

std::vector<Mention> Seq2seqTagger::predict(const embed::SentenceFeatures& features) const {
  if (features.size() == 0) return {};
  auto ids = greedy_stream(features);
  auto encoded = codec::unflatten(to_components(ids), features.size());
  return codec::decode(encoded, codec::Policy::repair);
}

}  // namespace nestner::models
