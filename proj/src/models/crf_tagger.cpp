#include "nestner/models/crf_tagger.hpp"

#include "nestner/models/crf.hpp"

namespace nestner::models {

CrfTagger::CrfTagger(const TaggerConfig& config, corpus::Vocabulary vocabulary,
                     LabelAlphabet alphabet, nn::Rng& rng)
    : Tagger(ModelKind::crf, config, std::move(vocabulary), std::move(alphabet)) {
  init_encoder(rng);
  const nn::Index K = static_cast<nn::Index>(alphabet_.size());
  const nn::Index in = 2 * config_.hidden_dim;
  nn::Matrix w(K, in);
  nn::init_uniform_fan_in(w, in, rng);
  params_.add("crf.emit.W", std::move(w));
  params_.add("crf.emit.b", K, 1);
  params_.add("crf.transitions", K + 2, K + 2);
  bind();
}

CrfTagger::CrfTagger(const TaggerConfig& config, corpus::Vocabulary vocabulary,
                     LabelAlphabet alphabet, nn::Parameters params)
    : Tagger(ModelKind::crf, config, std::move(vocabulary), std::move(alphabet)) {
  params_ = std::move(params);
  bind_encoder();
  bind();
}

void CrfTagger::bind() {
  emit_weight_ = params_.id("crf.emit.W");
  emit_bias_ = params_.id("crf.emit.b");
  transitions_ = params_.id("crf.transitions");
  const auto K = static_cast<nn::Index>(alphabet_.size());
  if (params_.value(emit_weight_).rows() != K || params_.value(transitions_).rows() != K + 2)
    throw Error("CRF parameters do not match the label alphabet");
}

Example CrfTagger::prepare(const Sentence& sentence, const Eigen::MatrixXd* contextual) const {
  Example example;
  example.features = features(sentence, contextual);
  for (const auto& label : codec::encode(sentence).labels)
    example.target.push_back(alphabet_.lookup(label.to_string()));
  return example;
}

nn::Var CrfTagger::emissions(nn::Graph& g, const embed::SentenceFeatures& features,
                             const embed::Noise& noise) const {
  nn::BiLstmOutput encoded = encode(g, features, noise);
  nn::Var w = g.param(emit_weight_);
  nn::Var b = g.param(emit_bias_);
  std::vector<nn::Var> rows;
  rows.reserve(encoded.outputs.size());
  for (nn::Var h : encoded.outputs) rows.push_back(g.affine(w, h, b));
  return g.stack_rows(rows);
}

nn::Var CrfTagger::loss(nn::Graph& g, const Example& example, const embed::Noise& noise) const {
  nn::Var scores = emissions(g, example.features, noise);
  return crf::nll(g, scores, g.param(transitions_), example.target);
}

std::vector<std::size_t> CrfTagger::predict_ids(const embed::SentenceFeatures& features) const {
  nn::Graph g(params_);
  nn::Var scores = emissions(g, features, embed::Noise{});
  return crf::viterbi(g.value(scores), params_.value(transitions_));
}

std::vector<Mention> CrfTagger::predict(const embed::SentenceFeatures& features) const {
  if (features.size() == 0) return {};
  codec::EncodedSentence encoded;
  for (std::size_t id : predict_ids(features))
    encoded.labels.push_back(Multilabel::parse(alphabet_.label(id)));
  return codec::decode(encoded, codec::Policy::repair);
}

}  // namespace nestner::models
