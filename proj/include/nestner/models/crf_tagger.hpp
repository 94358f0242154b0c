#ifndef NESTNER_MODELS_CRF_TAGGER_HPP
#define NESTNER_MODELS_CRF_TAGGER_HPP

#include "nestner/models/tagger.hpp"

namespace nestner::models {

/// BiLSTM encoder with a linear-chain CRF over whole multilabels: every
/// combination seen in training is one CRF label.
class CrfTagger : public Tagger {
 public:
  CrfTagger(const TaggerConfig& config, corpus::Vocabulary vocabulary, LabelAlphabet alphabet,
            nn::Rng& rng);
  /// Binds to deserialized parameters.
  CrfTagger(const TaggerConfig& config, corpus::Vocabulary vocabulary, LabelAlphabet alphabet,
            nn::Parameters params);

  Example prepare(const Sentence& sentence, const Eigen::MatrixXd* contextual) const override;
  nn::Var loss(nn::Graph& g, const Example& example, const embed::Noise& noise) const override;
  std::vector<Mention> predict(const embed::SentenceFeatures& features) const override;

  /// T x K emission scores.
  nn::Var emissions(nn::Graph& g, const embed::SentenceFeatures& features,
                    const embed::Noise& noise) const;
  /// Viterbi multilabel ids.
  std::vector<std::size_t> predict_ids(const embed::SentenceFeatures& features) const;

  nn::ParamId transitions() const { return transitions_; }

 private:
  void bind();

  nn::ParamId emit_weight_;
  nn::ParamId emit_bias_;
  nn::ParamId transitions_;
};

}  // namespace nestner::models

#endif  // NESTNER_MODELS_CRF_TAGGER_HPP
