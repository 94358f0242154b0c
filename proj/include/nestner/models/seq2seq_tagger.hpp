#ifndef NESTNER_MODELS_SEQ2SEQ_TAGGER_HPP
#define NESTNER_MODELS_SEQ2SEQ_TAGGER_HPP

#include <span>

#include "nestner/models/tagger.hpp"

namespace nestner::models {

/// BiLSTM encoder and LSTM decoder emitting BILOU components one at a time.
/// The decoder reads only the encoder output of the current token (hard
/// attention) together with the previous label; `<eow>` moves it to the next
/// token. Components of a token come out highest priority first.
class Seq2seqTagger : public Tagger {
 public:
  Seq2seqTagger(const TaggerConfig& config, corpus::Vocabulary vocabulary, LabelAlphabet alphabet,
                nn::Rng& rng);
  Seq2seqTagger(const TaggerConfig& config, corpus::Vocabulary vocabulary, LabelAlphabet alphabet,
                nn::Parameters params);

  /// Id 0 of the alphabet is <eow>; the label embedding table has one more
  /// row for <bos>.
  static constexpr std::size_t kEndOfWord = 0;
  std::size_t begin_symbol() const { return alphabet_.size(); }

  Example prepare(const Sentence& sentence, const Eigen::MatrixXd* contextual) const override;
  nn::Var loss(nn::Graph& g, const Example& example, const embed::Noise& noise) const override;
  std::vector<Mention> predict(const embed::SentenceFeatures& features) const override;

  /// Initial decoder state from the final encoder states.
  nn::LstmState initial_state(nn::Graph& g, const nn::BiLstmOutput& encoded) const;

  struct Step {
    nn::Var logits;
    nn::LstmState state;
  };
  /// One decoder step attending to `encoder_outputs[pointer]` only.
  Step step(nn::Graph& g, const nn::LstmState& state, std::size_t pointer, std::size_t previous,
            std::span<const nn::Var> encoder_outputs) const;

  /// Greedy component stream (ids, 0 = <eow>); `steps` receives the number
  /// of decoder steps taken.
  std::vector<std::size_t> greedy_stream(const embed::SentenceFeatures& features,
                                         std::size_t* steps = nullptr) const;

  codec::ComponentStream to_components(std::span<const std::size_t> ids) const;

 private:
  void bind();

  nn::ParamId init_weight_;
  nn::ParamId init_bias_;
  nn::ParamId label_table_;
  nn::LstmParams decoder_;
  nn::ParamId out_weight_;
  nn::ParamId out_bias_;
};

}  // namespace nestner::models

#endif  // NESTNER_MODELS_SEQ2SEQ_TAGGER_HPP
