#ifndef NESTNER_MODELS_TAGGER_HPP
#define NESTNER_MODELS_TAGGER_HPP

#include <memory>
#include <string>
#include <vector>

#include "nestner/codec.hpp"
#include "nestner/core.hpp"
#include "nestner/corpus.hpp"
#include "nestner/embed.hpp"
#include "nestner/nn/cells.hpp"

namespace nestner::models {

enum class ModelKind { crf, seq2seq };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct TaggerConfig {
  embed::EmbeddingConfig embedding;
  int hidden_dim = 256;   // encoder, per direction
  int decoder_dim = 256;  // seq2seq only
  int label_dim = 128;    // seq2seq only
  int max_components = 16;
};

/// A sentence converted to model inputs, with its gold target when known:
/// multilabel ids per token for the CRF, the flattened component stream
/// (0 = <eow>) for seq2seq.
struct Example {
  embed::SentenceFeatures features;
  std::vector<std::size_t> target;
};

class Tagger {
 public:
  Tagger(ModelKind kind, TaggerConfig config, corpus::Vocabulary vocabulary, LabelAlphabet alphabet);
  virtual ~Tagger() = default;
  Tagger(const Tagger&) = delete;
  Tagger& operator=(const Tagger&) = delete;

  ModelKind kind() const { return kind_; }
  const TaggerConfig& config() const { return config_; }
  const corpus::Vocabulary& vocabulary() const { return vocabulary_; }
  const LabelAlphabet& alphabet() const { return alphabet_; }
  nn::Parameters& parameters() { return params_; }
  const nn::Parameters& parameters() const { return params_; }
  const embed::Embedder& embedder() const { return embedder_; }

  /// The frozen table must match config().embedding.pretrained_dim.
  void set_pretrained(std::shared_ptr<const embed::PretrainedTable> table);
  const embed::PretrainedTable* pretrained() const { return pretrained_.get(); }

  embed::SentenceFeatures features(const Sentence& sentence, const Eigen::MatrixXd* contextual) const;

  /// Features plus gold target. Throws Error when the gold nesting cannot be
  /// represented by the model.
  virtual Example prepare(const Sentence& sentence, const Eigen::MatrixXd* contextual) const = 0;

  /// Per-sentence training loss (summed over positions).
  virtual nn::Var loss(nn::Graph& g, const Example& example, const embed::Noise& noise) const = 0;

  /// Decoded with the repair policy; never throws on model output.
  virtual std::vector<Mention> predict(const embed::SentenceFeatures& features) const = 0;
  std::vector<Mention> predict(const Sentence& sentence, const Eigen::MatrixXd* contextual) const;

  /// BiLSTM over the embedded sentence, with dropout on its inputs and
  /// outputs when training.
  nn::BiLstmOutput encode(nn::Graph& g, const embed::SentenceFeatures& features,
                          const embed::Noise& noise) const;

 protected:
  /// Registers embedding and encoder parameters.
  void init_encoder(nn::Rng& rng);
  /// Binds embedding and encoder to loaded parameters.
  void bind_encoder();

  ModelKind kind_;
  TaggerConfig config_;
  corpus::Vocabulary vocabulary_;
  LabelAlphabet alphabet_;
  nn::Parameters params_;
  embed::Embedder embedder_;
  nn::BiLstmParams encoder_;
  std::shared_ptr<const embed::PretrainedTable> pretrained_;
};

/// Alphabet over the gold labels of `sentences`: observed multilabel strings
/// for the CRF, individual components for seq2seq (first-occurrence order).
LabelAlphabet build_label_alphabet(ModelKind kind, std::span<const Sentence> sentences);

/// Fresh model with parameters initialized from `seed`.
std::unique_ptr<Tagger> make_tagger(ModelKind kind, const TaggerConfig& config,
                                    corpus::Vocabulary vocabulary, LabelAlphabet alphabet,
                                    std::uint64_t seed);

}  // namespace nestner::models

#endif  // NESTNER_MODELS_TAGGER_HPP
