// Per-token input vectors:
//   [pretrained | trainable form | trainable lemma? | POS one-hot? |
//    char BiGRU (forward final, backward final) | contextual?]

#ifndef NESTNER_EMBED_HPP
#define NESTNER_EMBED_HPP

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nestner/core.hpp"
#include "nestner/corpus.hpp"
#include "nestner/nn/cells.hpp"

namespace nestner::embed {

struct EmbeddingConfig {
  int pretrained_dim = 0;  // 0 disables the pretrained table
  int trainable_dim = 256;
  bool use_lemmas = false;  // a second trainable table of trainable_dim
  int char_dim = 128;
  int char_rnn_dim = 128;  // per direction; 0 disables characters
  bool use_pos_onehot = false;
  int pos_count = 0;
  int contextual_dim = 0;

  int output_dim() const;
};

/// Frozen word vectors read from the whitespace-separated text format.
/// Lookups lowercase ASCII letters; unknown forms get a zero vector.
class PretrainedTable {
 public:
  PretrainedTable() = default;
  explicit PretrainedTable(int dim) : dim_(dim) {}

  /// An expected_dim of 0 takes the dimension from the file.
  static PretrainedTable load(const std::string& path, int expected_dim);
  static PretrainedTable parse(std::string_view text, int expected_dim);

  /// Keeps the first vector for a repeated word.
  void add(const std::string& word, std::vector<double> values);

  int dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  /// Row id for `form`, or -1.
  long find(const std::string& form) const;
  nn::Vector row(long id) const;

 private:
  int dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> rows_;
};

std::string lowercase_ascii(std::string text);

struct TokenFeatures {
  std::size_t form = corpus::FeatureMap::kUnk;
  std::size_t lemma = corpus::FeatureMap::kUnk;
  std::size_t pos = corpus::FeatureMap::kUnk;
  std::vector<std::size_t> chars;
  long pretrained = -1;
};

struct SentenceFeatures {
  std::vector<TokenFeatures> tokens;
  std::optional<Eigen::MatrixXd> contextual;

  std::size_t size() const { return tokens.size(); }
};

SentenceFeatures extract_features(const Sentence& sentence, const corpus::Vocabulary& vocabulary,
                                  const PretrainedTable* pretrained,
                                  const Eigen::MatrixXd* contextual);

/// Dropout settings for one forward pass. A null rng means evaluation mode.
struct Noise {
  nn::Rng* rng = nullptr;
  double dropout = 0.0;
  double word_dropout = 0.0;

  bool training() const { return rng != nullptr; }
};

class Embedder {
 public:
  Embedder() = default;
  /// Registers the trainable tables and char GRUs under `embed.*`.
  Embedder(const EmbeddingConfig& config, const corpus::Vocabulary& vocabulary,
           nn::Parameters& params, nn::Rng& rng);
  /// Binds to already registered parameters.
  Embedder(const EmbeddingConfig& config, const nn::Parameters& params,
           const PretrainedTable* pretrained);

  void set_pretrained(const PretrainedTable* pretrained) { pretrained_ = pretrained; }
  const EmbeddingConfig& config() const { return config_; }

  /// Embedding of token `t`. Word dropout, when training, has already been
  /// applied to `features` by embed_sentence.
  nn::Var embed_token(nn::Graph& g, const SentenceFeatures& features, std::size_t t) const;

  /// Embeds every token; in training mode word dropout first replaces form
  /// and lemma ids by unk (and drops the pretrained row).
  std::vector<nn::Var> embed_sentence(nn::Graph& g, const SentenceFeatures& features,
                                      const Noise& noise) const;

  nn::Var char_embedding(nn::Graph& g, const std::vector<std::size_t>& chars) const;

  const nn::GruParams& char_forward() const { return char_forward_; }
  const nn::GruParams& char_backward() const { return char_backward_; }

 private:
  EmbeddingConfig config_;
  const PretrainedTable* pretrained_ = nullptr;
  nn::ParamId form_table_;
  nn::ParamId lemma_table_;
  nn::ParamId char_table_;
  nn::GruParams char_forward_;
  nn::GruParams char_backward_;
};

}  // namespace nestner::embed

#endif  // NESTNER_EMBED_HPP
