#include "nestner/models/tagger.hpp"

#include "nestner/models/crf_tagger.hpp"
#include "nestner/models/seq2seq_tagger.hpp"
#include "nestner/train/regularization.hpp"

namespace nestner::models {

std::string to_string(ModelKind kind) { return kind == ModelKind::crf ? "crf" : "seq2seq"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "crf") return ModelKind::crf;
  if (text == "seq2seq") return ModelKind::seq2seq;
  throw Error("unknown model kind '" + std::string(text) + "' (expected crf or seq2seq)");
}

Tagger::Tagger(ModelKind kind, TaggerConfig config, corpus::Vocabulary vocabulary,
               LabelAlphabet alphabet)
    : kind_(kind),
      config_(std::move(config)),
      vocabulary_(std::move(vocabulary)),
      alphabet_(std::move(alphabet)) {
  if (config_.embedding.use_pos_onehot)
    config_.embedding.pos_count = static_cast<int>(vocabulary_.pos.size());
  if (config_.hidden_dim <= 0 || config_.embedding.trainable_dim <= 0)
    throw Error("model dimensions must be positive");
}

void Tagger::init_encoder(nn::Rng& rng) {
  embedder_ = embed::Embedder(config_.embedding, vocabulary_, params_, rng);
  const nn::Index in = config_.embedding.output_dim();
  encoder_.forward = nn::add_lstm(params_, "encoder.fw", in, config_.hidden_dim, rng);
  encoder_.backward = nn::add_lstm(params_, "encoder.bw", in, config_.hidden_dim, rng);
}

void Tagger::bind_encoder() {
  embedder_ = embed::Embedder(config_.embedding, params_, pretrained_.get());
  encoder_.forward = nn::find_lstm(params_, "encoder.fw");
  encoder_.backward = nn::find_lstm(params_, "encoder.bw");
  if (encoder_.forward.input_dim != config_.embedding.output_dim())
    throw Error("encoder input dimension does not match the embedding configuration");
}

void Tagger::set_pretrained(std::shared_ptr<const embed::PretrainedTable> table) {
  if (table && table->dim() != config_.embedding.pretrained_dim)
    throw Error("pretrained vectors have dimension " + std::to_string(table->dim()) +
                ", model expects " + std::to_string(config_.embedding.pretrained_dim));
  pretrained_ = std::move(table);
  embedder_.set_pretrained(pretrained_.get());
}

embed::SentenceFeatures Tagger::features(const Sentence& sentence,
                                         const Eigen::MatrixXd* contextual) const {
  if (config_.embedding.contextual_dim > 0 && !contextual)
    throw Error("model expects contextual vectors but none were supplied");
  return embed::extract_features(sentence, vocabulary_, pretrained_.get(),
                                 config_.embedding.contextual_dim > 0 ? contextual : nullptr);
}

std::vector<Mention> Tagger::predict(const Sentence& sentence,
                                     const Eigen::MatrixXd* contextual) const {
  if (sentence.tokens.empty()) return {};
  return predict(features(sentence, contextual));
}

nn::BiLstmOutput Tagger::encode(nn::Graph& g, const embed::SentenceFeatures& features,
                                const embed::Noise& noise) const {
  std::vector<nn::Var> inputs = embedder_.embed_sentence(g, features, noise);
  if (noise.training())
    for (auto& x : inputs) x = train::dropout(g, x, noise.dropout, *noise.rng);
  nn::BiLstmOutput out = nn::bilstm(g, encoder_, inputs);
  if (noise.training())
    for (auto& h : out.outputs) h = train::dropout(g, h, noise.dropout, *noise.rng);
  return out;
}

LabelAlphabet build_label_alphabet(ModelKind kind, std::span<const Sentence> sentences) {
  LabelAlphabet alphabet =
      kind == ModelKind::crf ? LabelAlphabet(std::string(kOutsideLabel)) : LabelAlphabet(std::string(kEndOfWord));
  for (const auto& sentence : sentences) {
    auto encoded = codec::encode(sentence);
    for (const auto& label : encoded.labels) {
      if (kind == ModelKind::crf) {
        alphabet.add(label.to_string());
      } else {
        for (const auto& component : label.components) alphabet.add(component.to_string());
      }
    }
  }
  return alphabet;
}

std::unique_ptr<Tagger> make_tagger(ModelKind kind, const TaggerConfig& config,
                                    corpus::Vocabulary vocabulary, LabelAlphabet alphabet,
                                    std::uint64_t seed) {
  nn::Rng rng(seed);
  if (kind == ModelKind::crf)
    return std::make_unique<CrfTagger>(config, std::move(vocabulary), std::move(alphabet), rng);
  return std::make_unique<Seq2seqTagger>(config, std::move(vocabulary), std::move(alphabet), rng);
}

}  // namespace nestner::models
