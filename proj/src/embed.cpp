#include "nestner/embed.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nestner/train/regularization.hpp"

namespace nestner::embed {

int EmbeddingConfig::output_dim() const {
  int dim = pretrained_dim + trainable_dim;
  if (use_lemmas) dim += trainable_dim;
  if (use_pos_onehot) dim += pos_count;
  if (char_rnn_dim > 0) dim += 2 * char_rnn_dim;
  return dim + contextual_dim;
}

std::string lowercase_ascii(std::string text) {
  for (char& c : text)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return text;
}

namespace {

std::vector<std::string> fields_of(std::string_view line) {
  std::vector<std::string> fields;
  std::istringstream in{std::string(line)};
  std::string f;
  while (in >> f) fields.push_back(std::move(f));
  return fields;
}

bool parse_real(const std::string& text, double& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_count(const std::string& text) {
  return !text.empty() && text.find_first_not_of("0123456789") == std::string::npos;
}

}  // namespace

PretrainedTable PretrainedTable::parse(std::string_view text, int expected_dim) {
  PretrainedTable table(expected_dim);
  std::size_t line_number = 0;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t nl = text.find('\n', begin);
    std::string_view line = text.substr(begin, nl == std::string_view::npos ? nl : nl - begin);
    begin = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_number;
    auto fields = fields_of(line);
    if (fields.empty()) continue;
    if (line_number == 1 && fields.size() == 2 && is_count(fields[0]) && is_count(fields[1])) {
      if (expected_dim <= 0) {
        expected_dim = std::stoi(fields[1]);
        table = PretrainedTable(expected_dim);
      }
      if (std::stoi(fields[1]) != expected_dim)
        throw Error("pretrained vectors line 1: header declares dimension " + fields[1] +
                    ", expected " + std::to_string(expected_dim));
      continue;
    }
    if (expected_dim <= 0) {
      expected_dim = static_cast<int>(fields.size()) - 1;
      table = PretrainedTable(expected_dim);
    }
    if (static_cast<int>(fields.size()) - 1 != expected_dim)
      throw Error("pretrained vectors line " + std::to_string(line_number) + ": expected " +
                  std::to_string(expected_dim) + " values, found " +
                  std::to_string(fields.size() - 1));
    std::vector<double> values(static_cast<std::size_t>(expected_dim));
    for (int d = 0; d < expected_dim; ++d)
      if (!parse_real(fields[static_cast<std::size_t>(d) + 1], values[static_cast<std::size_t>(d)]))
        throw Error("pretrained vectors line " + std::to_string(line_number) +
                    ": non-numeric field '" + fields[static_cast<std::size_t>(d) + 1] + "'");
    table.add(fields[0], std::move(values));
  }
  return table;
}

PretrainedTable PretrainedTable::load(const std::string& path, int expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), expected_dim);
}

void PretrainedTable::add(const std::string& word, std::vector<double> values) {
  if (static_cast<int>(values.size()) != dim_) throw Error("pretrained vector has wrong dimension");
  if (index_.emplace(word, rows_.size()).second) rows_.push_back(std::move(values));
}

long PretrainedTable::find(const std::string& form) const {
  auto it = index_.find(lowercase_ascii(form));
  if (it == index_.end()) it = index_.find(form);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

nn::Vector PretrainedTable::row(long id) const {
  if (id < 0) return nn::Vector::Zero(dim_);
  const auto& r = rows_.at(static_cast<std::size_t>(id));
  return Eigen::Map<const nn::Vector>(r.data(), dim_);
}

SentenceFeatures extract_features(const Sentence& sentence, const corpus::Vocabulary& vocabulary,
                                  const PretrainedTable* pretrained,
                                  const Eigen::MatrixXd* contextual) {
  SentenceFeatures features;
  features.tokens.reserve(sentence.size());
  for (const auto& token : sentence.tokens) {
    TokenFeatures f;
    f.form = vocabulary.forms.lookup(token.form);
    if (token.lemma) f.lemma = vocabulary.lemmas.lookup(*token.lemma);
    if (token.pos) f.pos = vocabulary.pos.lookup(*token.pos);
    for (const auto& c : utf8_characters(token.form)) f.chars.push_back(vocabulary.chars.lookup(c));
    if (pretrained) f.pretrained = pretrained->find(token.form);
    features.tokens.push_back(std::move(f));
  }
  if (contextual) features.contextual = *contextual;
  return features;
}

Embedder::Embedder(const EmbeddingConfig& config, const corpus::Vocabulary& vocabulary,
                   nn::Parameters& params, nn::Rng& rng)
    : config_(config) {
  const nn::Index dim = config.trainable_dim;
  nn::Matrix forms(static_cast<nn::Index>(vocabulary.forms.size()), dim);
  nn::init_uniform_fan_in(forms, dim, rng);
  form_table_ = params.add("embed.form", std::move(forms));
  if (config.use_lemmas) {
    nn::Matrix lemmas(static_cast<nn::Index>(vocabulary.lemmas.size()), dim);
    nn::init_uniform_fan_in(lemmas, dim, rng);
    lemma_table_ = params.add("embed.lemma", std::move(lemmas));
  }
  if (config.char_rnn_dim > 0) {
    nn::Matrix chars(static_cast<nn::Index>(vocabulary.chars.size()), config.char_dim);
    nn::init_uniform_fan_in(chars, config.char_dim, rng);
    char_table_ = params.add("embed.char", std::move(chars));
    char_forward_ = nn::add_gru(params, "embed.char_gru.fw", config.char_dim, config.char_rnn_dim, rng);
    char_backward_ = nn::add_gru(params, "embed.char_gru.bw", config.char_dim, config.char_rnn_dim, rng);
  }
}

Embedder::Embedder(const EmbeddingConfig& config, const nn::Parameters& params,
                   const PretrainedTable* pretrained)
    : config_(config), pretrained_(pretrained) {
  form_table_ = params.id("embed.form");
  if (config.use_lemmas) lemma_table_ = params.id("embed.lemma");
  if (config.char_rnn_dim > 0) {
    char_table_ = params.id("embed.char");
    char_forward_ = nn::find_gru(params, "embed.char_gru.fw");
    char_backward_ = nn::find_gru(params, "embed.char_gru.bw");
  }
}

nn::Var Embedder::char_embedding(nn::Graph& g, const std::vector<std::size_t>& chars) const {
  std::vector<nn::Var> inputs;
  inputs.reserve(chars.size());
  for (std::size_t c : chars) inputs.push_back(g.lookup(char_table_, static_cast<nn::Index>(c)));
  return nn::bigru_final(g, char_forward_, char_backward_, inputs);
}

nn::Var Embedder::embed_token(nn::Graph& g, const SentenceFeatures& features, std::size_t t) const {
  const TokenFeatures& f = features.tokens.at(t);
  std::vector<nn::Var> parts;
  if (config_.pretrained_dim > 0) {
    nn::Vector v = pretrained_ ? pretrained_->row(f.pretrained) : nn::Vector::Zero(config_.pretrained_dim);
    parts.push_back(g.input(std::move(v)));
  }
  parts.push_back(g.lookup(form_table_, static_cast<nn::Index>(f.form)));
  if (config_.use_lemmas) parts.push_back(g.lookup(lemma_table_, static_cast<nn::Index>(f.lemma)));
  if (config_.use_pos_onehot) {
    nn::Matrix onehot = nn::Matrix::Zero(config_.pos_count, 1);
    if (static_cast<int>(f.pos) < config_.pos_count) onehot(static_cast<nn::Index>(f.pos), 0) = 1.0;
    parts.push_back(g.input(std::move(onehot)));
  }
  if (config_.char_rnn_dim > 0) parts.push_back(char_embedding(g, f.chars));
  if (config_.contextual_dim > 0) {
    nn::Matrix row = nn::Matrix::Zero(config_.contextual_dim, 1);
    if (features.contextual) {
      if (features.contextual->cols() != config_.contextual_dim)
        throw Error("contextual vectors have dimension " + std::to_string(features.contextual->cols()) +
                    ", model expects " + std::to_string(config_.contextual_dim));
      row = features.contextual->row(static_cast<nn::Index>(t)).transpose();
    }
    parts.push_back(g.input(std::move(row)));
  }
  return g.concat(parts);
}

std::vector<nn::Var> Embedder::embed_sentence(nn::Graph& g, const SentenceFeatures& features,
                                              const Noise& noise) const {
  const SentenceFeatures* source = &features;
  SentenceFeatures dropped;
  if (noise.training() && noise.word_dropout > 0.0) {
    dropped = features;
    for (auto& token : dropped.tokens) {
      if (train::bernoulli(noise.word_dropout, *noise.rng)) {
        token.form = corpus::FeatureMap::kUnk;
        token.lemma = corpus::FeatureMap::kUnk;
        token.pretrained = -1;
      }
    }
    source = &dropped;
  }
  std::vector<nn::Var> out;
  out.reserve(source->size());
  for (std::size_t t = 0; t < source->size(); ++t) out.push_back(embed_token(g, *source, t));
  return out;
}

}  // namespace nestner::embed
