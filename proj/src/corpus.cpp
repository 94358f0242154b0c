#include "nestner/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nestner/codec.hpp"

namespace nestner::corpus {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

/// Splits into lines, dropping a trailing '\r' from each.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (begin < text.size()) {
    std::size_t nl = text.find('\n', begin);
    std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    begin = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view text, char separator) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    std::size_t pos = text.find(separator, begin);
    if (pos == std::string_view::npos) {
      fields.push_back(text.substr(begin));
      break;
    }
    fields.push_back(text.substr(begin, pos - begin));
    begin = pos + 1;
  }
  return fields;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t'; });
}

std::string where(const std::string& source, std::size_t line_number) {
  return source + ":" + std::to_string(line_number);
}

Token parse_token(const std::vector<std::string_view>& fields, const ColumnSpec& columns,
                  std::string* label) {
  Token token;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::string value(fields[c]);
    switch (columns.columns()[c]) {
      case Column::form:
        validate_form(value);
        token.form = std::move(value);
        break;
      case Column::lemma:
        if (value != "_") token.lemma = std::move(value);
        break;
      case Column::pos:
        if (value != "_") token.pos = std::move(value);
        break;
      case Column::label:
        if (label) *label = std::move(value);
        break;
    }
  }
  return token;
}

void append_token(std::string& out, const Token& token, const ColumnSpec& columns,
                  const std::string* label) {
  bool first = true;
  for (Column column : columns.columns()) {
    const std::string* value = nullptr;
    static const std::string kMissing = "_";
    switch (column) {
      case Column::form: value = &token.form; break;
      case Column::lemma: value = token.lemma ? &*token.lemma : &kMissing; break;
      case Column::pos: value = token.pos ? &*token.pos : &kMissing; break;
      case Column::label:
        if (!label) continue;
        value = label;
        break;
    }
    if (!first) out += '\t';
    out += *value;
    first = false;
  }
  out += '\n';
}

std::size_t parse_index(std::string_view text, const std::string& context) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError(context + ": invalid token index '" + std::string(text) + "'");
  return value;
}

}  // namespace

ColumnSpec::ColumnSpec(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (!has(Column::form)) throw Error("column spec needs a form column");
  for (std::size_t i = 0; i < columns_.size(); ++i)
    for (std::size_t j = i + 1; j < columns_.size(); ++j)
      if (columns_[i] == columns_[j]) throw Error("duplicate column in column spec");
}

ColumnSpec ColumnSpec::parse(std::string_view text) {
  std::vector<Column> columns;
  for (auto name : split(text, ',')) {
    if (name == "form")
      columns.push_back(Column::form);
    else if (name == "lemma")
      columns.push_back(Column::lemma);
    else if (name == "pos")
      columns.push_back(Column::pos);
    else if (name == "label")
      columns.push_back(Column::label);
    else
      throw Error("unknown column '" + std::string(name) + "' in column spec '" +
                  std::string(text) + "'");
  }
  return ColumnSpec(std::move(columns));
}

bool ColumnSpec::has(Column column) const {
  return std::find(columns_.begin(), columns_.end(), column) != columns_.end();
}

ColumnSpec ColumnSpec::without_label() const {
  std::vector<Column> columns;
  for (Column c : columns_)
    if (c != Column::label) columns.push_back(c);
  return ColumnSpec(std::move(columns));
}

std::string ColumnSpec::to_string() const {
  static const char* kNames[] = {"form", "lemma", "pos", "label"};
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += kNames[static_cast<int>(columns_[i])];
  }
  return out;
}

std::size_t TaggedCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

TaggedCorpus parse_conll(std::string_view text, const ColumnSpec& columns, Scheme scheme,
                         const std::string& source, codec::Policy policy) {
  TaggedCorpus corpus;
  corpus.source = source;
  corpus.scheme = scheme;
  corpus.columns = columns;
  const bool has_label = columns.has(Column::label);

  Sentence current;
  std::vector<std::string> labels;
  std::vector<std::size_t> line_numbers;

  auto finish = [&]() {
    if (current.tokens.empty()) return;
    if (has_label) {
      std::vector<std::string> bilou = scheme == Scheme::bio ? bio_to_bilou(labels) : labels;
      codec::EncodedSentence encoded;
      for (std::size_t t = 0; t < bilou.size(); ++t) {
        try {
          encoded.labels.push_back(Multilabel::parse(bilou[t]));
        } catch (const ParseError& e) {
          throw ParseError(where(source, line_numbers[t]) + ": " + e.what());
        }
      }
      try {
        current.mentions = codec::decode(encoded, policy);
      } catch (const codec::DecodeError& e) {
        throw Error(source + ": sentence " + std::to_string(corpus.sentences.size()) + ", " +
                    e.what());
      }
    }
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
    labels.clear();
    line_numbers.clear();
  };

  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (blank(line)) {
      finish();
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() < columns.size())
      throw ParseError(where(source, i + 1) + ": expected " + std::to_string(columns.size()) +
                       " columns, found " + std::to_string(fields.size()) + " in '" +
                       std::string(line) + "'");
    std::string label;
    try {
      current.tokens.push_back(parse_token(fields, columns, &label));
    } catch (const Error& e) {
      throw ParseError(where(source, i + 1) + ": " + e.what());
    }
    labels.push_back(std::move(label));
    line_numbers.push_back(i + 1);
  }
  finish();
  return corpus;
}

TaggedCorpus read_conll(const std::string& path, const ColumnSpec& columns, Scheme scheme,
                        codec::Policy policy) {
  return parse_conll(read_file(path), columns, scheme, path, policy);
}

std::string format_conll(const TaggedCorpus& corpus) {
  std::string out;
  const bool has_label = corpus.columns.has(Column::label);
  for (const auto& sentence : corpus.sentences) {
    std::vector<std::string> labels;
    if (has_label) {
      labels = codec::to_strings(codec::encode(sentence));
      if (corpus.scheme == Scheme::bio) labels = bilou_to_bio(labels);
    }
    for (std::size_t t = 0; t < sentence.size(); ++t)
      append_token(out, sentence.tokens[t], corpus.columns, has_label ? &labels[t] : nullptr);
    out += '\n';
  }
  return out;
}

void write_conll(const TaggedCorpus& corpus, const std::string& path) {
  write_file(path, format_conll(corpus));
}

TaggedCorpus parse_spans(std::string_view text, const ColumnSpec& columns,
                         const std::string& source) {
  const ColumnSpec token_columns = columns.without_label();
  TaggedCorpus corpus;
  corpus.source = source;
  corpus.columns = columns;

  Sentence current;
  bool in_block = false;
  std::size_t header_line = 0;

  auto finish = [&]() {
    if (!in_block) return;
    if (current.tokens.empty())
      throw ParseError(where(source, header_line) + ": span line without tokens");
    try {
      normalize_mentions(current);
    } catch (const Error& e) {
      throw ParseError(where(source, header_line) + ": " + e.what());
    }
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
    in_block = false;
  };

  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (blank(line)) {
      finish();
      continue;
    }
    if (!in_block) {
      if (line.front() != '#')
        throw ParseError(where(source, i + 1) + ": sentence block must start with a '#' span line");
      in_block = true;
      header_line = i + 1;
      std::string_view list = line.substr(1);
      while (!list.empty() && list.front() == ' ') list.remove_prefix(1);
      if (list.empty()) continue;
      for (auto item : split(list, ';')) {
        auto parts = split(item, ' ');
        if (parts.size() != 3)
          throw ParseError(where(source, i + 1) + ": expected 'TYPE START END', got '" +
                           std::string(item) + "'");
        std::string context = where(source, i + 1);
        current.mentions.push_back({std::string(parts[0]),
                                    {parse_index(parts[1], context), parse_index(parts[2], context)}});
      }
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() < token_columns.size())
      throw ParseError(where(source, i + 1) + ": expected " + std::to_string(token_columns.size()) +
                       " columns in '" + std::string(line) + "'");
    try {
      current.tokens.push_back(parse_token(fields, token_columns, nullptr));
    } catch (const Error& e) {
      throw ParseError(where(source, i + 1) + ": " + e.what());
    }
  }
  finish();
  return corpus;
}

TaggedCorpus read_spans(const std::string& path, const ColumnSpec& columns) {
  return parse_spans(read_file(path), columns, path);
}

std::string format_spans(const TaggedCorpus& corpus) {
  const ColumnSpec token_columns = corpus.columns.without_label();
  std::string out;
  for (const auto& sentence : corpus.sentences) {
    std::vector<Mention> mentions = sentence.mentions;
    sort_mentions(mentions);
    out += '#';
    for (std::size_t i = 0; i < mentions.size(); ++i) {
      out += i ? ';' : ' ';
      out += mentions[i].type + ' ' + std::to_string(mentions[i].span.start) + ' ' +
             std::to_string(mentions[i].span.end);
    }
    out += '\n';
    for (const auto& token : sentence.tokens) append_token(out, token, token_columns, nullptr);
    out += '\n';
  }
  return out;
}

void write_spans(const TaggedCorpus& corpus, const std::string& path) {
  write_file(path, format_spans(corpus));
}

namespace {

void reject_nested(const Multilabel& label) {
  if (label.components.size() > 1)
    throw Error("scheme conversion is flat-only, got nested label '" + label.to_string() + "'");
}

}  // namespace

std::vector<Mention> bio_mentions(std::span<const std::string> labels) {
  std::vector<Mention> mentions;
  std::optional<Mention> open;
  auto close = [&](std::size_t end) {
    if (!open) return;
    open->span.end = end;
    mentions.push_back(*open);
    open.reset();
  };
  for (std::size_t t = 0; t < labels.size(); ++t) {
    Multilabel label = Multilabel::parse(labels[t]);
    reject_nested(label);
    if (label.outside()) {
      close(t);
      continue;
    }
    const auto& c = label.components.front();
    if (c.tag == Tag::L || c.tag == Tag::U)
      throw Error("BIO input contains BILOU label '" + labels[t] + "'");
    if (c.tag == Tag::I && open && open->type == c.type) continue;
    close(t);
    open = Mention{c.type, {t, t}};
  }
  close(labels.size());
  sort_mentions(mentions);
  return mentions;
}

std::vector<std::string> bio_to_bilou(std::span<const std::string> labels) {
  auto mentions = bio_mentions(labels);
  return codec::to_strings(codec::encode(labels.size(), mentions));
}

std::vector<std::string> bilou_to_bio(std::span<const std::string> labels) {
  auto encoded = codec::from_strings(labels);
  for (const auto& label : encoded.labels) reject_nested(label);
  auto mentions = codec::decode(encoded, codec::Policy::strict);
  std::vector<std::string> out(labels.size(), std::string(kOutsideLabel));
  for (const auto& m : mentions)
    for (std::size_t t = m.span.start; t < m.span.end; ++t)
      out[t] = (t == m.span.start ? "B-" : "I-") + m.type;
  return out;
}

std::vector<Eigen::MatrixXd> parse_contextual(std::string_view text, const TaggedCorpus& corpus) {
  std::vector<std::vector<std::vector<double>>> sentences(1);
  auto lines = split_lines(text);
  std::size_t dim = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) {
      if (!sentences.back().empty()) sentences.emplace_back();
      continue;
    }
    std::vector<double> row;
    std::istringstream in{std::string(lines[i])};
    std::string field;
    while (in >> field) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError("contextual vectors line " + std::to_string(i + 1) +
                         ": non-numeric field '" + field + "'");
      }
    }
    if (dim == 0) dim = row.size();
    if (row.size() != dim)
      throw ParseError("contextual vectors line " + std::to_string(i + 1) + ": expected " +
                       std::to_string(dim) + " values, found " + std::to_string(row.size()));
    sentences.back().push_back(std::move(row));
  }
  if (sentences.back().empty()) sentences.pop_back();

  if (sentences.size() != corpus.size())
    throw Error("contextual vectors hold " + std::to_string(sentences.size()) +
                " sentences, corpus has " + std::to_string(corpus.size()));
  std::vector<Eigen::MatrixXd> out;
  out.reserve(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (sentences[s].size() != corpus.sentences[s].size())
      throw Error("contextual vectors for sentence " + std::to_string(s) + " have " +
                  std::to_string(sentences[s].size()) + " rows, sentence has " +
                  std::to_string(corpus.sentences[s].size()) + " tokens");
    Eigen::MatrixXd m(sentences[s].size(), dim);
    for (std::size_t t = 0; t < sentences[s].size(); ++t)
      for (std::size_t d = 0; d < dim; ++d) m(t, d) = sentences[s][t][d];
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Eigen::MatrixXd> read_contextual(const std::string& path, const TaggedCorpus& corpus) {
  return parse_contextual(read_file(path), corpus);
}

FeatureMap::FeatureMap() : strings_{"<pad>", "<unk>"} {
  index_.emplace(strings_[0], kPad);
  index_.emplace(strings_[1], kUnk);
}

FeatureMap FeatureMap::from_counts(const std::map<std::string, std::size_t>& counts,
                                   std::size_t min_frequency) {
  std::vector<std::pair<std::string, std::size_t>> items;
  for (const auto& [key, count] : counts)
    if (count >= min_frequency) items.emplace_back(key, count);
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> strings;
  for (auto& item : items) strings.push_back(std::move(item.first));
  return from_strings(std::move(strings));
}

FeatureMap FeatureMap::from_strings(std::vector<std::string> strings) {
  FeatureMap map;
  for (auto& s : strings)
    if (map.index_.emplace(s, map.strings_.size()).second) map.strings_.push_back(std::move(s));
  return map;
}

std::size_t FeatureMap::lookup(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? kUnk : it->second;
}

Vocabulary build_vocabulary(std::span<const Sentence> sentences, std::size_t min_frequency) {
  std::map<std::string, std::size_t> forms, lemmas, chars, pos;
  for (const auto& sentence : sentences)
    for (const auto& token : sentence.tokens) {
      ++forms[token.form];
      if (token.lemma) ++lemmas[*token.lemma];
      if (token.pos) ++pos[*token.pos];
      for (auto& c : utf8_characters(token.form)) ++chars[c];
    }
  Vocabulary vocabulary;
  vocabulary.forms = FeatureMap::from_counts(forms, min_frequency);
  vocabulary.lemmas = FeatureMap::from_counts(lemmas, min_frequency);
  vocabulary.chars = FeatureMap::from_counts(chars, 1);
  vocabulary.pos = FeatureMap::from_counts(pos, 1);
  return vocabulary;
}

Vocabulary build_vocabulary(const TaggedCorpus& corpus, std::size_t min_frequency) {
  return build_vocabulary(corpus.sentences, min_frequency);
}

TaggedCorpus concatenate(TaggedCorpus base, const TaggedCorpus& extra) {
  if (base.columns.columns() != extra.columns.columns())
    throw Error("cannot concatenate corpora with different column specs");
  if (base.contextual.empty() != extra.contextual.empty())
    throw Error("cannot concatenate corpora where only one has contextual vectors");
  base.sentences.insert(base.sentences.end(), extra.sentences.begin(), extra.sentences.end());
  base.contextual.insert(base.contextual.end(), extra.contextual.begin(), extra.contextual.end());
  return base;
}

}  // namespace nestner::corpus
