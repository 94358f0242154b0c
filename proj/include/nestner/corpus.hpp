// CoNLL-style vertical corpora with nested multilabels.
//
// One token per line, tab-separated columns in the order given by a
// ColumnSpec, a blank line after every sentence, UTF-8, final newline.

#ifndef NESTNER_CORPUS_HPP
#define NESTNER_CORPUS_HPP

#include <Eigen/Core>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nestner/codec.hpp"
#include "nestner/core.hpp"

namespace nestner::corpus {

enum class Column { form, lemma, pos, label };

/// Explicit column layout, e.g. "form,label" or "form,lemma,pos,label".
class ColumnSpec {
 public:
  ColumnSpec() : columns_{Column::form, Column::label} {}
  explicit ColumnSpec(std::vector<Column> columns);
  static ColumnSpec parse(std::string_view text);

  const std::vector<Column>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }
  bool has(Column column) const;
  ColumnSpec without_label() const;
  std::string to_string() const;

 private:
  std::vector<Column> columns_;
};

enum class Scheme { bilou, bio };

struct TaggedCorpus {
  std::vector<Sentence> sentences;
  std::string source;
  Scheme scheme = Scheme::bilou;
  ColumnSpec columns;
  /// Either empty or one (tokens x dim) matrix per sentence.
  std::vector<Eigen::MatrixXd> contextual;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  std::size_t token_count() const;
};

TaggedCorpus read_conll(const std::string& path, const ColumnSpec& columns,
                        Scheme scheme = Scheme::bilou,
                        codec::Policy policy = codec::Policy::strict);
TaggedCorpus parse_conll(std::string_view text, const ColumnSpec& columns,
                         Scheme scheme = Scheme::bilou, const std::string& source = "<memory>",
                         codec::Policy policy = codec::Policy::strict);

std::string format_conll(const TaggedCorpus& corpus);
void write_conll(const TaggedCorpus& corpus, const std::string& path);

/// Span-list input: every sentence block starts with a line `#` or
/// `# TYPE START END;TYPE START END` followed by its token lines, which
/// carry every column of the spec except the label.
TaggedCorpus parse_spans(std::string_view text, const ColumnSpec& columns,
                         const std::string& source = "<memory>");
TaggedCorpus read_spans(const std::string& path, const ColumnSpec& columns);
std::string format_spans(const TaggedCorpus& corpus);
void write_spans(const TaggedCorpus& corpus, const std::string& path);

/// Flat-only scheme conversion. Throws Error on nested multilabels, and on
/// L-/U- tags inside BIO input. An I- without a preceding mention of the
/// same type starts a new mention.
std::vector<std::string> bio_to_bilou(std::span<const std::string> labels);
std::vector<std::string> bilou_to_bio(std::span<const std::string> labels);
std::vector<Mention> bio_mentions(std::span<const std::string> labels);

/// Contextual-vector sidecar: one line of reals per token, blank line between
/// sentences. Token counts must match `corpus`.
std::vector<Eigen::MatrixXd> read_contextual(const std::string& path, const TaggedCorpus& corpus);
std::vector<Eigen::MatrixXd> parse_contextual(std::string_view text, const TaggedCorpus& corpus);

/// Dense ids with pad = 0 and unk = 1; remaining ids ordered by descending
/// frequency, ties lexicographically.
class FeatureMap {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  FeatureMap();
  static FeatureMap from_counts(const std::map<std::string, std::size_t>& counts,
                                std::size_t min_frequency);
  static FeatureMap from_strings(std::vector<std::string> strings);

  std::size_t size() const { return strings_.size(); }
  std::size_t lookup(const std::string& key) const;
  bool contains(const std::string& key) const { return index_.contains(key); }
  const std::vector<std::string>& strings() const { return strings_; }
  bool operator==(const FeatureMap& other) const { return strings_ == other.strings_; }

 private:
  std::vector<std::string> strings_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Vocabulary {
  FeatureMap forms;
  FeatureMap lemmas;
  FeatureMap chars;
  FeatureMap pos;

  bool operator==(const Vocabulary&) const = default;
};

Vocabulary build_vocabulary(const TaggedCorpus& corpus, std::size_t min_frequency = 1);
Vocabulary build_vocabulary(std::span<const Sentence> sentences, std::size_t min_frequency = 1);

/// Concatenates `extra` onto `base` (e.g. train + dev). Column specs must match.
TaggedCorpus concatenate(TaggedCorpus base, const TaggedCorpus& extra);

}  // namespace nestner::corpus

#endif  // NESTNER_CORPUS_HPP
