// Domain types shared by every nestner module: tokens, spans, mentions,
// BILOU label components, multilabels and dense label alphabets.

#ifndef NESTNER_CORE_HPP
#define NESTNER_CORE_HPP

#include <atomic>
#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nestner {

/// Recoverable validation failure in user-supplied data (bad labels, bad
/// files, inconsistent arguments). The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

struct Token {
  std::string form;
  std::optional<std::string> lemma;
  std::optional<std::string> pos;

  bool operator==(const Token&) const = default;
};

/// Throws Error if `form` is empty or contains whitespace.
void validate_form(std::string_view form);

/// Half-open token range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool contains(std::size_t token) const { return start <= token && token < end; }
  bool operator==(const Span&) const = default;
};

struct Mention {
  std::string type;
  Span span;

  bool operator==(const Mention&) const = default;
};

/// Mention priority: earlier start first, then longer span, then entity type
/// in lexicographic order.
std::strong_ordering mention_priority_compare(const Mention& a, const Mention& b);

struct MentionPriorityLess {
  bool operator()(const Mention& a, const Mention& b) const {
    return mention_priority_compare(a, b) < 0;
  }
};

/// Sorts in priority order and removes exact duplicates.
void sort_mentions(std::vector<Mention>& mentions);

/// True when the two mentions overlap without one containing the other.
bool crossing(const Mention& a, const Mention& b);

void validate_entity_type(std::string_view type);

struct Sentence {
  std::vector<Token> tokens;
  std::vector<Mention> mentions;  // kept in priority order

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

/// Checks span bounds and entity types, sorts the mentions and drops
/// duplicate (type, span) pairs with a warning.
void normalize_mentions(Sentence& sentence);

enum class Tag : char { B = 'B', I = 'I', L = 'L', U = 'U' };

struct LabelComponent {
  Tag tag = Tag::U;
  std::string type;

  std::string to_string() const;
  static LabelComponent parse(std::string_view text);
  bool operator==(const LabelComponent&) const = default;
};

/// Components of every mention intersecting one token, highest priority
/// first. Empty means outside ("O").
struct Multilabel {
  std::vector<LabelComponent> components;

  bool outside() const { return components.empty(); }
  std::string to_string() const;
  static Multilabel parse(std::string_view text);
  bool operator==(const Multilabel&) const = default;
};

inline constexpr std::string_view kOutsideLabel = "O";
inline constexpr std::string_view kEndOfWord = "<eow>";

/// Dense bijection between label strings and ids. Id 0 is reserved ("O" for
/// multilabel alphabets, "<eow>" for component alphabets). Lookups of unseen
/// labels fall back to id 0 and bump a shared counter.
class LabelAlphabet {
 public:
  LabelAlphabet();
  explicit LabelAlphabet(std::string reserved);

  static LabelAlphabet build(std::string reserved, std::span<const std::string> labels);

  std::size_t add(const std::string& label);
  std::size_t size() const { return strings_.size(); }
  bool contains(const std::string& label) const { return index_.contains(label); }
  std::optional<std::size_t> find(const std::string& label) const;
  std::size_t lookup(const std::string& label) const;
  const std::string& label(std::size_t id) const { return strings_.at(id); }
  const std::vector<std::string>& strings() const { return strings_; }
  std::size_t fallback_count() const { return fallbacks_->load(); }

 private:
  std::vector<std::string> strings_;
  std::unordered_map<std::string, std::size_t> index_;
  std::shared_ptr<std::atomic<std::size_t>> fallbacks_;
};

LabelAlphabet build_multilabel_alphabet(std::span<const std::string> labels);
LabelAlphabet build_component_alphabet(std::span<const std::string> labels);

/// Splits UTF-8 text into code points (each returned as its own byte string).
std::vector<std::string> utf8_characters(std::string_view text);

}  // namespace nestner

#endif  // NESTNER_CORE_HPP
