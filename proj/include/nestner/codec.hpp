// Linearization of nested mention sets into per-token multilabels.
//
// Every token carries the BILOU components of all mentions covering it,
// ordered by mention priority (earlier start first, then longer span). A
// sentence decodes back by matching each I-/L- component with the first open
// mention of the same type, scanning the open mentions in priority order.

#ifndef NESTNER_CODEC_HPP
#define NESTNER_CODEC_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <optional>
#include <span>
#include <vector>

#include "nestner/core.hpp"

namespace nestner::codec {

struct EncodedSentence {
  std::vector<Multilabel> labels;

  std::size_t length() const { return labels.size(); }
  bool operator==(const EncodedSentence&) const = default;
};

/// A flattened label stream; an empty optional stands for `<eow>`.
using ComponentSymbol = std::optional<LabelComponent>;
using ComponentStream = std::vector<ComponentSymbol>;

enum class Policy { strict, repair };

/// Raised by strict decoding; carries the offending coordinates.
class DecodeError : public Error {
 public:
  DecodeError(std::size_t token, std::string component, const std::string& what);
  std::size_t token() const { return token_; }
  const std::string& component() const { return component_; }

 private:
  std::size_t token_;
  std::string component_;
};

/// Logs a warning when the mentions contain a crossing (overlapping but not
/// nested) pair; such sets encode but may not decode back identically.
EncodedSentence encode(const Sentence& sentence);
EncodedSentence encode(std::size_t length, std::span<const Mention> mentions);

/// Returns mentions in priority order.
std::vector<Mention> decode(const EncodedSentence& encoded, Policy policy);

ComponentStream flatten(const EncodedSentence& encoded);

/// Throws Error when the number of `<eow>` markers differs from `length`.
EncodedSentence unflatten(const ComponentStream& stream, std::size_t length);

std::vector<std::string> to_strings(const EncodedSentence& encoded);
EncodedSentence from_strings(std::span<const std::string> labels);

struct EnumerationLimits {
  std::size_t max_length = 6;
  std::vector<std::string> types = {"A", "B"};
  std::size_t max_mentions = 4;
  bool include_crossing = false;
};

/// Visits every distinct mention set over sentences of length 1..max_length
/// with at most max_mentions mentions, in a fixed order. Without
/// include_crossing only sets whose mentions pairwise nest or are disjoint
/// are visited.
void enumerate_mention_sets(const EnumerationLimits& limits,
                            const std::function<void(std::size_t, std::span<const Mention>)>& visit);

}  // namespace nestner::codec

#endif  // NESTNER_CODEC_HPP
