#ifndef NESTNER_TESTS_FIXTURES_HPP
#define NESTNER_TESTS_FIXTURES_HPP

#include <string>
#include <vector>

#include "nestner/core.hpp"
#include "nestner/models/tagger.hpp"

namespace nestner::testing {

/// "in the US Federal District Court of New Mexico ." with its nested
/// ORG/GPE mentions.
inline Sentence court_sentence() {
  Sentence s;
  for (const char* form : {"in", "the", "US", "Federal", "District", "Court", "of", "New", "Mexico", "."})
    s.tokens.push_back({form, std::nullopt, std::nullopt});
  s.mentions = {{"ORG", {1, 9}}, {"GPE", {2, 3}}, {"GPE", {4, 5}}, {"GPE", {7, 9}}};
  sort_mentions(s.mentions);
  return s;
}

inline std::vector<std::string> court_labels() {
  return {"O",       "B-ORG", "I-ORG|U-GPE", "I-ORG",       "I-ORG|U-GPE",
          "I-ORG",   "I-ORG", "I-ORG|B-GPE", "L-ORG|L-GPE", "O"};
}

inline std::string court_conll() {
  return "in\tO\nthe\tB-ORG\nUS\tI-ORG|U-GPE\nFederal\tI-ORG\nDistrict\tI-ORG|U-GPE\n"
         "Court\tI-ORG\nof\tI-ORG\nNew\tI-ORG|B-GPE\nMexico\tL-ORG|L-GPE\n.\tO\n\n";
}

/// Dimensions small enough for finite-difference checks.
inline models::TaggerConfig tiny_config() {
  models::TaggerConfig c;
  c.embedding.trainable_dim = 8;
  c.embedding.char_dim = 4;
  c.embedding.char_rnn_dim = 4;
  c.hidden_dim = 8;
  c.decoder_dim = 8;
  c.label_dim = 4;
  return c;
}

}  // namespace nestner::testing

#endif  // NESTNER_TESTS_FIXTURES_HPP
