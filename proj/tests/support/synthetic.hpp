#ifndef NESTNER_TESTS_SYNTHETIC_HPP
#define NESTNER_TESTS_SYNTHETIC_HPP

#include <cstdint>

#include "nestner/corpus.hpp"

namespace nestner::testing {

/// Sentences from a small stochastic grammar over two entity types (ORG,
/// GPE) with nesting depth at most 3, e.g.
///   "officials of the Council of the Texas University said ."
corpus::TaggedCorpus synthetic_corpus(std::size_t sentences, std::uint64_t seed);

}  // namespace nestner::testing

#endif  // NESTNER_TESTS_SYNTHETIC_HPP
