#ifndef NESTNER_TOOLS_COMMANDS_HPP
#define NESTNER_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nestner/codec.hpp"
#include "nestner/models/tagger.hpp"
#include "nestner/nn/grad_check.hpp"

namespace nestner::cli {

/// Exit codes: 0 success, 1 invalid input or usage, 2 internal failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Finite-difference check of a freshly initialized model at tiny
/// dimensions on a short nested sentence, dropout off.
nn::GradCheckReport check_model_gradients(models::ModelKind kind, std::uint64_t seed);

struct RoundtripSummary {
  std::size_t sets = 0;
  std::size_t failures = 0;           // properly nested sets that did not round-trip
  std::size_t crossing_sets = 0;
  std::size_t crossing_failures = 0;  // expected limitation
  std::size_t stream_failures = 0;    // flatten/unflatten mismatches
  std::size_t warnings = 0;
};

/// Encodes and strictly decodes every enumerated mention set, and checks
/// the flatten/unflatten identity on each encoding.
RoundtripSummary roundtrip(const codec::EnumerationLimits& limits);

}  // namespace nestner::cli

#endif  // NESTNER_TOOLS_COMMANDS_HPP
