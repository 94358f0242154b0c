// Strict mention-level scoring: a predicted mention counts only when both its
// span and its type match a gold mention exactly. Counts are micro-summed
// over sentences.

#ifndef NESTNER_EVAL_HPP
#define NESTNER_EVAL_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nestner/core.hpp"

namespace nestner::eval {

struct Score {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  /// Recomputes precision, recall and f1 from the counts.
  void finalize();
};

struct Report {
  Score overall;
  std::map<std::string, Score> per_type;
};

using MentionSets = std::span<const std::vector<Mention>>;

/// Throws Error when the sentence counts differ.
Report score(MentionSets gold, MentionSets predicted);

/// Fixed-width text table with one row per type and a final ALL row.
std::string format_table(const Report& report);
/// One JSON object per line: {type, tp, fp, fn, p, r, f1}, ALL last.
std::string format_records(const Report& report);

}  // namespace nestner::eval

#endif  // NESTNER_EVAL_HPP
