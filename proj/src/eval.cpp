#include "nestner/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <json.hpp>

namespace nestner::eval {

void Score::finalize() {
  precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

struct MentionKey {
  std::string type;
  std::size_t start;
  std::size_t end;
  auto operator<=>(const MentionKey&) const = default;
};

std::set<MentionKey> keys(const std::vector<Mention>& mentions) {
  std::set<MentionKey> out;
  for (const auto& m : mentions) out.insert({m.type, m.span.start, m.span.end});
  return out;
}

}  // namespace

Report score(MentionSets gold, MentionSets predicted) {
  if (gold.size() != predicted.size())
    throw Error("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                std::to_string(predicted.size()));
  Report report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    auto g = keys(gold[s]);
    auto p = keys(predicted[s]);
    for (const auto& k : g) {
      Score& type = report.per_type[k.type];
      if (p.contains(k)) {
        ++type.tp;
        ++report.overall.tp;
      } else {
        ++type.fn;
        ++report.overall.fn;
      }
    }
    for (const auto& k : p)
      if (!g.contains(k)) {
        ++report.per_type[k.type].fp;
        ++report.overall.fp;
      }
  }
  report.overall.finalize();
  for (auto& [type, s] : report.per_type) s.finalize();
  return report;
}

std::string format_table(const Report& report) {
  std::size_t width = 4;
  for (const auto& [type, s] : report.per_type) width = std::max(width, type.size());
  std::string out;
  char line[256];
  auto row = [&](const std::string& name, const Score& s) {
    std::snprintf(line, sizeof line, "%-*s %7zu %7zu %7zu %9.4f %9.4f %9.4f\n",
                  static_cast<int>(width), name.c_str(), s.tp, s.fp, s.fn, s.precision, s.recall, s.f1);
    out += line;
  };
  std::snprintf(line, sizeof line, "%-*s %7s %7s %7s %9s %9s %9s\n", static_cast<int>(width), "type",
                "tp", "fp", "fn", "precision", "recall", "f1");
  out += line;
  for (const auto& [type, s] : report.per_type) row(type, s);
  row("ALL", report.overall);
  return out;
}

std::string format_records(const Report& report) {
  std::string out;
  auto record = [&](const std::string& name, const Score& s) {
    nlohmann::json j = {{"type", name}, {"tp", s.tp},        {"fp", s.fp}, {"fn", s.fn},
                        {"p", s.precision}, {"r", s.recall}, {"f1", s.f1}};
    out += j.dump() + "\n";
  };
  for (const auto& [type, s] : report.per_type) record(type, s);
  record("ALL", report.overall);
  return out;
}

}  // namespace nestner::eval
