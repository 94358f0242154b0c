#include "nestner/codec.hpp"

#include <algorithm>

#include "nestner/log.hpp"

namespace nestner::codec {

DecodeError::DecodeError(std::size_t token, std::string component, const std::string& what)
    : Error("token " + std::to_string(token) + ", component '" + component + "': " + what),
      token_(token),
      component_(std::move(component)) {}

EncodedSentence encode(const Sentence& sentence) {
  return encode(sentence.size(), sentence.mentions);
}

EncodedSentence encode(std::size_t length, std::span<const Mention> mentions) {
  std::vector<Mention> ordered(mentions.begin(), mentions.end());
  sort_mentions(ordered);

  for (std::size_t i = 0; i < ordered.size(); ++i)
    for (std::size_t j = i + 1; j < ordered.size() && ordered[j].span.start < ordered[i].span.end; ++j)
      if (crossing(ordered[i], ordered[j])) {
        log::warning("crossing mentions " + ordered[i].type + "(" +
                     std::to_string(ordered[i].span.start) + "," + std::to_string(ordered[i].span.end) +
                     ") and " + ordered[j].type + "(" + std::to_string(ordered[j].span.start) + "," +
                     std::to_string(ordered[j].span.end) + ") may not decode identically");
        i = ordered.size();
        break;
      }

  EncodedSentence encoded;
  encoded.labels.resize(length);
  for (const auto& mention : ordered) {
    const Span& span = mention.span;
    for (std::size_t t = span.start; t < span.end && t < length; ++t) {
      Tag tag = Tag::I;
      if (span.length() == 1)
        tag = Tag::U;
      else if (t == span.start)
        tag = Tag::B;
      else if (t + 1 == span.end)
        tag = Tag::L;
      encoded.labels[t].components.push_back({tag, mention.type});
    }
  }
  return encoded;
}

namespace {

struct OpenMention {
  std::string type;
  std::size_t start;
  bool matched;
};

}  // namespace

std::vector<Mention> decode(const EncodedSentence& encoded, Policy policy) {
  const bool strict = policy == Policy::strict;
  std::vector<Mention> result;
  std::vector<OpenMention> open;

  auto unterminated = [](const OpenMention& m, std::size_t token) {
    return DecodeError(token, "B-" + m.type,
                       "mention of type " + m.type + " opened at token " + std::to_string(m.start) +
                           " is not continued");
  };

  for (std::size_t t = 0; t < encoded.length(); ++t) {
    for (auto& m : open) m.matched = false;

    for (const auto& component : encoded.labels[t].components) {
      switch (component.tag) {
        case Tag::U:
          result.push_back({component.type, {t, t + 1}});
          break;
        case Tag::B:
          open.push_back({component.type, t, true});
          break;
        case Tag::I:
        case Tag::L: {
          auto it = std::find_if(open.begin(), open.end(), [&](const OpenMention& m) {
            return !m.matched && m.type == component.type;
          });
          if (it == open.end()) {
            if (strict) throw DecodeError(t, component.to_string(), "no open mention to continue");
            if (component.tag == Tag::L)
              result.push_back({component.type, {t, t + 1}});
            else
              open.push_back({component.type, t, true});
            break;
          }
          if (component.tag == Tag::L) {
            result.push_back({it->type, {it->start, t + 1}});
            open.erase(it);
          } else {
            it->matched = true;
          }
          break;
        }
      }
    }

    // Open mentions that found no component at this token were interrupted.
    for (auto it = open.begin(); it != open.end();) {
      if (it->matched) {
        ++it;
        continue;
      }
      if (strict) throw unterminated(*it, t);
      result.push_back({it->type, {it->start, t}});
      it = open.erase(it);
    }
  }

  if (!open.empty()) {
    if (strict) throw unterminated(open.front(), encoded.length());
    for (const auto& m : open) result.push_back({m.type, {m.start, encoded.length()}});
  }

  sort_mentions(result);
  return result;
}

ComponentStream flatten(const EncodedSentence& encoded) {
  ComponentStream stream;
  for (const auto& label : encoded.labels) {
    for (const auto& component : label.components) stream.emplace_back(component);
    stream.emplace_back(std::nullopt);
  }
  return stream;
}

EncodedSentence unflatten(const ComponentStream& stream, std::size_t length) {
  auto markers = static_cast<std::size_t>(
      std::count_if(stream.begin(), stream.end(), [](const ComponentSymbol& s) { return !s; }));
  if (markers != length)
    throw Error("component stream has " + std::to_string(markers) + " <eow> markers, expected " +
                std::to_string(length));
  if (!stream.empty() && stream.back())
    throw Error("component stream does not end with <eow>");

  EncodedSentence encoded;
  encoded.labels.resize(length);
  std::size_t t = 0;
  for (const auto& symbol : stream) {
    if (symbol)
      encoded.labels[t].components.push_back(*symbol);
    else
      ++t;
  }
  return encoded;
}

std::vector<std::string> to_strings(const EncodedSentence& encoded) {
  std::vector<std::string> out;
  out.reserve(encoded.length());
  for (const auto& label : encoded.labels) out.push_back(label.to_string());
  return out;
}

EncodedSentence from_strings(std::span<const std::string> labels) {
  EncodedSentence encoded;
  encoded.labels.reserve(labels.size());
  for (const auto& label : labels) encoded.labels.push_back(Multilabel::parse(label));
  return encoded;
}

namespace {

void extend(const std::vector<Mention>& candidates, std::size_t next, std::size_t length,
            const EnumerationLimits& limits, std::vector<Mention>& chosen,
            const std::function<void(std::size_t, std::span<const Mention>)>& visit) {
  visit(length, chosen);
  if (chosen.size() == limits.max_mentions) return;
  for (std::size_t i = next; i < candidates.size(); ++i) {
    const Mention& m = candidates[i];
    if (!limits.include_crossing &&
        std::any_of(chosen.begin(), chosen.end(), [&](const Mention& c) { return crossing(c, m); }))
      continue;
    chosen.push_back(m);
    extend(candidates, i + 1, length, limits, chosen, visit);
    chosen.pop_back();
  }
}

}  // namespace

void enumerate_mention_sets(const EnumerationLimits& limits,
                            const std::function<void(std::size_t, std::span<const Mention>)>& visit) {
  for (std::size_t length = 1; length <= limits.max_length; ++length) {
    std::vector<Mention> candidates;
    for (std::size_t start = 0; start < length; ++start)
      for (std::size_t end = start + 1; end <= length; ++end)
        for (const auto& type : limits.types) candidates.push_back({type, {start, end}});
    std::vector<Mention> chosen;
    extend(candidates, 0, length, limits, chosen, visit);
  }
}

}  // namespace nestner::codec
