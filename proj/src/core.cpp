#include "nestner/core.hpp"

#include <algorithm>

#include "nestner/log.hpp"

namespace nestner {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

void validate_form(std::string_view form) {
  if (form.empty()) throw Error("empty token form");
  if (std::any_of(form.begin(), form.end(), is_space))
    throw Error("token form contains whitespace: '" + std::string(form) + "'");
}

std::strong_ordering mention_priority_compare(const Mention& a, const Mention& b) {
  if (a.span.start != b.span.start) return a.span.start <=> b.span.start;
  if (a.span.end != b.span.end) return b.span.end <=> a.span.end;
  return a.type.compare(b.type) <=> 0;
}

void sort_mentions(std::vector<Mention>& mentions) {
  std::sort(mentions.begin(), mentions.end(), MentionPriorityLess{});
  mentions.erase(std::unique(mentions.begin(), mentions.end()), mentions.end());
}

bool crossing(const Mention& a, const Mention& b) {
  const Span& x = a.span;
  const Span& y = b.span;
  bool overlap = x.start < y.end && y.start < x.end;
  bool nested = (x.start <= y.start && y.end <= x.end) || (y.start <= x.start && x.end <= y.end);
  return overlap && !nested;
}

void validate_entity_type(std::string_view type) {
  if (type.empty()) throw Error("empty entity type");
  if (type.front() == '-') throw Error("entity type starts with '-': '" + std::string(type) + "'");
  for (char c : type)
    if (c == '|' || is_space(c))
      throw Error("invalid character in entity type '" + std::string(type) + "'");
}

void normalize_mentions(Sentence& sentence) {
  for (const auto& m : sentence.mentions) {
    validate_entity_type(m.type);
    if (!(m.span.start < m.span.end && m.span.end <= sentence.size()))
      throw Error("mention " + m.type + "(" + std::to_string(m.span.start) + "," +
                  std::to_string(m.span.end) + ") out of bounds for sentence of length " +
                  std::to_string(sentence.size()));
  }
  std::size_t before = sentence.mentions.size();
  sort_mentions(sentence.mentions);
  if (sentence.mentions.size() != before)
    log::warning("dropped " + std::to_string(before - sentence.mentions.size()) +
                 " duplicate mention(s)");
}

std::string LabelComponent::to_string() const {
  std::string out;
  out.reserve(type.size() + 2);
  out += static_cast<char>(tag);
  out += '-';
  out += type;
  return out;
}

LabelComponent LabelComponent::parse(std::string_view text) {
  if (text.empty()) throw ParseError("empty label component");
  if (text.size() < 3 || text[1] != '-')
    throw ParseError("malformed label component '" + std::string(text) + "'");
  LabelComponent component;
  switch (text[0]) {
    case 'B': component.tag = Tag::B; break;
    case 'I': component.tag = Tag::I; break;
    case 'L': component.tag = Tag::L; break;
    case 'U': component.tag = Tag::U; break;
    default:
      throw ParseError("malformed tag prefix in '" + std::string(text) + "'");
  }
  component.type = std::string(text.substr(2));
  for (char c : component.type)
    if (is_space(c)) throw ParseError("whitespace in label component '" + std::string(text) + "'");
  return component;
}

std::string Multilabel::to_string() const {
  if (components.empty()) return std::string(kOutsideLabel);
  std::string out;
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i) out += '|';
    out += components[i].to_string();
  }
  return out;
}

Multilabel Multilabel::parse(std::string_view text) {
  if (text == kOutsideLabel) return {};
  if (text.empty()) throw ParseError("empty label");
  Multilabel label;
  std::size_t begin = 0;
  while (true) {
    std::size_t bar = text.find('|', begin);
    std::string_view piece = text.substr(begin, bar == std::string_view::npos ? bar : bar - begin);
    if (piece.empty()) throw ParseError("stray '|' in label '" + std::string(text) + "'");
    try {
      label.components.push_back(LabelComponent::parse(piece));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()) + " in label '" + std::string(text) + "'");
    }
    if (bar == std::string_view::npos) break;
    begin = bar + 1;
  }
  return label;
}

LabelAlphabet::LabelAlphabet() : LabelAlphabet(std::string(kOutsideLabel)) {}

LabelAlphabet::LabelAlphabet(std::string reserved)
    : fallbacks_(std::make_shared<std::atomic<std::size_t>>(0)) {
  add(reserved);
}

LabelAlphabet LabelAlphabet::build(std::string reserved, std::span<const std::string> labels) {
  LabelAlphabet alphabet(std::move(reserved));
  for (const auto& label : labels) alphabet.add(label);
  return alphabet;
}

std::size_t LabelAlphabet::add(const std::string& label) {
  auto [it, inserted] = index_.emplace(label, strings_.size());
  if (inserted) strings_.push_back(label);
  return it->second;
}

std::optional<std::size_t> LabelAlphabet::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelAlphabet::lookup(const std::string& label) const {
  if (auto id = find(label)) return *id;
  ++*fallbacks_;
  return 0;
}

LabelAlphabet build_multilabel_alphabet(std::span<const std::string> labels) {
  return LabelAlphabet::build(std::string(kOutsideLabel), labels);
}

LabelAlphabet build_component_alphabet(std::span<const std::string> labels) {
  return LabelAlphabet::build(std::string(kEndOfWord), labels);
}

std::vector<std::string> utf8_characters(std::string_view text) {
  std::vector<std::string> chars;
  std::size_t i = 0;
  while (i < text.size()) {
    auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0)
      len = 4;
    else if (lead >= 0xE0)
      len = 3;
    else if (lead >= 0xC0)
      len = 2;
    len = std::min(len, text.size() - i);
    chars.emplace_back(text.substr(i, len));
    i += len;
  }
  return chars;
}

}  // namespace nestner
