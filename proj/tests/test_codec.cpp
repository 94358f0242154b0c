#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "nestner/codec.hpp"
#include "nestner/log.hpp"

using namespace nestner;
using codec::Policy;

namespace {

codec::EncodedSentence labels(std::initializer_list<const char*> text) {
  std::vector<std::string> strings(text.begin(), text.end());
  return codec::from_strings(strings);
}

struct QuietLog {
  QuietLog() : previous(log::set_sink([](log::Level, const std::string&) {})) {}
  ~QuietLog() { log::set_sink(std::move(previous)); }
  log::Sink previous;
};

}  // namespace

TEST_CASE("court sentence encodes to its published labels") {
  auto encoded = codec::encode(testing::court_sentence());
  CHECK(codec::to_strings(encoded) == testing::court_labels());
  auto decoded = codec::decode(encoded, Policy::strict);
  CHECK(decoded == testing::court_sentence().mentions);

  auto strings = testing::court_labels();
  std::set<std::string> distinct(strings.begin(), strings.end());
  CHECK(distinct.size() == 6);
}

TEST_CASE("encoding ignores input mention order") {
  auto s = testing::court_sentence();
  std::reverse(s.mentions.begin(), s.mentions.end());
  CHECK(codec::to_strings(codec::encode(s)) == testing::court_labels());
}

TEST_CASE("strict decoding rejects malformed sequences with coordinates") {
  SUBCASE("orphan inside") {
    try {
      codec::decode(labels({"O", "I-ORG", "L-ORG"}), Policy::strict);
      FAIL("expected DecodeError");
    } catch (const codec::DecodeError& e) {
      CHECK(e.token() == 1);
      CHECK(e.component() == "I-ORG");
    }
  }
  SUBCASE("interrupted mention") {
    try {
      codec::decode(labels({"B-ORG", "O", "L-ORG"}), Policy::strict);
      FAIL("expected DecodeError");
    } catch (const codec::DecodeError& e) {
      CHECK(e.token() == 1);
    }
  }
  SUBCASE("unterminated at the end") {
    CHECK_THROWS_AS(codec::decode(labels({"B-ORG", "I-ORG"}), Policy::strict), codec::DecodeError);
  }
  SUBCASE("orphan last") {
    CHECK_THROWS_AS(codec::decode(labels({"L-GPE"}), Policy::strict), codec::DecodeError);
  }
}

TEST_CASE("repair decoding closes and opens mentions predictably") {
  CHECK(codec::decode(labels({"O", "I-ORG", "L-ORG"}), Policy::repair) ==
        std::vector<Mention>{{"ORG", {1, 3}}});
  CHECK(codec::decode(labels({"B-ORG", "O", "L-ORG"}), Policy::repair) ==
        std::vector<Mention>{{"ORG", {0, 1}}, {"ORG", {2, 3}}});
  CHECK(codec::decode(labels({"B-ORG", "I-ORG"}), Policy::repair) == std::vector<Mention>{{"ORG", {0, 2}}});
  CHECK(codec::decode(labels({"L-GPE", "O"}), Policy::repair) == std::vector<Mention>{{"GPE", {0, 1}}});
  CHECK(codec::decode(labels({"B-ORG", "L-GPE"}), Policy::repair) ==
        std::vector<Mention>{{"ORG", {0, 1}}, {"GPE", {1, 2}}});
}

TEST_CASE("same-type nesting continues the outer mention first") {
  std::vector<Mention> m{{"ORG", {0, 4}}, {"ORG", {1, 3}}};
  auto encoded = codec::encode(4, m);
  CHECK(codec::to_strings(encoded) ==
        std::vector<std::string>{"B-ORG", "I-ORG|B-ORG", "I-ORG|L-ORG", "L-ORG"});
  CHECK(codec::decode(encoded, Policy::strict) == m);
}

TEST_CASE("crossing mentions produce a warning") {
  QuietLog quiet;
  auto before = log::warning_count();
  codec::encode(3, std::vector<Mention>{{"A", {0, 2}}, {"A", {1, 3}}});
  CHECK(log::warning_count() == before + 1);
  codec::encode(3, std::vector<Mention>{{"A", {0, 3}}, {"A", {1, 2}}});
  CHECK(log::warning_count() == before + 1);
}

TEST_CASE("flatten and unflatten") {
  auto encoded = codec::encode(testing::court_sentence());
  auto stream = codec::flatten(encoded);
  // 10 <eow> markers plus 1 + 2 + 1 + 2 + 1 + 1 + 2 + 2 components.
  CHECK(stream.size() == 22);
  CHECK_FALSE(stream.front().has_value());
  CHECK(codec::unflatten(stream, 10) == encoded);
  CHECK_THROWS_AS(codec::unflatten(stream, 9), Error);
  stream.push_back(LabelComponent{Tag::U, "ORG"});
  CHECK_THROWS_AS(codec::unflatten(stream, 10), Error);
  CHECK(codec::unflatten({}, 0).length() == 0);
}

TEST_CASE("enumeration counts match an independent count") {
  // Length 2, one type: spans (0,1), (1,2), (0,2); every subset is nested.
  std::size_t count = 0;
  codec::EnumerationLimits limits{2, {"A"}, 4, false};
  codec::enumerate_mention_sets(limits, [&](std::size_t length, std::span<const Mention>) {
    if (length == 2) ++count;
  });
  CHECK(count == 8);

  // Length 3, one type, crossing excluded: 6 spans, the only crossing pair
  // is (0,2)/(1,3); 64 subsets minus the 16 containing it.
  count = 0;
  limits = {3, {"A"}, 6, false};
  codec::enumerate_mention_sets(limits, [&](std::size_t length, std::span<const Mention>) {
    if (length == 3) ++count;
  });
  CHECK(count == 48);
}

TEST_CASE("exhaustive strict round trip, small bound") {
  codec::EnumerationLimits limits{5, {"A", "B"}, 3, false};
  std::size_t failures = 0;
  codec::enumerate_mention_sets(limits, [&](std::size_t length, std::span<const Mention> set) {
    std::vector<Mention> expected(set.begin(), set.end());
    sort_mentions(expected);
    auto encoded = codec::encode(length, expected);
    if (codec::decode(encoded, Policy::strict) != expected) ++failures;
    if (codec::unflatten(codec::flatten(encoded), length) != encoded) ++failures;
  });
  CHECK(failures == 0);
}
