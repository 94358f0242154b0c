#include "synthetic.hpp"

#include <random>
#include <string>
#include <vector>

namespace nestner::testing {
namespace {

const std::vector<std::string> kPlaces = {"Prague", "Texas", "Mexico", "Ohio",   "Berlin",
                                          "Kenya",  "Peru",  "Oslo",   "Chile",  "Nevada",
                                          "Utah",   "Quebec", "Bavaria", "Lima", "Kyoto"};
const std::vector<std::string> kPlacePrefixes = {"New", "North", "South"};
const std::vector<std::string> kCompanies = {"Acme", "Globex", "Initech", "Umbrella",
                                             "Stark", "Wayne", "Tyrell", "Cyberdyne"};
const std::vector<std::string> kSuffixes = {"Corp", "Group", "Labs", "Inc"};
const std::vector<std::string> kHeads = {"University", "Bank",      "Court", "Museum",
                                         "Council",    "Institute", "Police"};
const std::vector<std::string> kFillers = {"the",  "in",        "said", "officials", "from",
                                           "visited", "near",   "a",    "report",    "yesterday",
                                           "announced", "with", "and",  "on",        "Monday"};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  Sentence sentence() {
    Sentence s;
    fillers(s, pick(3));
    std::size_t entities = 1 + pick(3);
    for (std::size_t e = 0; e < entities; ++e) {
      entity(s);
      fillers(s, 1 + pick(3));
    }
    push(s, ".");
    sort_mentions(s.mentions);
    return s;
  }

 private:
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  const std::string& choose(const std::vector<std::string>& items) { return items[pick(items.size())]; }

  void push(Sentence& s, const std::string& form) { s.tokens.push_back({form, std::nullopt, std::nullopt}); }

  void fillers(Sentence& s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) push(s, choose(kFillers));
  }

  void mention(Sentence& s, const char* type, std::size_t start) {
    s.mentions.push_back({type, {start, s.size()}});
  }

  void place(Sentence& s) {
    std::size_t start = s.size();
    if (pick(3) == 0) push(s, choose(kPlacePrefixes));
    push(s, choose(kPlaces));
    mention(s, "GPE", start);
  }

  // "<place> <Head>" or "<Head> of <place>"; depth 2.
  void organization_with_place(Sentence& s) {
    std::size_t start = s.size();
    if (pick(2) == 0) {
      place(s);
      push(s, choose(kHeads));
    } else {
      push(s, choose(kHeads));
      push(s, "of");
      place(s);
    }
    mention(s, "ORG", start);
  }

  void entity(Sentence& s) {
    std::size_t start = s.size();
    switch (pick(5)) {
      case 0:
        place(s);
        break;
      case 1:
        push(s, choose(kCompanies));
        push(s, choose(kSuffixes));
        mention(s, "ORG", start);
        break;
      case 2:
      case 3:
        organization_with_place(s);
        break;
      default:
        // "<Head> of the <organization with place>"; depth 3.
        push(s, choose(kHeads));
        push(s, "of");
        push(s, "the");
        organization_with_place(s);
        mention(s, "ORG", start);
        break;
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace

corpus::TaggedCorpus synthetic_corpus(std::size_t sentences, std::uint64_t seed) {
  Generator generator(seed);
  corpus::TaggedCorpus corpus;
  corpus.source = "<synthetic>";
  for (std::size_t i = 0; i < sentences; ++i) corpus.sentences.push_back(generator.sentence());
  return corpus;
}

}  // namespace nestner::testing
