#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "fixtures.hpp"
#include "nestner/corpus.hpp"
#include "synthetic.hpp"

using namespace nestner;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "nestner");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  const char* env = std::getenv("NESTNER_TMP");
  fs::path dir = env ? env : fs::temp_directory_path() / "nestner_test";
  dir /= "cli";
  fs::create_directories(dir);
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  auto path = (temp_dir() / name).string();
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const std::string kCourtSpans =
    "# ORG 1 9;GPE 2 3;GPE 4 5;GPE 7 9\n"
    "in\nthe\nUS\nFederal\nDistrict\nCourt\nof\nNew\nMexico\n.\n\n";

}  // namespace

TEST_CASE("encode produces the canonical court labels") {
  auto spans = write("court.spans", kCourtSpans);
  auto r = run({"encode", spans});
  CHECK(r.code == 0);
  CHECK(r.out == testing::court_conll());

  auto out = (temp_dir() / "court.conll").string();
  CHECK(run({"encode", spans, "-o", out}).code == 0);
  CHECK(slurp(out) == testing::court_conll());
  CHECK(run({"encode", out, "--from", "labels"}).out == testing::court_conll());
}

TEST_CASE("decode inverts encode") {
  auto conll = write("court_labels.conll", testing::court_conll());
  auto r = run({"decode", conll});
  CHECK(r.code == 0);
  CHECK(r.out == kCourtSpans);
}

TEST_CASE("strict decoding reports coordinates; repair continues") {
  auto bad = write("bad.conll", "a\tO\n\nb\tB-ORG\nc\tO\n\n");
  auto strict = run({"decode", bad});
  CHECK(strict.code == 1);
  CHECK(strict.err.find("sentence 1") != std::string::npos);
  CHECK(strict.err.find("token 1") != std::string::npos);
  auto repaired = run({"decode", bad, "--policy", "repair"});
  CHECK(repaired.code == 0);
  CHECK(repaired.out.find("ORG 0 1") != std::string::npos);
}

TEST_CASE("convert between BIO and BILOU") {
  auto bio = write("flat.bio", "John\tB-PER\nSmith\tI-PER\nin\tO\nParis\tB-LOC\n\n");
  auto r = run({"convert", bio, "--to", "bilou"});
  CHECK(r.code == 0);
  CHECK(r.out == "John\tB-PER\nSmith\tL-PER\nin\tO\nParis\tU-LOC\n\n");
  auto bilou = write("flat.bilou", r.out);
  CHECK(run({"convert", bilou, "--to", "bio"}).out == slurp(bio));

  auto nested = write("court_nested.conll", testing::court_conll());
  auto refused = run({"convert", nested, "--to", "bio"});
  CHECK(refused.code == 1);
  CHECK(refused.err.find("nested") != std::string::npos);
}

TEST_CASE("usage errors exit with 1 and print usage") {
  auto r = run({"encode", "--bogus"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == 1);
  CHECK(run({"train", "--train", "x"}).code == 1);
  auto missing = run({"decode", (temp_dir() / "does_not_exist.conll").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("does_not_exist") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("roundtrip and gradcheck commands") {
  auto r = run({"roundtrip", "--max-len", "4", "--types", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("failures: 0") != std::string::npos);
  auto crossing = run({"roundtrip", "--max-len", "3", "--types", "1", "--crossing"});
  CHECK(crossing.code == 0);
  CHECK(crossing.out.find("crossing sets") != std::string::npos);
  auto g = run({"gradcheck", "--model", "crf"});
  CHECK(g.code == 0);
  CHECK(g.out.find("all parameters passed") != std::string::npos);
}

TEST_CASE("train, predict and evaluate") {
  auto data = testing::synthetic_corpus(8, 21);
  auto train_path = write("train.conll", corpus::format_conll(data));
  auto model = (temp_dir() / "tiny.model").string();
  auto metrics = (temp_dir() / "tiny.metrics").string();
  std::vector<std::string> common{"--hidden", "8",       "--embed-dim", "8",    "--char-dim",
                                  "4",        "--char-rnn-dim", "4",   "--decoder-dim", "8",
                                  "--label-dim", "4",    "--dropout",   "0",    "--word-dropout",
                                  "0",        "--lr",    "0.02"};
  std::vector<std::string> args{"train", "--train", train_path, "-o", model, "--model", "crf",
                                "--epochs", "150", "--metrics", metrics};
  args.insert(args.end(), common.begin(), common.end());
  auto t = run(args);
  REQUIRE(t.code == 0);
  CHECK(t.out.find("trained crf for 150 epochs") != std::string::npos);
  std::istringstream lines(slurp(metrics));
  int count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == 150);

  auto pred = (temp_dir() / "pred.conll").string();
  REQUIRE(run({"predict", train_path, "--checkpoint", model, "-o", pred}).code == 0);
  auto e = run({"evaluate", "--gold", train_path, "--pred", pred});
  CHECK(e.code == 0);
  CHECK(e.out.find("ALL") != std::string::npos);
  CHECK(e.out.find("1.0000    1.0000    1.0000") != std::string::npos);

  auto short_pred = write("short.conll", corpus::format_conll(testing::synthetic_corpus(3, 21)));
  CHECK(run({"evaluate", "--gold", train_path, "--pred", short_pred}).code == 1);
}

TEST_CASE("train option validation") {
  auto train_path = write("court_train.conll", testing::court_conll());
  auto model = (temp_dir() / "court.model").string();
  CHECK(run({"train", "--train", train_path, "-o", model, "--include-dev"}).code == 1);
  CHECK(run({"train", "--train", train_path, "-o", model, "--pos-onehot"}).code == 1);
  CHECK(run({"train", "--train", train_path, "-o", model, "--lr", "-1"}).code == 1);
  CHECK(run({"train", "--train", train_path, "-o", model, "--model", "hmm"}).code == 1);

  auto dev = write("court_dev.conll", "Prague\tU-LOC\n\n");
  auto r = run({"train", "--train", train_path, "--dev", dev, "--include-dev", "-o", model, "--epochs", "1",
                "--hidden", "4", "--embed-dim", "4", "--char-rnn-dim", "2", "--char-dim", "2"});
  CHECK(r.code == 0);
  CHECK(fs::exists(model));
}
