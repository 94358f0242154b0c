#include "commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nestner/corpus.hpp"
#include "nestner/embed.hpp"
#include "nestner/eval.hpp"
#include "nestner/log.hpp"
#include "nestner/models/serialization.hpp"
#include "nestner/train/trainer.hpp"

namespace nestner::cli {
namespace {

struct UsageError : Error {
  using Error::Error;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path + "'");
  file << text;
}

corpus::ColumnSpec with_label(const corpus::ColumnSpec& columns) {
  auto cols = columns.without_label().columns();
  cols.push_back(corpus::Column::label);
  return corpus::ColumnSpec(cols);
}

codec::Policy parse_policy(const std::string& text) {
  if (text == "strict") return codec::Policy::strict;
  if (text == "repair") return codec::Policy::repair;
  throw UsageError("--policy must be strict or repair, got '" + text + "'");
}

corpus::Scheme parse_scheme(const std::string& text) {
  if (text == "bilou") return corpus::Scheme::bilou;
  if (text == "bio") return corpus::Scheme::bio;
  throw UsageError("scheme must be bilou or bio, got '" + text + "'");
}

std::string type_name(std::size_t i) {
  std::string name;
  do {
    name.insert(name.begin(), static_cast<char>('A' + i % 26));
    i /= 26;
  } while (i-- > 0);
  return name;
}

void attach_contextual(corpus::TaggedCorpus& corpus, const std::string& path) {
  if (!path.empty()) corpus.contextual = corpus::read_contextual(path, corpus);
}

std::shared_ptr<const embed::PretrainedTable> load_pretrained(const std::string& path, int dim) {
  if (path.empty()) return nullptr;
  return std::make_shared<const embed::PretrainedTable>(embed::PretrainedTable::load(path, dim));
}

}  // namespace

nn::GradCheckReport check_model_gradients(models::ModelKind kind, std::uint64_t seed) {
  Sentence sentence;
  for (const char* form : {"New", "Mexico", "Court", "."}) sentence.tokens.push_back({form, {}, {}});
  sentence.mentions = {{"ORG", {0, 3}}, {"GPE", {0, 2}}};
  sort_mentions(sentence.mentions);
  std::vector<Sentence> data{sentence};

  models::TaggerConfig config;
  config.embedding.trainable_dim = 8;
  config.embedding.char_dim = 4;
  config.embedding.char_rnn_dim = 4;
  config.hidden_dim = 8;
  config.decoder_dim = 8;
  config.label_dim = 4;

  auto tagger = models::make_tagger(kind, config, corpus::build_vocabulary(data),
                                    models::build_label_alphabet(kind, data), seed);
  models::Example example = tagger->prepare(sentence, nullptr);
  const embed::Noise off;
  return nn::grad_check([&](nn::Graph& g) { return tagger->loss(g, example, off); },
                        tagger->parameters(), 0.1, 1e-4, nn::Difference::extrapolated);
}

RoundtripSummary roundtrip(const codec::EnumerationLimits& limits) {
  RoundtripSummary summary;
  auto previous = log::set_sink([](log::Level, const std::string&) {});
  const std::size_t warnings_before = log::warning_count();
  codec::enumerate_mention_sets(limits, [&](std::size_t length, std::span<const Mention> set) {
    ++summary.sets;
    std::vector<Mention> expected(set.begin(), set.end());
    sort_mentions(expected);
    bool has_crossing = false;
    for (std::size_t i = 0; i < expected.size() && !has_crossing; ++i)
      for (std::size_t j = i + 1; j < expected.size(); ++j)
        if (crossing(expected[i], expected[j])) {
          has_crossing = true;
          break;
        }
    if (has_crossing) ++summary.crossing_sets;

    auto encoded = codec::encode(length, expected);
    if (codec::unflatten(codec::flatten(encoded), length) != encoded) ++summary.stream_failures;
    bool ok = false;
    try {
      ok = codec::decode(encoded, codec::Policy::strict) == expected;
    } catch (const codec::DecodeError&) {
    }
    if (!ok) ++(has_crossing ? summary.crossing_failures : summary.failures);
  });
  summary.warnings = log::warning_count() - warnings_before;
  log::set_sink(std::move(previous));
  return summary;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nested named entity recognition toolkit", "nestner"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::string columns_text = "form,label";
  std::string output;

  // encode
  auto* encode = app.add_subcommand("encode", "Span lists (or labels) to canonical multilabels");
  std::string encode_input, encode_from = "spans";
  encode->add_option("input", encode_input, "Input file")->required();
  encode->add_option("-o,--output", output, "Output file (default stdout)");
  encode->add_option("--from", encode_from, "Input format: spans or labels")
      ->check(CLI::IsMember({"spans", "labels"}));
  encode->add_option("--columns", columns_text, "Column layout, e.g. form,lemma,pos,label");

  // decode
  auto* decode = app.add_subcommand("decode", "Multilabels to span lists");
  std::string decode_input, policy_text = "strict";
  decode->add_option("input", decode_input, "Input file")->required();
  decode->add_option("-o,--output", output, "Output file (default stdout)");
  decode->add_option("--policy", policy_text, "strict or repair")->check(CLI::IsMember({"strict", "repair"}));
  decode->add_option("--columns", columns_text, "Column layout");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert flat labels between BIO and BILOU");
  std::string convert_input, convert_to;
  convert->add_option("input", convert_input, "Input file")->required();
  convert->add_option("--to", convert_to, "Target scheme: bio or bilou")
      ->required()
      ->check(CLI::IsMember({"bio", "bilou"}));
  convert->add_option("-o,--output", output, "Output file (default stdout)");
  convert->add_option("--columns", columns_text, "Column layout");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  std::string train_path, dev_path, model_text = "seq2seq", checkpoint, metrics_path;
  std::string pretrained_path, contextual_path, dev_contextual_path, scheme_text = "bilou";
  int pretrained_dim = 0;
  models::TaggerConfig config;
  train::TrainOptions options;
  train_cmd->add_option("--train", train_path, "Training corpus")->required();
  train_cmd->add_option("--dev", dev_path, "Development corpus");
  train_cmd->add_option("--model", model_text, "crf or seq2seq")->check(CLI::IsMember({"crf", "seq2seq"}));
  train_cmd->add_option("-o,--output", checkpoint, "Checkpoint file")->required();
  train_cmd->add_option("--metrics", metrics_path, "Per-epoch metrics (JSON lines)");
  train_cmd->add_option("--columns", columns_text, "Column layout");
  train_cmd->add_option("--scheme", scheme_text, "bilou or bio")->check(CLI::IsMember({"bilou", "bio"}));
  train_cmd->add_option("--pretrained", pretrained_path, "Pretrained word vectors (text format)");
  train_cmd->add_option("--pretrained-dim", pretrained_dim, "Expected vector dimension (0: from file)");
  train_cmd->add_option("--contextual", contextual_path, "Contextual vectors for the training corpus");
  train_cmd->add_option("--dev-contextual", dev_contextual_path, "Contextual vectors for the dev corpus");
  train_cmd->add_option("--seed", options.train.seed, "Random seed");
  train_cmd->add_option("--epochs", options.train.epochs, "Epochs");
  train_cmd->add_option("--lr", options.optimizer.learning_rate, "Adam learning rate");
  train_cmd->add_option("--batch", options.train.batch_size, "Sentences per batch");
  train_cmd->add_flag("--include-dev", options.train.include_dev_in_train, "Train on train+dev");
  train_cmd->add_option("--hidden", config.hidden_dim, "Encoder units per direction");
  train_cmd->add_option("--embed-dim", config.embedding.trainable_dim, "Trainable word embedding size");
  train_cmd->add_option("--char-dim", config.embedding.char_dim, "Character embedding size");
  train_cmd->add_option("--char-rnn-dim", config.embedding.char_rnn_dim, "Character GRU units per direction");
  train_cmd->add_option("--decoder-dim", config.decoder_dim, "Decoder LSTM units");
  train_cmd->add_option("--label-dim", config.label_dim, "Decoder label embedding size");
  train_cmd->add_option("--max-components", config.max_components, "Decoder components per token");
  train_cmd->add_flag("--lemmas", config.embedding.use_lemmas, "Embed lemmas when the corpus has them");
  train_cmd->add_flag("--pos-onehot", config.embedding.use_pos_onehot, "Append one-hot POS tags");
  train_cmd->add_option("--dropout", options.regularization.dropout_rate, "Dropout rate");
  train_cmd->add_option("--word-dropout", options.regularization.word_dropout_rate, "Word dropout rate");
  train_cmd->add_option("--min-freq", options.min_frequency, "Minimum form/lemma frequency");

  // predict
  auto* predict = app.add_subcommand("predict", "Tag a corpus with a trained model");
  std::string predict_input, model_path;
  predict->add_option("input", predict_input, "Input corpus")->required();
  predict->add_option("--checkpoint", model_path, "Trained model file")->required();
  predict->add_option("-o,--output", output, "Output file (default stdout)");
  predict->add_option("--columns", columns_text, "Column layout of the input");
  predict->add_option("--pretrained", pretrained_path, "Pretrained word vectors");
  predict->add_option("--contextual", contextual_path, "Contextual vectors for the input");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Strict mention-level precision/recall/F1");
  std::string gold_path, pred_path, records_path;
  evaluate->add_option("--gold", gold_path, "Gold corpus")->required();
  evaluate->add_option("--pred", pred_path, "Predicted corpus")->required();
  evaluate->add_option("--columns", columns_text, "Column layout of both files");
  evaluate->add_option("--json", records_path, "Also write JSON-lines records");

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of both models");
  std::string gradcheck_model = "both";
  std::uint64_t gradcheck_seed = 1;
  gradcheck->add_option("--model", gradcheck_model, "crf, seq2seq or both")
      ->check(CLI::IsMember({"crf", "seq2seq", "both"}));
  gradcheck->add_option("--seed", gradcheck_seed, "Initialization seed");

  // roundtrip
  auto* roundtrip_cmd = app.add_subcommand("roundtrip", "Exhaustive codec round-trip");
  codec::EnumerationLimits limits;
  std::size_t type_count = 2;
  roundtrip_cmd->add_option("--max-len", limits.max_length, "Longest sentence")->check(CLI::Range(1, 12));
  roundtrip_cmd->add_option("--types", type_count, "Number of entity types")->check(CLI::Range(1, 26));
  roundtrip_cmd->add_option("--max-mentions", limits.max_mentions, "Mentions per sentence");
  roundtrip_cmd->add_flag("--crossing", limits.include_crossing, "Also enumerate crossing mentions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const auto columns = corpus::ColumnSpec::parse(columns_text);

    if (*encode) {
      corpus::TaggedCorpus data =
          encode_from == "spans" ? corpus::read_spans(encode_input, with_label(columns))
                                 : corpus::read_conll(encode_input, with_label(columns));
      emit(corpus::format_conll(data), output, out);
    } else if (*decode) {
      auto data = corpus::read_conll(decode_input, with_label(columns), corpus::Scheme::bilou,
                                     parse_policy(policy_text));
      emit(corpus::format_spans(data), output, out);
    } else if (*convert) {
      auto target = parse_scheme(convert_to);
      auto source = target == corpus::Scheme::bio ? corpus::Scheme::bilou : corpus::Scheme::bio;
      auto data = corpus::read_conll(convert_input, with_label(columns), source);
      data.scheme = target;
      if (target == corpus::Scheme::bio)
        for (const auto& s : data.sentences)
          for (std::size_t i = 0; i < s.mentions.size(); ++i)
            for (std::size_t j = i + 1; j < s.mentions.size(); ++j)
              if (s.mentions[j].span.start < s.mentions[i].span.end)
                throw Error(data.source + ": BIO cannot represent nested mentions");
      emit(corpus::format_conll(data), output, out);
    } else if (*train_cmd) {
      auto scheme = parse_scheme(scheme_text);
      auto train_data = corpus::read_conll(train_path, with_label(columns), scheme);
      attach_contextual(train_data, contextual_path);
      std::optional<corpus::TaggedCorpus> dev;
      if (!dev_path.empty()) {
        dev = corpus::read_conll(dev_path, with_label(columns), scheme);
        attach_contextual(*dev, dev_contextual_path);
      } else if (options.train.include_dev_in_train) {
        throw UsageError("--include-dev requires --dev");
      }
      if (!dev_contextual_path.empty() && !dev) throw UsageError("--dev-contextual requires --dev");
      if (config.embedding.use_pos_onehot && !columns.has(corpus::Column::pos))
        throw UsageError("--pos-onehot requires a pos column");
      options.checkpoint_path = checkpoint;
      options.optimizer.validate();
      options.regularization.validate();
      options.train.validate();

      std::ofstream metrics;
      if (metrics_path.empty()) metrics_path = checkpoint + ".metrics.jsonl";
      metrics.open(metrics_path, std::ios::binary);
      if (!metrics) throw Error("cannot write '" + metrics_path + "'");
      options.on_epoch = [&](const train::EpochMetrics& m, const models::Tagger&) {
        metrics << m.to_json() << '\n';
        metrics.flush();
        return true;
      };
      auto result = train::train(train_data, dev ? &*dev : nullptr, models::parse_model_kind(model_text),
                                 config, options, load_pretrained(pretrained_path, pretrained_dim));
      const auto& last = result.metrics.back();
      out << "trained " << models::to_string(result.model->kind()) << " for " << result.metrics.size()
          << " epochs, final train loss " << std::setprecision(6) << last.train_loss << '\n';
    } else if (*predict) {
      auto model = models::load(model_path);
      int dim = model->config().embedding.pretrained_dim;
      if (dim > 0 && pretrained_path.empty())
        throw UsageError("model was trained with pretrained vectors; pass --pretrained");
      if (dim > 0) model->set_pretrained(load_pretrained(pretrained_path, dim));
      auto data = corpus::read_conll(predict_input, columns);
      attach_contextual(data, contextual_path);
      auto predictions = train::predict_corpus(*model, data);
      for (std::size_t i = 0; i < data.size(); ++i) data.sentences[i].mentions = predictions[i];
      data.columns = with_label(columns);
      data.scheme = corpus::Scheme::bilou;
      emit(corpus::format_conll(data), output, out);
    } else if (*evaluate) {
      auto gold = corpus::read_conll(gold_path, with_label(columns));
      auto pred = corpus::read_conll(pred_path, with_label(columns));
      if (gold.size() != pred.size())
        throw Error("gold has " + std::to_string(gold.size()) + " sentences, predictions " +
                    std::to_string(pred.size()));
      for (std::size_t i = 0; i < gold.size(); ++i)
        if (gold.sentences[i].size() != pred.sentences[i].size())
          throw Error("sentence " + std::to_string(i) + ": gold has " +
                      std::to_string(gold.sentences[i].size()) + " tokens, predictions " +
                      std::to_string(pred.sentences[i].size()));
      auto report = eval::score(train::gold_mentions(gold), train::gold_mentions(pred));
      out << eval::format_table(report);
      if (!records_path.empty()) emit(eval::format_records(report), records_path, out);
    } else if (*gradcheck) {
      std::vector<models::ModelKind> kinds;
      if (gradcheck_model != "seq2seq") kinds.push_back(models::ModelKind::crf);
      if (gradcheck_model != "crf") kinds.push_back(models::ModelKind::seq2seq);
      bool passed = true;
      for (auto kind : kinds) {
        auto report = check_model_gradients(kind, gradcheck_seed);
        for (const auto& p : report.params)
          out << std::left << std::setw(8) << models::to_string(kind) << std::setw(28) << p.name
              << std::scientific << std::setprecision(3) << p.max_relative_error << std::defaultfloat
              << "  " << (p.passed ? "PASS" : "FAIL") << '\n';
        passed = passed && report.passed;
      }
      out << (passed ? "all parameters passed\n" : "gradient check FAILED\n");
      return passed ? 0 : 1;
    } else if (*roundtrip_cmd) {
      limits.types.clear();
      for (std::size_t i = 0; i < type_count; ++i) limits.types.push_back(type_name(i));
      auto summary = roundtrip(limits);
      out << "mention sets: " << summary.sets << '\n'
          << "failures: " << summary.failures << '\n'
          << "stream failures: " << summary.stream_failures << '\n';
      if (limits.include_crossing)
        out << "crossing sets: " << summary.crossing_sets << " (" << summary.crossing_failures
            << " not recovered, a known limitation)\n"
            << "warnings: " << summary.warnings << '\n';
      return summary.failures == 0 && summary.stream_failures == 0 ? 0 : 1;
    }
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace nestner::cli
