#include "nestner/train/trainer.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "nestner/eval.hpp"
#include "nestner/log.hpp"
#include "nestner/models/serialization.hpp"

namespace nestner::train {

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error("batch size must be at least 1");
  if (epochs < 0) throw Error("epoch count must be non-negative");
}

std::string EpochMetrics::to_json() const {
  nlohmann::json j = {{"epoch", epoch}, {"train_loss", train_loss}, {"dev_f1", nullptr}};
  if (dev_f1) j["dev_f1"] = *dev_f1;
  return j.dump();
}

namespace {

template <typename T>
void shuffle(std::vector<T>& items, nn::Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

const Eigen::MatrixXd* contextual_of(const corpus::TaggedCorpus& corpus, std::size_t i) {
  return corpus.contextual.empty() ? nullptr : &corpus.contextual[i];
}

}  // namespace

std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> lengths,
                                                   std::size_t batch_size, nn::Rng& rng) {
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  const std::size_t pool = 8 * batch_size;
  for (std::size_t begin = 0; begin < order.size(); begin += pool) {
    auto first = order.begin() + static_cast<std::ptrdiff_t>(begin);
    auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), begin + pool));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  }

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), begin + batch_size)));
  shuffle(batches, rng);
  return batches;
}

std::vector<std::vector<Mention>> predict_corpus(const models::Tagger& tagger,
                                                 const corpus::TaggedCorpus& corpus) {
  std::vector<std::vector<Mention>> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    out.push_back(tagger.predict(corpus.sentences[i], contextual_of(corpus, i)));
  return out;
}

std::vector<std::vector<Mention>> gold_mentions(const corpus::TaggedCorpus& corpus) {
  std::vector<std::vector<Mention>> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences) out.push_back(s.mentions);
  return out;
}

double corpus_f1(const models::Tagger& tagger, const corpus::TaggedCorpus& corpus) {
  auto gold = gold_mentions(corpus);
  auto pred = predict_corpus(tagger, corpus);
  return eval::score(gold, pred).overall.f1;
}

std::vector<EpochMetrics> fit(models::Tagger& tagger, const corpus::TaggedCorpus& train,
                              const corpus::TaggedCorpus* dev, const TrainOptions& options) {
  options.train.validate();
  options.regularization.validate();
  if (train.empty()) throw Error("training corpus is empty");

  std::vector<models::Example> examples;
  std::vector<std::size_t> lengths;
  examples.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    examples.push_back(tagger.prepare(train.sentences[i], contextual_of(train, i)));
    lengths.push_back(train.sentences[i].size());
  }

  nn::Parameters& params = tagger.parameters();
  Adam optimizer(params, options.optimizer);
  nn::Gradients grads(params);
  nn::Rng rng(options.train.seed);
  embed::Noise noise{&rng, options.regularization.dropout_rate,
                     options.regularization.word_dropout_rate};

  std::vector<EpochMetrics> metrics;
  std::optional<double> best_f1;
  nn::Parameters best_params;

  for (int epoch = 1; epoch <= options.train.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : make_batches(lengths, options.train.batch_size, rng)) {
      grads.clear();
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (std::size_t index : batch) {
        nn::Graph g(params);
        nn::Var loss = tagger.loss(g, examples[index], noise);
        total += g.scalar(loss);
        g.backward(loss, grads, scale);
      }
      try {
        optimizer.step(params, grads);
      } catch (const NonFiniteGradient& e) {
        log::warning(std::string("epoch ") + std::to_string(epoch) + ": " + e.what());
      }
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = total / static_cast<double>(examples.size());
    if (dev && !dev->empty()) {
      m.dev_f1 = corpus_f1(tagger, *dev);
      if (!best_f1 || *m.dev_f1 > *best_f1) {
        best_f1 = m.dev_f1;
        best_params = params;
        if (!options.checkpoint_path.empty()) models::save(tagger, options.checkpoint_path);
      }
    }
    metrics.push_back(m);
    log::info(m.to_json());
    if (options.on_epoch && !options.on_epoch(m, tagger)) break;
  }

  if (best_f1) params = best_params;
  if (!best_f1 && !options.checkpoint_path.empty()) models::save(tagger, options.checkpoint_path);
  return metrics;
}

TrainResult train(const corpus::TaggedCorpus& train, const corpus::TaggedCorpus* dev,
                  models::ModelKind kind, models::TaggerConfig config, const TrainOptions& options,
                  std::shared_ptr<const embed::PretrainedTable> pretrained) {
  corpus::TaggedCorpus merged;
  const corpus::TaggedCorpus* data = &train;
  if (options.train.include_dev_in_train && dev) {
    merged = corpus::concatenate(train, *dev);
    data = &merged;
  }
  if (data->empty()) throw Error("training corpus is empty");

  if (!data->contextual.empty()) config.embedding.contextual_dim = static_cast<int>(data->contextual.front().cols());
  config.embedding.pretrained_dim = pretrained ? pretrained->dim() : 0;
  bool has_lemmas = std::any_of(data->sentences.begin(), data->sentences.end(), [](const Sentence& s) {
    return !s.tokens.empty() && s.tokens.front().lemma.has_value();
  });
  config.embedding.use_lemmas = config.embedding.use_lemmas && has_lemmas;

  auto vocabulary = corpus::build_vocabulary(*data, options.min_frequency);
  auto alphabet = models::build_label_alphabet(kind, data->sentences);
  TrainResult result;
  result.model = models::make_tagger(kind, config, std::move(vocabulary), std::move(alphabet),
                                     options.train.seed);
  result.model->set_pretrained(std::move(pretrained));
  result.metrics = fit(*result.model, *data, dev, options);
  return result;
}

}  // namespace nestner::train
