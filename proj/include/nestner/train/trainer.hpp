#ifndef NESTNER_TRAIN_TRAINER_HPP
#define NESTNER_TRAIN_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nestner/corpus.hpp"
#include "nestner/models/tagger.hpp"
#include "nestner/train/optimizer.hpp"
#include "nestner/train/regularization.hpp"

namespace nestner::train {

struct TrainConfig {
  std::size_t batch_size = 8;
  int epochs = 10;
  std::uint64_t seed = 1;
  bool include_dev_in_train = false;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;  // mean per-sentence loss
  std::optional<double> dev_f1;

  /// {"epoch":..,"train_loss":..,"dev_f1":..|null}
  std::string to_json() const;
};

struct TrainOptions {
  OptimizerConfig optimizer;
  RegularizationConfig regularization;
  TrainConfig train;
  std::size_t min_frequency = 1;
  /// Written whenever dev F1 improves (or after the last epoch without dev).
  std::string checkpoint_path;
  /// Called after every epoch; returning false stops training.
  std::function<bool(const EpochMetrics&, const models::Tagger&)> on_epoch;
};

/// Shuffles sentence indices, sorts each pool of 8 batches by length and
/// cuts it into batches, then shuffles batch order.
std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> lengths,
                                                   std::size_t batch_size, nn::Rng& rng);

/// Trains `tagger` in place. With a dev corpus the parameters of the best
/// dev epoch are restored at the end.
std::vector<EpochMetrics> fit(models::Tagger& tagger, const corpus::TaggedCorpus& train,
                              const corpus::TaggedCorpus* dev, const TrainOptions& options);

struct TrainResult {
  std::unique_ptr<models::Tagger> model;
  std::vector<EpochMetrics> metrics;
};

/// Builds vocabulary, label alphabet and a fresh model from `train` (plus
/// `dev` when include_dev_in_train is set), then fits it.
TrainResult train(const corpus::TaggedCorpus& train, const corpus::TaggedCorpus* dev,
                  models::ModelKind kind, models::TaggerConfig config, const TrainOptions& options,
                  std::shared_ptr<const embed::PretrainedTable> pretrained = nullptr);

std::vector<std::vector<Mention>> predict_corpus(const models::Tagger& tagger,
                                                 const corpus::TaggedCorpus& corpus);
std::vector<std::vector<Mention>> gold_mentions(const corpus::TaggedCorpus& corpus);

/// Strict micro F1 of the tagger's predictions on `corpus`.
double corpus_f1(const models::Tagger& tagger, const corpus::TaggedCorpus& corpus);

}  // namespace nestner::train

#endif  // NESTNER_TRAIN_TRAINER_HPP
