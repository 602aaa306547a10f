#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nerkit/data/corpus.hpp"
#include "nerkit/eval/score.hpp"
#include "nerkit/train/tagger.hpp"

namespace nerkit::train {

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean per sentence, regularizer included
  double valid_f1 = 0.0;
  double valid_p = 0.0;
  double valid_r = 0.0;
  double lr = 0.0;  // rate used during the epoch
};

// "epoch<TAB>train_loss<TAB>valid_f1<TAB>valid_p<TAB>valid_r<TAB>lr"
std::string format_metrics(const EpochMetrics& m);

struct TrainResult {
  Tagger model;  // parameters of the best validation epoch
  std::vector<EpochMetrics> log;
  std::size_t best_epoch = 0;
  double best_f1 = 0.0;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Per epoch: seeded shuffle, mini-batches of summed sentence losses plus the
// L2 term, backward, clipping, optimizer step; then LR decay (sgd with
// lr_decay) and validation. Throws DivergenceError on a non-finite loss.
TrainResult train_tagger(const TrainConfig& config, const data::Corpus& train, const data::Corpus& valid,
                         const EpochCallback& on_epoch = {});

data::Corpus tag_corpus(const Tagger& tagger, const data::Corpus& sentences);
eval::EvalReport evaluate(const Tagger& tagger, const data::Corpus& gold);

}  // namespace nerkit::train
