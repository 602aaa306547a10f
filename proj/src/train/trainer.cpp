#include "nerkit/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "nerkit/error.hpp"
#include "nerkit/train/optim.hpp"

namespace nerkit::train {

std::string format_metrics(const EpochMetrics& m) {
  std::ostringstream o;
  o.precision(17);
  o << m.epoch << '\t' << m.train_loss << '\t' << m.valid_f1 << '\t' << m.valid_p << '\t' << m.valid_r << '\t'
    << m.lr;
  return o.str();
}

data::Corpus tag_corpus(const Tagger& tagger, const data::Corpus& sentences) {
  data::Corpus out = sentences;
  for (auto& s : out) {
    auto tags = tagger.predict(s);
    for (std::size_t i = 0; i < tags.size(); ++i) s.tokens[i].tag = tags[i];
  }
  return out;
}

eval::EvalReport evaluate(const Tagger& tagger, const data::Corpus& gold) {
  std::vector<std::vector<std::string>> g, p;
  for (const auto& s : gold) {
    g.push_back(s.tags());
    p.push_back(tagger.predict(s));
  }
  return eval::score(g, p);
}

TrainResult train_tagger(const TrainConfig& config, const data::Corpus& train_in, const data::Corpus& valid,
                         const EpochCallback& on_epoch) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  data::Corpus train = data::split_long_sentences(train_in, config.max_sentence_len);
  std::erase_if(train, [](const data::LabeledSentence& s) { return s.tokens.empty(); });
  if (train.empty()) throw DataError("training corpus is empty");

  Rng init_rng(config.seed);
  Tagger model = Tagger::create(config, train, init_rng);
  Rng rng(config.seed * 0x9E3779B97F4A7C15ULL + 1);

  std::vector<ad::Tensor> params;
  for (const auto& p : model.parameters()) params.push_back(p.tensor);
  std::unique_ptr<Optimizer> opt;
  if (config.optimizer == OptimizerKind::SgdMomentum)
    opt = std::make_unique<SgdMomentum>(params, config.momentum);
  else
    opt = std::make_unique<AdamW>(params, config.adam_beta1, config.adam_beta2, config.adam_eps,
                                  config.weight_decay);

  TrainResult result{model, {}, 0, -1.0, 0.0};
  std::vector<std::vector<double>> best;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double lr = config.lr;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      for (auto& p : params) p.zero_grad();
      ad::Graph g;
      std::vector<ad::Tensor> terms;
      for (std::size_t k = start; k < end; ++k) terms.push_back(model.loss(g, train[order[k]], true, rng));
      ad::Tensor total = terms.size() == 1 ? terms[0] : g.sum(g.concat(terms));
      if (config.lambda_l2 > 0.0) total = g.add(total, crf::l2_penalty(g, config.lambda_l2, params));
      const double value = total.item();
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "training diverged: loss is " << value << " at epoch " << epoch << ", batch " << batch + 1
            << " (lr " << lr << ")";
        throw DivergenceError(msg.str());
      }
      epoch_loss += value;
      g.backward(total);
      if (config.clip_norm > 0.0) clip_gradients(params, config.clip_norm);
      opt->step(lr);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = epoch_loss / static_cast<double>(train.size());
    m.lr = lr;
    if (!valid.empty()) {
      auto report = evaluate(model, valid);
      m.valid_f1 = report.f1;
      m.valid_p = report.precision;
      m.valid_r = report.recall;
    }
    result.log.push_back(m);
    if (on_epoch) on_epoch(m);
    if (m.valid_f1 > result.best_f1) {
      result.best_f1 = m.valid_f1;
      result.best_epoch = epoch;
      best.clear();
      for (const auto& p : params) best.emplace_back(p.values().begin(), p.values().end());
    }
    if (config.optimizer == OptimizerKind::SgdMomentum && config.lr_decay) lr = lr_decay_step(lr, epoch);
  }

  for (std::size_t k = 0; k < params.size(); ++k) std::copy(best[k].begin(), best[k].end(), params[k].values().begin());
  result.model = model;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace nerkit::train
