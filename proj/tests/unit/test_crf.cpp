#include <cmath>
#include <numeric>

#include "crf_oracle.hpp"
#include "doctest.h"
#include "gradcheck.hpp"
#include "nerkit/crf/crf.hpp"
#include "nerkit/data/corpus.hpp"
#include "nerkit/error.hpp"

using namespace nerkit;
using ad::Graph;
using ad::Tensor;
using crf::CRFParams;
using testing::random_tensor;

namespace {

CRFParams random_params(Rng& rng, std::size_t t, std::size_t h) {
  CRFParams p;
  p.emission = random_tensor(rng, {t, h}, -1.5, 1.5);
  p.transition = random_tensor(rng, {t + 1, t + 1}, -1.5, 1.5);
  return p;
}

std::vector<std::size_t> random_labels(Rng& rng, std::size_t n, std::size_t t) {
  std::vector<std::size_t> out(n);
  for (auto& l : out) l = rng.index(t);
  return out;
}

bool data_valid_bio2(const std::vector<std::string>& tags) {
  data::LabeledSentence s;
  for (const auto& t : tags) s.tokens.push_back({"w", std::nullopt, t});
  try {
    data::validate_bio2(s, data::BioMode::Strict);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

}  // namespace

TEST_CASE("score_sequence") {
  Graph g;
  SUBCASE("all-zero params score every labeling 0") {
    CRFParams p = CRFParams::zeros(3, 4);
    Rng rng(1);
    Tensor h = random_tensor(rng, {3, 4});
    testing::for_each_labeling(3, 3, [&](const std::vector<std::size_t>& labels) {
      CHECK(crf::score_sequence(g, p, h, labels).item() == 0.0);
    });
  }
  SUBCASE("one token with zero transitions is the emission dot product") {
    Rng rng(2);
    CRFParams p = CRFParams::zeros(3, 4);
    p.emission = random_tensor(rng, {3, 4});
    Tensor h = random_tensor(rng, {1, 4});
    for (std::size_t l = 0; l < 3; ++l) {
      double dot = 0.0;
      for (std::size_t k = 0; k < 4; ++k) dot += p.emission[l * 4 + k] * h[k];
      CHECK(crf::score_sequence(g, p, h, std::vector<std::size_t>{l}).item() == doctest::Approx(dot).epsilon(1e-12));
    }
  }
  SUBCASE("three tokens, three tags: matches hand-summed path score") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      CRFParams p = random_params(rng, 3, 5);
      Tensor h = random_tensor(rng, {3, 5});
      auto labels = random_labels(rng, 3, 3);
      const double expected = testing::path_score(p, testing::emission_values(p, h), 3, labels);
      CHECK(crf::score_sequence(g, p, h, labels).item() == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("list-of-vectors form agrees with the matrix form") {
    Rng rng(4);
    CRFParams p = random_params(rng, 3, 2);
    std::vector<Tensor> hs{random_tensor(rng, {2}), random_tensor(rng, {2})};
    Tensor stacked = g.stack(hs);
    std::vector<std::size_t> labels{2, 0};
    CHECK(crf::score_sequence(g, p, hs, labels).item() == crf::score_sequence(g, p, stacked, labels).item());
  }
  SUBCASE("length mismatch") {
    CRFParams p = CRFParams::zeros(3, 2);
    CHECK_THROWS_AS(crf::score_sequence(g, p, Tensor::zeros({2, 2}), std::vector<std::size_t>{0}), UsageError);
  }
}

TEST_CASE("log_partition") {
  Graph g;
  SUBCASE("all-zero params: n log T") {
    for (std::size_t n = 1; n <= 5; ++n)
      for (std::size_t t = 1; t <= 4; ++t) {
        CRFParams p = CRFParams::zeros(t, 3);
        const double z = crf::log_partition(g, p, Tensor::zeros({n, 3})).item();
        CHECK(z == doctest::Approx(static_cast<double>(n) * std::log(static_cast<double>(t))).epsilon(1e-12));
      }
  }
  SUBCASE("one token: log-sum-exp over emission scores") {
    Rng rng(5);
    CRFParams p = CRFParams::zeros(4, 3);
    p.emission = random_tensor(rng, {4, 3});
    Tensor h = random_tensor(rng, {1, 3});
    auto e = testing::emission_values(p, h);
    double acc = 0.0;
    for (double v : e) acc += std::exp(v);
    CHECK(crf::log_partition(g, p, h).item() == doctest::Approx(std::log(acc)).epsilon(1e-12));
  }
  SUBCASE("n=4, T=3 equals the log-sum over all 81 paths") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      CRFParams p = random_params(rng, 3, 4);
      Tensor h = random_tensor(rng, {4, 4});
      auto oracle = testing::enumerate_paths(p, testing::emission_values(p, h), 4);
      REQUIRE(oracle.paths == 81);
      CHECK(std::abs(crf::log_partition(g, p, h).item() - oracle.log_sum) <= 1e-9);
    }
  }
  SUBCASE("bounds every labeling's score") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + rng.index(5), t = 1 + rng.index(4);
      CRFParams p = random_params(rng, t, 3);
      Tensor h = random_tensor(rng, {n, 3});
      const double z = crf::log_partition(g, p, h).item();
      for (int k = 0; k < 5; ++k) CHECK(z >= crf::score_sequence(g, p, h, random_labels(rng, n, t)).item() - 1e-12);
    }
  }
}

TEST_CASE("log_prob") {
  Graph g;
  SUBCASE("uniform under zero params") {
    CRFParams p = CRFParams::zeros(3, 2);
    const double lp = crf::log_prob(g, p, Tensor::zeros({4, 2}), std::vector<std::size_t>{0, 1, 2, 0}).item();
    CHECK(lp == doctest::Approx(-4.0 * std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("probabilities over all labelings sum to one") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rng.index(4), t = 1 + rng.index(3);
      CRFParams p = random_params(rng, t, 3);
      Tensor h = random_tensor(rng, {n, 3});
      double total = 0.0;
      testing::for_each_labeling(n, t, [&](const std::vector<std::size_t>& labels) {
        const double lp = crf::log_prob(g, p, h, labels).item();
        CHECK(lp <= 1e-12);
        total += std::exp(lp);
      });
      CHECK(std::abs(total - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("viterbi_decode") {
  SUBCASE("one token: argmax of emissions") {
    Rng rng(9);
    CRFParams p = CRFParams::zeros(4, 3);
    p.emission = random_tensor(rng, {4, 3});
    Tensor h = random_tensor(rng, {1, 3});
    auto e = testing::emission_values(p, h);
    const auto expected = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
    CHECK(crf::viterbi_decode(p, h).labels == std::vector<std::size_t>{expected});
  }
  SUBCASE("masked O -> I-X transitions never appear") {
    std::vector<std::string> tags{"O", "B-PER", "I-PER"};
    auto set = crf::TagSet::from_tags(tags);
    const std::size_t o = set.id("O"), i_per = set.id("I-PER");
    Rng rng(10);
    for (int trial = 0; trial < 50; ++trial) {
      CRFParams p = random_params(rng, 3, 3);
      // Emissions strongly favour I-PER everywhere.
      for (std::size_t k = 0; k < 3; ++k) p.emission[i_per * 3 + k] = 0.0;
      Tensor h = random_tensor(rng, {5, 3}, -0.1, 0.1);
      p.transition[o * 4 + i_per] = -1e6;
      p.transition[3 * 4 + i_per] = -1e6;
      auto decoded = crf::viterbi_decode(p, h);
      for (std::size_t i = 0; i + 1 < decoded.labels.size(); ++i)
        CHECK_FALSE((decoded.labels[i] == o && decoded.labels[i + 1] == i_per));
      CHECK(decoded.labels[0] != i_per);

      p.transition[o * 4 + i_per] = 0.0;
      p.transition[3 * 4 + i_per] = 0.0;
      p.mask_illegal(set);
      decoded = crf::viterbi_decode(p, h);
      auto names = set.names(decoded.labels);
      CHECK(data_valid_bio2(names));
    }
  }
  SUBCASE("n=5, T=4 matches exhaustive search over 1024 paths") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      CRFParams p = random_params(rng, 4, 3);
      Tensor h = random_tensor(rng, {5, 3});
      auto oracle = testing::enumerate_paths(p, testing::emission_values(p, h), 5);
      REQUIRE(oracle.paths == 1024);
      auto decoded = crf::viterbi_decode(p, h);
      CHECK(decoded.labels == oracle.best);
      CHECK(decoded.score == doctest::Approx(oracle.best_score).epsilon(1e-12));
      Graph g;
      CHECK(decoded.score == doctest::Approx(crf::score_sequence(g, p, h, decoded.labels).item()).epsilon(1e-12));
    }
  }
  SUBCASE("shifting one position's emissions keeps the argmax") {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + rng.index(5), t = 1 + rng.index(4);
      CRFParams p = random_params(rng, t, 3);
      Tensor scores = random_tensor(rng, {n, t}, -2, 2, false);
      auto before = crf::viterbi_emissions(p, scores).labels;
      const std::size_t pos = rng.index(n);
      const double c = rng.uniform(-5, 5);
      for (std::size_t j = 0; j < t; ++j) scores[pos * t + j] += c;
      CHECK(crf::viterbi_emissions(p, scores).labels == before);
    }
  }
  SUBCASE("ties go to the lowest tag id") {
    CRFParams p = CRFParams::zeros(3, 2);
    CHECK(crf::viterbi_decode(p, Tensor::zeros({3, 2})).labels == std::vector<std::size_t>{0, 0, 0});
  }
}

TEST_CASE("nll_loss") {
  SUBCASE("zero params, no regularization: n log T") {
    Graph g;
    CRFParams p = CRFParams::zeros(3, 2);
    std::vector<crf::Example> batch{{Tensor::zeros({5, 2}), {0, 1, 2, 1, 0}}};
    std::vector<Tensor> theta{p.emission, p.transition};
    CHECK(crf::nll_loss(g, p, batch, 0.0, theta).item() == doctest::Approx(5 * std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("regularizer alone when the data term vanishes") {
    // One tag: P(y|s) = 1, so the data term is exactly zero.
    Graph g;
    Rng rng(13);
    CRFParams p = random_params(rng, 1, 3);
    Tensor h = random_tensor(rng, {2, 3});
    std::vector<crf::Example> batch{{h, {0, 0}}};
    std::vector<Tensor> theta{p.emission, p.transition};
    double sq = 0.0;
    for (const auto& t : theta)
      for (double v : t.values()) sq += v * v;
    const double lambda = 0.3;
    CHECK(crf::nll_loss(g, p, batch, lambda, theta).item() == doctest::Approx(lambda / 2 * sq).epsilon(1e-12));
  }
  SUBCASE("gradient matches finite differences on 2 tokens, 3 tags") {
    Rng rng(14);
    for (int trial = 0; trial < 10; ++trial) {
      CRFParams p = random_params(rng, 3, 4);
      Tensor h = random_tensor(rng, {2, 4});
      std::vector<crf::Example> batch{{h, random_labels(rng, 2, 3)}};
      std::vector<Tensor> theta{p.emission, p.transition};
      const double err = testing::max_gradient_error(
          [&](Graph& g) { return crf::nll_loss(g, p, batch, 0.01, theta); }, {p.emission, p.transition, h});
      CHECK(err <= 1e-4);
    }
  }
  SUBCASE("strictly positive with regularization and nonzero params") {
    Rng rng(15);
    for (int trial = 0; trial < 50; ++trial) {
      Graph g;
      CRFParams p = random_params(rng, 1 + rng.index(4), 3);
      Tensor h = random_tensor(rng, {3, 3});
      std::vector<crf::Example> batch{{h, random_labels(rng, 3, p.num_labels())}};
      std::vector<Tensor> theta{p.emission, p.transition};
      CHECK(crf::nll_loss(g, p, batch, 1e-3, theta).item() > 0.0);
    }
  }
  SUBCASE("masked transitions keep the loss finite and differentiable") {
    std::vector<std::string> tags{"O", "B-LOC", "I-LOC"};
    auto set = crf::TagSet::from_tags(tags);
    Rng rng(16);
    CRFParams p = random_params(rng, 3, 4);
    p.mask_illegal(set);
    Tensor h = random_tensor(rng, {3, 4});
    std::vector<crf::Example> batch{{h, set.ids(std::vector<std::string>{"B-LOC", "I-LOC", "O"})}};
    std::vector<Tensor> theta{p.emission, p.transition};
    Graph g;
    CHECK(std::isfinite(crf::nll_loss(g, p, batch, 1e-2, theta).item()));
    const double err = testing::max_gradient_error(
        [&](Graph& gg) { return crf::nll_loss(gg, p, batch, 1e-2, theta); }, {p.emission, p.transition});
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("linear head") {
  Graph g;
  SUBCASE("zero weights give uniform log-probabilities") {
    auto head = crf::LinearHead::zeros(4, 3);
    Rng rng(17);
    Tensor lp = crf::linear_log_probs(g, head, random_tensor(rng, {2, 3}));
    for (double v : lp.values()) CHECK(v == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("favourable logits give near-zero loss") {
    auto head = crf::LinearHead::zeros(3, 3);
    for (std::size_t j = 0; j < 3; ++j) head.weight[j * 3 + j] = 50.0;
    Tensor h = Tensor::matrix(2, 3, {1, 0, 0, 0, 0, 1});
    CHECK(crf::linear_loss(g, head, h, std::vector<std::size_t>{0, 2}).item() < 1e-12);
    CHECK(crf::linear_decode(head, h) == std::vector<std::size_t>{0, 2});
  }
  SUBCASE("matches an independent per-token cross-entropy, skipping padding") {
    Rng rng(18);
    for (int trial = 0; trial < 20; ++trial) {
      auto head = crf::LinearHead::random(4, 3, rng);
      head.bias = random_tensor(rng, {4});
      Tensor h = random_tensor(rng, {5, 3});
      std::vector<std::size_t> labels = random_labels(rng, 5, 4);
      labels[1] = crf::kPadLabel;
      labels[3] = crf::kPadLabel;
      double expected = 0.0;
      for (std::size_t i = 0; i < 5; ++i) {
        if (labels[i] == crf::kPadLabel) continue;
        std::vector<double> logits(4);
        for (std::size_t j = 0; j < 4; ++j) {
          logits[j] = head.bias[j];
          for (std::size_t k = 0; k < 3; ++k) logits[j] += head.weight[j * 3 + k] * h[i * 3 + k];
        }
        double z = 0.0;
        for (double l : logits) z += std::exp(l);
        expected += std::log(z) - logits[labels[i]];
      }
      CHECK(std::abs(crf::linear_loss(g, head, h, labels).item() - expected) <= 1e-9);
      const double err = testing::max_gradient_error(
          [&](Graph& gg) { return crf::linear_loss(gg, head, h, labels); }, {head.weight, head.bias, h});
      CHECK(err <= 1e-4);
    }
  }
}

TEST_CASE("tag set") {
  std::vector<std::string> tags{"O", "B-PERSON", "I-PERSON", "B-LOCATION", "B-ORGANIZATION", "I-ORGANIZATION"};
  auto set = crf::TagSet::from_tags(tags);
  CHECK(set.size() == 7);
  CHECK(set.tag(0) == "O");
  CHECK(set.contains("I-LOCATION"));
  CHECK_FALSE(set.allowed(set.id("O"), set.id("I-PERSON")));
  CHECK_FALSE(set.allowed(set.id("B-LOCATION"), set.id("I-PERSON")));
  CHECK_FALSE(set.allowed(set.id("I-LOCATION"), set.id("I-PERSON")));
  CHECK_FALSE(set.allowed(set.size(), set.id("I-PERSON")));
  CHECK(set.allowed(set.id("B-PERSON"), set.id("I-PERSON")));
  CHECK(set.allowed(set.id("I-PERSON"), set.id("I-PERSON")));
  CHECK(set.allowed(set.id("O"), set.id("B-PERSON")));
  CHECK_THROWS_AS(set.id("B-DATE"), DataError);
  CHECK_THROWS_AS(crf::TagSet::from_ordered({"B-X", "I-X"}), DataError);
  CHECK_THROWS_AS(crf::TagSet::from_ordered({"O", "I-X"}), DataError);
}
