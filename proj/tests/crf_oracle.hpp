#pragma once

// Brute-force references for the CRF head. Test-only: enumerates every label
// sequence and scores it by direct summation over raw parameter values.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "nerkit/crf/crf.hpp"

namespace nerkit::testing {

struct Enumerated {
  std::vector<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  double log_sum = -std::numeric_limits<double>::infinity();
  std::size_t paths = 0;
};

inline double transition_value(const crf::CRFParams& p, std::size_t from, std::size_t to) {
  const std::size_t w = p.num_labels() + 1;
  double v = p.transition[from * w + to];
  if (p.mask.defined()) v += p.mask[from * w + to];
  return v;
}

// scores: row-major {n, T} emission values.
inline double path_score(const crf::CRFParams& p, const std::vector<double>& scores, std::size_t n,
                         const std::vector<std::size_t>& labels) {
  const std::size_t t = p.num_labels();
  double s = 0.0;
  std::size_t prev = t;
  for (std::size_t i = 0; i < n; ++i) {
    s += scores[i * t + labels[i]] + transition_value(p, prev, labels[i]);
    prev = labels[i];
  }
  return s + transition_value(p, prev, t);
}

inline void for_each_labeling(std::size_t n, std::size_t t,
                              const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> labels(n, 0);
  while (true) {
    visit(labels);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++labels[i] < t) break;
      labels[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

inline Enumerated enumerate_paths(const crf::CRFParams& p, const std::vector<double>& scores, std::size_t n) {
  Enumerated out;
  std::vector<double> all;
  for_each_labeling(n, p.num_labels(), [&](const std::vector<std::size_t>& labels) {
    const double s = path_score(p, scores, n, labels);
    all.push_back(s);
    // Strict comparison in lexicographic enumeration order keeps the
    // lexicographically smallest maximizer.
    if (s > out.best_score) {
      out.best_score = s;
      out.best = labels;
    }
  });
  out.paths = all.size();
  double mx = -std::numeric_limits<double>::infinity();
  for (double s : all) mx = std::max(mx, s);
  double acc = 0.0;
  for (double s : all) acc += std::exp(s - mx);
  out.log_sum = mx + std::log(acc);
  return out;
}

// Hidden-state emission values computed by explicit dot products.
inline std::vector<double> emission_values(const crf::CRFParams& p, const ad::Tensor& hidden) {
  const std::size_t n = hidden.dim(0), h = hidden.dim(1), t = p.num_labels();
  std::vector<double> out(n * t, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < t; ++j)
      for (std::size_t k = 0; k < h; ++k) out[i * t + j] += p.emission[j * h + k] * hidden[i * h + k];
  return out;
}

}  // namespace nerkit::testing
