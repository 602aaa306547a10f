#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nerkit/eval/score.hpp"
#include "nerkit/train/config.hpp"
#include "nerkit/data/corpus.hpp"

namespace nerkit::train {

struct BenchEntry {
  std::string name;
  TrainConfig config;
};

struct SeedResult {
  std::uint64_t seed = 0;
  eval::EvalReport test;
  std::size_t best_epoch = 0;
  double seconds = 0.0;
};

struct BenchRow {
  std::string name;
  std::vector<SeedResult> runs;
  double mean_f1 = 0.0, mean_p = 0.0, mean_r = 0.0, mean_accuracy = 0.0;
  double seconds = 0.0;  // total wall time over all seeds
};

inline const std::vector<std::uint64_t> kDefaultBenchSeeds{1, 2, 3, 4, 5};

// Trains every entry once per seed (the seed overrides the entry's config)
// and scores the best-validation model on `test`.
std::vector<BenchRow> bench(const std::vector<BenchEntry>& entries, const data::Corpus& train,
                            const data::Corpus& valid, const data::Corpus& test,
                            const std::vector<std::uint64_t>& seeds = kDefaultBenchSeeds);

// Model | F1 | P | R | Accuracy | seconds, then per-seed F1 values.
void write_bench_table(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace nerkit::train
