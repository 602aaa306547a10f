#include "nerkit/train/bench.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "nerkit/error.hpp"
#include "nerkit/train/trainer.hpp"

namespace nerkit::train {

std::vector<BenchRow> bench(const std::vector<BenchEntry>& entries, const data::Corpus& train,
                            const data::Corpus& valid, const data::Corpus& test,
                            const std::vector<std::uint64_t>& seeds) {
  if (entries.empty()) throw ConfigError("bench needs at least one configuration");
  if (seeds.empty()) throw ConfigError("bench needs at least one seed");
  std::vector<BenchRow> rows;
  for (const auto& entry : entries) {
    BenchRow row;
    row.name = entry.name;
    for (auto seed : seeds) {
      TrainConfig cfg = entry.config;
      cfg.seed = seed;
      auto result = train_tagger(cfg, train, valid);
      SeedResult r{seed, evaluate(result.model, test), result.best_epoch, result.seconds};
      row.mean_f1 += r.test.f1;
      row.mean_p += r.test.precision;
      row.mean_r += r.test.recall;
      row.mean_accuracy += r.test.token_accuracy;
      row.seconds += r.seconds;
      row.runs.push_back(std::move(r));
    }
    const double n = static_cast<double>(seeds.size());
    row.mean_f1 /= n;
    row.mean_p /= n;
    row.mean_r /= n;
    row.mean_accuracy /= n;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_bench_table(const std::vector<BenchRow>& rows, std::ostream& out) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << std::left << std::setw(static_cast<int>(width) + 2) << "Model" << std::right << std::setw(8) << "F1"
    << std::setw(8) << "P" << std::setw(8) << "R" << std::setw(10) << "Accuracy" << std::setw(10) << "Time(s)"
    << "  per-seed F1\n";
  for (const auto& r : rows) {
    o << std::left << std::setw(static_cast<int>(width) + 2) << r.name << std::right << std::setw(8) << r.mean_f1
      << std::setw(8) << r.mean_p << std::setw(8) << r.mean_r << std::setw(10) << r.mean_accuracy << std::setw(10)
      << r.seconds << " ";
    for (const auto& run : r.runs) o << " " << run.seed << ":" << run.test.f1;
    o << '\n';
  }
  o << "Scores are test-set means over " << (rows.empty() ? 0 : rows.front().runs.size())
    << " seeds; time is total training wall time.\n";
  out << o.str();
}

}  // namespace nerkit::train
