#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace nerkit::eval {

struct EntitySpan {
  std::string type;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  auto operator<=>(const EntitySpan&) const = default;
};

// Maximal B-X (I-X)* runs. An I-X that does not continue an X entity opens a
// new span, as if it were B-X.
std::vector<EntitySpan> extract_spans(const std::vector<std::string>& tags);

struct Counts {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  double precision() const;  // percentages; 0/0 is 0
  double recall() const;
  double f1() const;
};

struct EvalReport {
  double precision = 0.0;  // percentages
  double recall = 0.0;
  double f1 = 0.0;
  double token_accuracy = 0.0;
  Counts overall;
  std::size_t tokens = 0;
  std::size_t correct_tokens = 0;
  std::map<std::string, Counts> per_type;  // support = gold
};

// Entity-level micro scores: a predicted span counts only when type and both
// boundaries match a gold span. Throws UsageError on a shape mismatch.
EvalReport score(const std::vector<std::vector<std::string>>& gold, const std::vector<std::vector<std::string>>& pred);

void write_table(const EvalReport& r, std::ostream& out);
// One "key=value" line per metric.
void write_key_values(const EvalReport& r, std::ostream& out);

}  // namespace nerkit::eval
