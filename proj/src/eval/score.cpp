#include "nerkit/eval/score.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "nerkit/data/bio.hpp"
#include "nerkit/error.hpp"

namespace nerkit::eval {

std::vector<EntitySpan> extract_spans(const std::vector<std::string>& tags) {
  std::vector<EntitySpan> spans;
  bool open = false;
  EntitySpan cur;
  auto close = [&](std::size_t at) {
    if (open) {
      cur.end = at;
      spans.push_back(cur);
      open = false;
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto parsed = data::parse_tag(tags[i]);
    if (!parsed || parsed->prefix == data::Prefix::Outside) {
      close(i);
      continue;
    }
    if (parsed->prefix == data::Prefix::Inside && open && cur.type == parsed->type) continue;
    close(i);
    cur = {parsed->type, i, i};
    open = true;
  }
  close(tags.size());
  return spans;
}

namespace {
double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : 100.0 * num / den; }
}  // namespace

double Counts::precision() const { return ratio(correct, predicted); }
double Counts::recall() const { return ratio(correct, gold); }
double Counts::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

EvalReport score(const std::vector<std::vector<std::string>>& gold, const std::vector<std::vector<std::string>>& pred) {
  if (gold.size() != pred.size())
    throw UsageError("gold has " + std::to_string(gold.size()) + " sentences but predictions have " +
                     std::to_string(pred.size()));
  EvalReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size())
      throw UsageError("sentence " + std::to_string(s) + ": gold has " + std::to_string(gold[s].size()) +
                       " tags but prediction has " + std::to_string(pred[s].size()));
    for (std::size_t i = 0; i < gold[s].size(); ++i) r.correct_tokens += gold[s][i] == pred[s][i];
    r.tokens += gold[s].size();
    auto g = extract_spans(gold[s]);
    auto p = extract_spans(pred[s]);
    std::set<EntitySpan> gold_set(g.begin(), g.end());
    for (const auto& span : g) {
      ++r.overall.gold;
      ++r.per_type[span.type].gold;
    }
    for (const auto& span : p) {
      ++r.overall.predicted;
      auto& c = r.per_type[span.type];
      ++c.predicted;
      if (gold_set.count(span)) {
        ++r.overall.correct;
        ++c.correct;
      }
    }
  }
  r.precision = r.overall.precision();
  r.recall = r.overall.recall();
  r.f1 = r.overall.f1();
  r.token_accuracy = ratio(r.correct_tokens, r.tokens);
  return r;
}

void write_table(const EvalReport& r, std::ostream& out) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << std::left << std::setw(16) << "type" << std::right << std::setw(10) << "precision" << std::setw(10) << "recall"
    << std::setw(10) << "f1" << std::setw(10) << "support" << '\n';
  auto row = [&](const std::string& name, const Counts& c) {
    o << std::left << std::setw(16) << name << std::right << std::setw(10) << c.precision() << std::setw(10)
      << c.recall() << std::setw(10) << c.f1() << std::setw(10) << c.gold << '\n';
  };
  for (const auto& [type, c] : r.per_type) row(type, c);
  row("overall", r.overall);
  o << "token accuracy: " << r.token_accuracy << " (" << r.correct_tokens << "/" << r.tokens << ")\n";
  out << o.str();
}

void write_key_values(const EvalReport& r, std::ostream& out) {
  std::ostringstream o;
  o << std::setprecision(10);
  o << "precision=" << r.precision << '\n'
    << "recall=" << r.recall << '\n'
    << "f1=" << r.f1 << '\n'
    << "token_accuracy=" << r.token_accuracy << '\n'
    << "entities_gold=" << r.overall.gold << '\n'
    << "entities_predicted=" << r.overall.predicted << '\n'
    << "entities_correct=" << r.overall.correct << '\n'
    << "tokens=" << r.tokens << '\n';
  for (const auto& [type, c] : r.per_type) {
    o << type << ".precision=" << c.precision() << '\n'
      << type << ".recall=" << c.recall() << '\n'
      << type << ".f1=" << c.f1() << '\n'
      << type << ".support=" << c.gold << '\n';
  }
  out << o.str();
}

}  // namespace nerkit::eval
