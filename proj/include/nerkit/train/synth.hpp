#pragma once

#include <cstddef>
#include <cstdint>

#include "nerkit/data/corpus.hpp"

namespace nerkit::train {

struct SynthOptions {
  std::size_t sentences = 2000;
  std::uint64_t seed = 1;
  bool morph = true;  // emit a third column with a pseudo morphological analysis
  // Share of entity names built from random syllables instead of the gazetteers.
  double novel_name_rate = 0.4;
};

// Templated Turkish-like sentences with PERSON, LOCATION and ORGANIZATION
// entities, case suffixes after an apostrophe, and capitalized distractors.
// Tags are valid BIO2.
data::Corpus synth_corpus(const SynthOptions& options);

}  // namespace nerkit::train
