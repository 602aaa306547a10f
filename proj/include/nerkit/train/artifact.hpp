#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "nerkit/train/tagger.hpp"

namespace nerkit::train {

// Binary container: 8-byte magic, u32 format version, u32 section count,
// then an index of (name, kind, offset, size) entries and the section
// payloads. Text sections hold the config, the vocabularies (one UTF-8 entry
// per line) and the tokenizer; tensor sections hold rank, dims and
// little-endian f64 values. Integers are little-endian.
inline constexpr char kArtifactMagic[8] = {'N', 'E', 'R', 'K', 'I', 'T', 'M', '\0'};
inline constexpr std::uint32_t kArtifactVersion = 1;

void save_tagger(const Tagger& tagger, std::ostream& out);
void save_tagger_file(const Tagger& tagger, const std::string& path);
// Throws LoadError on a bad magic, unsupported version, truncation, or a
// missing or mis-shaped tensor.
Tagger load_tagger(std::istream& in);
Tagger load_tagger_file(const std::string& path);

}  // namespace nerkit::train
