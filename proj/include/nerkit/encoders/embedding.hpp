#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>

#include "nerkit/autodiff/graph.hpp"
#include "nerkit/data/vocab.hpp"
#include "nerkit/rng.hpp"

namespace nerkit::enc {

struct EmbeddingTable {
  data::Vocab vocab;
  ad::Tensor matrix;  // {V, d}

  // Rows drawn uniformly from [-0.1, 0.1].
  static EmbeddingTable random(data::Vocab vocab, std::size_t dim, Rng& rng);

  std::size_t dim() const { return matrix.dim(1); }
  std::size_t size() const { return matrix.dim(0); }
  std::size_t unk_id() const { return data::Vocab::kUnk; }
  std::size_t pad_id() const { return data::Vocab::kPad; }

  // Row for `token`, or the unk row.
  ad::Tensor embed(ad::Graph& g, std::string_view token) const;
};

struct EmbeddingInitReport {
  std::size_t hits = 0;
  std::size_t vocabulary = 0;  // entries eligible for a pretrained vector (reserved ids excluded)
  double hit_rate() const { return vocabulary == 0 ? 0.0 : static_cast<double>(hits) / vocabulary; }
};

// Redraws every row uniformly from [-0.1, 0.1].
EmbeddingInitReport init_embeddings_random(EmbeddingTable& table, Rng& rng);

// Random init, then copies vectors for vocabulary entries found in a text
// embedding file: optional "V d" header line, then "token v1 ... vd" rows.
// A vector length different from the table width throws ConfigError.
EmbeddingInitReport init_embeddings_pretrained(EmbeddingTable& table, std::istream& in, Rng& rng);
EmbeddingInitReport init_embeddings_pretrained(EmbeddingTable& table, const std::string& path, Rng& rng);

}  // namespace nerkit::enc
