#include "nerkit/encoders/embedding.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "nerkit/autodiff/init.hpp"
#include "nerkit/error.hpp"

namespace nerkit::enc {

namespace {
constexpr double kInitLimit = 0.1;

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string field;
  while (in >> field) out.push_back(field);
  return out;
}
}  // namespace

EmbeddingTable EmbeddingTable::random(data::Vocab vocab, std::size_t dim, Rng& rng) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  EmbeddingTable t;
  t.matrix = ad::uniform({vocab.size(), dim}, kInitLimit, rng);
  t.vocab = std::move(vocab);
  return t;
}

ad::Tensor EmbeddingTable::embed(ad::Graph& g, std::string_view token) const {
  return g.lookup(matrix, vocab.id(token));
}

EmbeddingInitReport init_embeddings_random(EmbeddingTable& table, Rng& rng) {
  for (double& v : table.matrix.values()) v = rng.uniform(-kInitLimit, kInitLimit);
  return {0, table.size() > 2 ? table.size() - 2 : 0};
}

EmbeddingInitReport init_embeddings_pretrained(EmbeddingTable& table, std::istream& in, Rng& rng) {
  EmbeddingInitReport report = init_embeddings_random(table, rng);
  const std::size_t d = table.dim();
  std::vector<bool> seen(table.size(), false);
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      if (fields.size() == 2) {
        // "V d" header
        std::size_t declared = 0;
        try {
          declared = std::stoul(fields[1]);
          std::stoul(fields[0]);
        } catch (const std::exception&) {
          declared = 0;
        }
        if (declared != 0) {
          if (declared != d)
            throw ConfigError("pretrained embeddings have dimension " + std::to_string(declared) +
                              " but the table expects " + std::to_string(d));
          continue;
        }
      }
    }
    if (fields.size() - 1 != d)
      throw ConfigError("pretrained embedding on line " + std::to_string(line_no) + " has dimension " +
                        std::to_string(fields.size() - 1) + " but the table expects " + std::to_string(d));
    if (!table.vocab.contains(fields[0])) continue;
    const std::size_t id = table.vocab.id(fields[0]);
    if (id == data::Vocab::kPad || id == data::Vocab::kUnk) continue;
    auto values = table.matrix.values();
    for (std::size_t k = 0; k < d; ++k) {
      try {
        values[id * d + k] = std::stod(fields[k + 1]);
      } catch (const std::exception&) {
        throw LoadError("bad number in pretrained embeddings, line " + std::to_string(line_no));
      }
    }
    if (!seen[id]) {
      seen[id] = true;
      ++report.hits;
    }
  }
  return report;
}

EmbeddingInitReport init_embeddings_pretrained(EmbeddingTable& table, const std::string& path, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open embedding file: " + path);
  return init_embeddings_pretrained(table, in, rng);
}

}  // namespace nerkit::enc
