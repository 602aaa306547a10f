#include "nerkit/train/artifact.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "nerkit/error.hpp"

namespace nerkit::train {

static_assert(std::endian::native == std::endian::little, "artifact I/O assumes a little-endian host");

namespace {

enum class SectionKind : std::uint8_t { Text = 0, Tensor = 1 };

struct Section {
  std::string name;
  SectionKind kind;
  std::string payload;
};

template <typename T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& data, std::string what) : data_(data), what_(std::move(what)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::string what_;
  std::size_t pos_ = 0;
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw LoadError("model file truncated while reading " + what_);
  }
};

std::string lines(const std::vector<std::string>& items) {
  std::string s;
  for (const auto& i : items) s += i + "\n";
  return s;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string tensor_payload(const ad::Tensor& t) {
  std::string buf;
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) put<std::uint64_t>(buf, d);
  for (double v : t.values()) put<double>(buf, v);
  return buf;
}

void read_tensor(const std::string& name, const std::string& payload, const ad::Tensor& into) {
  Reader r(payload, "tensor " + name);
  const auto rank = r.get<std::uint32_t>();
  ad::Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.get<std::uint64_t>());
  if (shape != into.shape())
    throw LoadError("tensor " + name + " has shape " + ad::shape_string(shape) + " but the model expects " +
                    ad::shape_string(into.shape()));
  auto values = const_cast<ad::Tensor&>(into).values();
  for (auto& v : values) v = r.get<double>();
  if (!r.done()) throw LoadError("tensor " + name + " has trailing bytes");
}

data::Vocab vocab_from(const std::map<std::string, std::string>& text, const std::string& key) {
  try {
    return data::Vocab::from_ordered(split_lines(text.at(key)));
  } catch (const std::out_of_range&) {
    throw LoadError("model file has no section " + key);
  } catch (const Error& e) {
    throw LoadError("section " + key + ": " + e.what());
  }
}

}  // namespace

void save_tagger(const Tagger& tagger, std::ostream& out) {
  const auto& v = tagger.vocabs();
  std::vector<Section> sections;
  sections.push_back({"config", SectionKind::Text, config_text(tagger.config())});
  sections.push_back({"vocab.words", SectionKind::Text, lines(v.base.words.tokens())});
  sections.push_back({"vocab.chars", SectionKind::Text, lines(v.base.chars.tokens())});
  sections.push_back({"vocab.morph_chars", SectionKind::Text, lines(v.base.morph_chars.tokens())});
  sections.push_back({"vocab.tags", SectionKind::Text, lines(v.base.tags.tags())});
  if (v.has_tokenizer) {
    sections.push_back({"vocab.pieces", SectionKind::Text, lines(v.pieces.tokens())});
    std::ostringstream tok_text;
    tok::save_vocab(v.tokenizer, tok_text);
    sections.push_back({"tokenizer", SectionKind::Text, tok_text.str()});
  }
  for (const auto& p : tagger.parameters())
    sections.push_back({"param." + p.name, SectionKind::Tensor, tensor_payload(p.tensor)});

  std::string index;
  std::uint64_t offset = 0;
  for (const auto& s : sections) {
    put<std::uint32_t>(index, static_cast<std::uint32_t>(s.name.size()));
    index += s.name;
    put<std::uint8_t>(index, static_cast<std::uint8_t>(s.kind));
    put<std::uint64_t>(index, offset);
    put<std::uint64_t>(index, s.payload.size());
    offset += s.payload.size();
  }
  std::string head(kArtifactMagic, sizeof(kArtifactMagic));
  put<std::uint32_t>(head, kArtifactVersion);
  put<std::uint32_t>(head, static_cast<std::uint32_t>(sections.size()));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(index.data(), static_cast<std::streamsize>(index.size()));
  for (const auto& s : sections) out.write(s.payload.data(), static_cast<std::streamsize>(s.payload.size()));
  if (!out) throw LoadError("failed to write model");
}

void save_tagger_file(const Tagger& tagger, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write model file: " + path);
  save_tagger(tagger, out);
}

Tagger load_tagger(std::istream& in) {
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(data, "header");
  if (data.size() < sizeof(kArtifactMagic) || std::memcmp(data.data(), kArtifactMagic, sizeof(kArtifactMagic)) != 0)
    throw LoadError("not a nerkit model file (bad magic)");
  r.bytes(sizeof(kArtifactMagic));
  const auto version = r.get<std::uint32_t>();
  if (version != kArtifactVersion)
    throw LoadError("model file format version " + std::to_string(version) + " is not supported (this build reads version " +
                    std::to_string(kArtifactVersion) + ")");
  const auto count = r.get<std::uint32_t>();
  struct Entry {
    std::string name;
    SectionKind kind;
    std::uint64_t offset, size;
  };
  std::vector<Entry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    e.name = r.bytes(r.get<std::uint32_t>());
    e.kind = static_cast<SectionKind>(r.get<std::uint8_t>());
    e.offset = r.get<std::uint64_t>();
    e.size = r.get<std::uint64_t>();
    entries.push_back(std::move(e));
  }
  std::uint64_t body_start = 0;
  {
    // Header length = bytes consumed so far.
    std::uint64_t consumed = sizeof(kArtifactMagic) + 8;
    for (const auto& e : entries) consumed += 4 + e.name.size() + 1 + 16;
    body_start = consumed;
  }
  std::map<std::string, std::string> text, tensors;
  for (const auto& e : entries) {
    if (body_start + e.offset + e.size > data.size())
      throw LoadError("model file truncated: section " + e.name + " extends past the end");
    std::string payload = data.substr(body_start + e.offset, e.size);
    if (e.kind == SectionKind::Text)
      text[e.name] = std::move(payload);
    else if (e.kind == SectionKind::Tensor)
      tensors[e.name] = std::move(payload);
    else
      throw LoadError("section " + e.name + " has unknown kind " + std::to_string(static_cast<int>(e.kind)));
  }

  if (!text.count("config")) throw LoadError("model file has no config section");
  TrainConfig config;
  try {
    std::istringstream cfg(text["config"]);
    config = parse_config(cfg);
  } catch (const ConfigError& e) {
    throw LoadError(std::string("model config: ") + e.what());
  }
  TaggerVocabs v;
  v.base.words = vocab_from(text, "vocab.words");
  v.base.chars = vocab_from(text, "vocab.chars");
  v.base.morph_chars = vocab_from(text, "vocab.morph_chars");
  if (!text.count("vocab.tags")) throw LoadError("model file has no section vocab.tags");
  try {
    v.base.tags = crf::TagSet::from_ordered(split_lines(text["vocab.tags"]));
  } catch (const Error& e) {
    throw LoadError(std::string("section vocab.tags: ") + e.what());
  }
  if (text.count("tokenizer")) {
    std::istringstream tk(text["tokenizer"]);
    v.tokenizer = tok::load_vocab(tk);
    v.pieces = vocab_from(text, "vocab.pieces");
    v.has_tokenizer = true;
  }
  Rng rng(0);
  Tagger tagger = Tagger::build(config, std::move(v), rng);
  for (const auto& p : tagger.parameters()) {
    auto it = tensors.find("param." + p.name);
    if (it == tensors.end()) throw LoadError("model file has no tensor " + p.name);
    read_tensor(p.name, it->second, p.tensor);
  }
  return tagger;
}

Tagger load_tagger_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file: " + path);
  return load_tagger(in);
}

}  // namespace nerkit::train
