#include "nerkit/crf/tagset.hpp"

#include <algorithm>
#include <set>

#include "nerkit/data/bio.hpp"
#include "nerkit/error.hpp"

namespace nerkit::crf {

TagSet::TagSet() : tags_{std::string(data::kOutside)} { index(); }

TagSet TagSet::from_tags(std::span<const std::string> tags) {
  std::set<std::string> types;
  for (const auto& t : tags) {
    auto parsed = data::parse_tag(t);
    if (!parsed) throw DataError("malformed BIO2 tag '" + t + "'");
    if (parsed->prefix != data::Prefix::Outside) types.insert(parsed->type);
  }
  TagSet set;
  for (const auto& type : types) {
    set.tags_.push_back(data::begin_tag(type));
    set.tags_.push_back(data::inside_tag(type));
  }
  set.index();
  return set;
}

TagSet TagSet::from_ordered(std::vector<std::string> tags) {
  TagSet set;
  set.tags_ = std::move(tags);
  set.index();
  if (!set.contains(data::kOutside)) throw DataError("tag set lacks \"O\"");
  for (const auto& t : set.tags_) {
    auto parsed = data::parse_tag(t);
    if (!parsed) throw DataError("malformed BIO2 tag '" + t + "'");
    if (parsed->prefix == data::Prefix::Inside && !set.contains(data::begin_tag(parsed->type))) {
      throw DataError("tag '" + t + "' has no matching B- tag");
    }
  }
  return set;
}

void TagSet::index() {
  ids_.clear();
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (!ids_.emplace(tags_[i], i).second) throw DataError("duplicate tag '" + tags_[i] + "'");
  }
  auto it = ids_.find(std::string(data::kOutside));
  outside_ = it == ids_.end() ? 0 : it->second;
}

bool TagSet::contains(std::string_view tag) const { return ids_.count(std::string(tag)) > 0; }

std::size_t TagSet::id(std::string_view tag) const {
  auto it = ids_.find(std::string(tag));
  if (it == ids_.end()) throw DataError("unknown tag '" + std::string(tag) + "'");
  return it->second;
}

std::vector<std::size_t> TagSet::ids(std::span<const std::string> tags) const {
  std::vector<std::size_t> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(id(t));
  return out;
}

std::vector<std::string> TagSet::names(std::span<const std::size_t> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (std::size_t i : ids) out.push_back(tag(i));
  return out;
}

bool TagSet::allowed(std::size_t from, std::size_t to) const {
  auto target = data::parse_tag(tags_.at(to));
  if (target->prefix != data::Prefix::Inside) return true;
  if (from >= tags_.size()) return false;
  auto source = data::parse_tag(tags_[from]);
  return source->prefix != data::Prefix::Outside && source->type == target->type;
}

}  // namespace nerkit::crf
