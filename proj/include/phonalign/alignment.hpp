#pragma once

#include "phonalign/common.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace phonalign {

// Ordered phone symbol set with a symbol <-> id bijection. Ids follow insertion order.
class PhoneInventory {
 public:
  PhoneInventory() = default;

  explicit PhoneInventory(const std::vector<std::string>& symbols) {
    for (const auto& s : symbols) {
      if (contains(s)) throw DataError("duplicate phone symbol '" + s + "' in inventory");
      add(s);
    }
  }

  // Returns the id of `symbol`, inserting it at the end if new.
  PhoneId add(const std::string& symbol) {
    if (auto it = index_.find(symbol); it != index_.end()) return it->second;
    const auto id = static_cast<PhoneId>(symbols_.size());
    symbols_.push_back(symbol);
    index_.emplace(symbol, id);
    return id;
  }

  bool contains(const std::string& symbol) const { return index_.count(symbol) != 0; }

  std::optional<PhoneId> find(const std::string& symbol) const {
    if (auto it = index_.find(symbol); it != index_.end()) return it->second;
    return std::nullopt;
  }

  PhoneId id(const std::string& symbol) const {
    if (auto found = find(symbol)) return *found;
    throw DataError("phone '" + symbol + "' is not in the inventory");
  }

  const std::string& symbol(PhoneId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size())
      throw DataError("phone id " + std::to_string(id) + " out of range");
    return symbols_[static_cast<std::size_t>(id)];
  }

  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }

  friend bool operator==(const PhoneInventory& a, const PhoneInventory& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, PhoneId> index_;
};

// One timed phone interval [start, end), in seconds.
struct PhoneSegment {
  std::string label;
  double start = 0.0;
  double end = 0.0;
  std::optional<double> confidence;  // absent for parsed references

  double duration() const noexcept { return end - start; }

  friend bool operator==(const PhoneSegment&, const PhoneSegment&) = default;
};

struct Alignment {
  std::string utterance_id;
  std::vector<PhoneSegment> segments;
  std::optional<double> duration;

  // End of the last segment, or the duration when that is larger.
  double extent() const noexcept {
    double e = segments.empty() ? 0.0 : segments.back().end;
    if (duration) e = std::max(e, *duration);
    return e;
  }

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

// Lists every invariant violation: ordering, overlap, empty intervals, bad confidences,
// segments running past the duration. An empty result means the alignment is valid.
inline std::vector<std::string> alignment_violations(const Alignment& a) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    const auto& s = a.segments[i];
    const std::string where = "segment " + std::to_string(i) + " ('" + s.label + "')";
    if (s.label.empty()) out.push_back(where + ": empty label");
    if (!(s.start >= 0.0)) out.push_back(where + ": negative start");
    if (!(s.end > s.start)) out.push_back(where + ": end not after start");
    if (s.confidence && !(*s.confidence >= 0.0 && *s.confidence <= 1.0))
      out.push_back(where + ": confidence outside [0,1]");
    if (a.duration && s.end > *a.duration + 1e-9) out.push_back(where + ": ends after duration");
    if (i > 0) {
      const auto& prev = a.segments[i - 1];
      if (s.start < prev.start) out.push_back(where + ": not sorted by start");
      else if (s.start < prev.end - 1e-9) out.push_back(where + ": overlaps previous segment");
    }
  }
  return out;
}

inline void require_valid(const Alignment& a) {
  const auto v = alignment_violations(a);
  if (!v.empty())
    throw DataError("invalid alignment '" + a.utterance_id + "': " + v.front());
}

}  // namespace phonalign
