#pragma once

#include "phonalign/alignment.hpp"
#include "phonalign/text.hpp"

#include <array>
#include <string>
#include <string_view>
#include <utility>

namespace phonalign {

inline constexpr double kTimitSampleRate = 16000.0;

// Parses a TIMIT .PHN transcription: one `<start_sample> <end_sample> <label>` per line.
inline Alignment parse_timit_phn(std::string_view contents, double sample_rate = kTimitSampleRate,
                                 std::string utterance_id = {}) {
  if (!(sample_rate > 0.0)) throw DataError("sample rate must be positive");
  Alignment out;
  out.utterance_id = std::move(utterance_id);
  const auto all = text::lines(contents);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto lineno = i + 1;
    if (text::trim(all[i]).empty()) continue;
    const auto f = text::fields(all[i]);
    if (f.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(f.size()), lineno);
    const auto start = text::to_int(f[0]);
    const auto end = text::to_int(f[1]);
    if (!start || !end) throw ParseError("non-integer sample index", lineno);
    if (*start < 0) throw ParseError("negative sample index", lineno);
    if (*end <= *start) throw ParseError("end before start", lineno);
    out.segments.push_back({std::string(f[2]), static_cast<double>(*start) / sample_rate,
                            static_cast<double>(*end) / sample_rate, std::nullopt});
  }
  return out;
}

// TIMIT 61 -> 39 phone folding (Lee & Hon). Table version 1. `q` has no 39-set image and
// is dropped. Phones not listed map to themselves.
inline constexpr int kTimitFoldingVersion = 1;

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 23> kTimitFolding{{
    {"ao", "aa"},   {"ax", "ah"},   {"ax-h", "ah"}, {"axr", "er"},  {"hv", "hh"},  {"ix", "ih"},
    {"el", "l"},    {"em", "m"},    {"en", "n"},    {"nx", "n"},    {"eng", "ng"}, {"zh", "sh"},
    {"ux", "uw"},   {"pcl", "sil"}, {"tcl", "sil"}, {"kcl", "sil"}, {"bcl", "sil"}, {"dcl", "sil"},
    {"gcl", "sil"}, {"h#", "sil"},  {"pau", "sil"}, {"epi", "sil"}, {"q", ""},
}};

inline std::string fold_timit_phone(std::string_view phone) {
  for (const auto& [from, to] : kTimitFolding)
    if (from == phone) return std::string(to);
  return std::string(phone);
}

// Applies the 39-phone folding. Dropped phones leave a gap; contiguous segments that
// fold to the same phone are merged into one.
inline Alignment fold_timit_39(const Alignment& in) {
  Alignment out{in.utterance_id, {}, in.duration};
  for (const auto& seg : in.segments) {
    auto folded = fold_timit_phone(seg.label);
    if (folded.empty()) continue;
    if (!out.segments.empty() && out.segments.back().label == folded &&
        std::abs(out.segments.back().end - seg.start) <= 1e-9) {
      out.segments.back().end = seg.end;
      continue;
    }
    out.segments.push_back({std::move(folded), seg.start, seg.end, seg.confidence});
  }
  return out;
}

}  // namespace phonalign
