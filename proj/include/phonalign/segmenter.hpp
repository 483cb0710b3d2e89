#pragma once

#include "phonalign/alignment.hpp"
#include "phonalign/knn.hpp"

#include <string>
#include <vector>

namespace phonalign {

inline constexpr double kDefaultThreshold = 0.5;

struct FrameDecision {
  PhoneId phone = 0;
  double prob = 0.0;
  friend bool operator==(const FrameDecision&, const FrameDecision&) = default;
};

// A maximal run of frames sharing the argmax phone. Frame indices are inclusive.
struct FrameGroup {
  PhoneId phone = 0;
  Eigen::Index first_frame = 0;
  Eigen::Index last_frame = 0;
  double confidence = 0.0;  // mean per-frame max posterior

  Eigen::Index length() const noexcept { return last_frame - first_frame + 1; }
  friend bool operator==(const FrameGroup&, const FrameGroup&) = default;
};

// Per-frame argmax; ties go to the lower phone id.
inline std::vector<FrameDecision> decode_frames(const Posteriorgram& pg) {
  std::vector<FrameDecision> out;
  out.reserve(static_cast<std::size_t>(pg.frames()));
  for (Eigen::Index t = 0; t < pg.frames(); ++t) {
    FrameDecision best{0, pg.probs.cols() > 0 ? pg.probs(t, 0) : 0.0};
    for (Eigen::Index p = 1; p < pg.probs.cols(); ++p)
      if (pg.probs(t, p) > best.prob) best = {static_cast<PhoneId>(p), pg.probs(t, p)};
    out.push_back(best);
  }
  return out;
}

inline std::vector<FrameGroup> group_frames(const std::vector<FrameDecision>& decoded) {
  std::vector<FrameGroup> groups;
  double sum = 0.0;
  for (std::size_t t = 0; t < decoded.size(); ++t) {
    const auto idx = static_cast<Eigen::Index>(t);
    if (groups.empty() || groups.back().phone != decoded[t].phone) {
      if (!groups.empty()) groups.back().confidence = sum / static_cast<double>(groups.back().length());
      groups.push_back({decoded[t].phone, idx, idx, 0.0});
      sum = 0.0;
    }
    groups.back().last_frame = idx;
    sum += decoded[t].prob;
  }
  if (!groups.empty()) groups.back().confidence = sum / static_cast<double>(groups.back().length());
  return groups;
}

// Posteriorgram -> timed phones: argmax per frame, group equal runs, drop groups whose
// confidence is below `threshold`, then merge surviving neighbours with the same phone.
// A merged segment also covers the dropped groups between its parts and its confidence is
// the frame-weighted mean of the parts. Other dropped spans are left as unlabeled gaps.
inline Alignment segment(const Posteriorgram& pg, double threshold = kDefaultThreshold,
                         std::string utterance_id = {}) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw DataError("threshold must lie in [0, 1]");
  struct Span {
    PhoneId phone;
    Eigen::Index first, last;
    double weighted;  // confidence * frames, summed over merged groups
    Eigen::Index frames;
  };
  std::vector<Span> kept;
  for (const auto& g : group_frames(decode_frames(pg))) {
    if (g.confidence < threshold) continue;
    if (!kept.empty() && kept.back().phone == g.phone) {
      auto& s = kept.back();
      s.last = g.last_frame;
      s.weighted += g.confidence * static_cast<double>(g.length());
      s.frames += g.length();
      continue;
    }
    kept.push_back({g.phone, g.first_frame, g.last_frame, g.confidence * static_cast<double>(g.length()), g.length()});
  }

  Alignment out;
  out.utterance_id = std::move(utterance_id);
  out.duration = pg.offset + static_cast<double>(pg.frames()) * pg.stride;
  for (const auto& s : kept) {
    const double conf = std::clamp(s.weighted / static_cast<double>(s.frames), 0.0, 1.0);
    out.segments.push_back({pg.inventory.symbol(s.phone), pg.offset + static_cast<double>(s.first) * pg.stride,
                            pg.offset + static_cast<double>(s.last + 1) * pg.stride, conf});
  }
  return out;
}

}  // namespace phonalign
