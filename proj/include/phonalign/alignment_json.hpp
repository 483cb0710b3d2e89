#pragma once

#include "phonalign/alignment.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace phonalign {

// {"utterance_id": str, "duration": num|null, "segments": [{"label", "start", "end", "confidence"?}]}
inline nlohmann::json alignment_to_json(const Alignment& a) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : a.segments) {
    nlohmann::json j = {{"label", s.label}, {"start", s.start}, {"end", s.end}};
    if (s.confidence) j["confidence"] = *s.confidence;
    segs.push_back(std::move(j));
  }
  nlohmann::json out;
  out["utterance_id"] = a.utterance_id;
  out["duration"] = a.duration ? nlohmann::json(*a.duration) : nlohmann::json(nullptr);
  out["segments"] = std::move(segs);
  return out;
}

inline Alignment alignment_from_json(const nlohmann::json& j) {
  try {
    Alignment a;
    a.utterance_id = j.at("utterance_id").get<std::string>();
    if (j.contains("duration") && !j.at("duration").is_null()) a.duration = j.at("duration").get<double>();
    for (const auto& s : j.at("segments")) {
      PhoneSegment seg;
      seg.label = s.at("label").get<std::string>();
      seg.start = s.at("start").get<double>();
      seg.end = s.at("end").get<double>();
      if (s.contains("confidence") && !s.at("confidence").is_null())
        seg.confidence = s.at("confidence").get<double>();
      a.segments.push_back(std::move(seg));
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad alignment JSON: ") + e.what());
  }
}

inline std::string write_alignment_json(const Alignment& a) { return alignment_to_json(a).dump(2) + "\n"; }

inline Alignment read_alignment_json(std::string_view contents) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(contents);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad alignment JSON: ") + e.what());
  }
  return alignment_from_json(j);
}

}  // namespace phonalign
