#pragma once

#include "phonalign/common.hpp"
#include "phonalign/embedding.hpp"
#include "phonalign/knn.hpp"
#include "phonalign/metrics.hpp"
#include "phonalign/segmenter.hpp"
#include "phonalign/text.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace phonalign {

inline constexpr int kConfigVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 0;

struct PipelineConfig {
  std::optional<double> variance_target = 0.95;  // nullopt: no reduction
  int knn_k = kDefaultNeighbors;
  double threshold = kDefaultThreshold;
  std::optional<std::size_t> per_class;  // nullopt: smallest class size
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> stride;  // overrides manifest strides when set
  double tolerance = kDefaultTolerance;

  void validate() const {
    if (variance_target && !(*variance_target > 0.0 && *variance_target <= 1.0))
      throw DataError("variance target must lie in (0, 1] or be 'none'");
    if (knn_k < 1) throw DataError("k must be at least 1");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw DataError("threshold must lie in [0, 1]");
    if (per_class && *per_class == 0) throw DataError("per-class count must be positive");
    if (stride && !(*stride > 0.0)) throw DataError("stride must be positive");
    if (!(tolerance >= 0.0)) throw DataError("tolerance must be non-negative");
  }
};

// "none" or a fraction.
inline std::optional<double> parse_variance(const std::string& s) {
  if (s == "none") return std::nullopt;
  const auto v = text::to_double(s);
  if (!v || !(*v > 0.0 && *v <= 1.0)) throw DataError("--variance must be a fraction in (0, 1] or 'none', got '" + s + "'");
  return *v;
}

// "min" or a positive count.
inline std::optional<std::size_t> parse_per_class(const std::string& s) {
  if (s == "min") return std::nullopt;
  const auto v = text::to_int(s);
  if (!v || *v <= 0) throw DataError("--per-class must be 'min' or a positive integer, got '" + s + "'");
  return static_cast<std::size_t>(*v);
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  return {
      {"version", kConfigVersion},
      {"variance_target", c.variance_target ? nlohmann::json(*c.variance_target) : nlohmann::json("none")},
      {"knn_k", c.knn_k},
      {"threshold", c.threshold},
      {"per_class", c.per_class ? nlohmann::json(*c.per_class) : nlohmann::json("min")},
      {"seed", c.seed},
      {"stride", c.stride ? nlohmann::json(*c.stride) : nlohmann::json(nullptr)},
      {"tolerance", c.tolerance},
  };
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kConfigVersion)
      throw DataError("unsupported config version " + j.at("version").dump());
    PipelineConfig c;
    const auto& v = j.at("variance_target");
    c.variance_target = v.is_string() ? parse_variance(v.get<std::string>()) : std::optional<double>(v.get<double>());
    c.knn_k = j.at("knn_k").get<int>();
    c.threshold = j.at("threshold").get<double>();
    const auto& pc = j.at("per_class");
    c.per_class = pc.is_string() ? parse_per_class(pc.get<std::string>())
                                 : std::optional<std::size_t>(pc.get<std::size_t>());
    c.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("stride").is_null()) c.stride = j.at("stride").get<double>();
    c.tolerance = j.at("tolerance").get<double>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad config: ") + e.what());
  }
}

}  // namespace phonalign
