#pragma once

#include "phonalign/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace phonalign {

inline constexpr double kDefaultTolerance = 0.02;

// Boundary times closer than this are the same instant.
inline constexpr double kTimeEpsilon = 1e-9;

struct BoundaryEvalResult {
  std::size_t n_ref = 0;
  std::size_t n_hyp = 0;
  std::size_t n_hit = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double r_value = 0.0;
  double tolerance = kDefaultTolerance;
  std::size_t utterances = 0;
  bool macro = false;
  std::optional<double> pearson;  // correlation of matched (ref, hyp) boundary times
};

// All distinct segment edges, ascending.
inline std::vector<double> extract_boundaries(const Alignment& a) {
  std::vector<double> b;
  b.reserve(a.segments.size() * 2);
  for (const auto& s : a.segments) {
    b.push_back(s.start);
    b.push_back(s.end);
  }
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double t : b)
    if (out.empty() || t - out.back() > kTimeEpsilon) out.push_back(t);
  return out;
}

struct BoundaryMatch {
  std::size_t hits = 0;
  std::vector<std::pair<double, double>> pairs;  // (ref, hyp)
};

// Greedy one-to-one matching in time order. Both lists must be sorted.
inline BoundaryMatch match_boundaries(const std::vector<double>& ref, const std::vector<double>& hyp,
                                      double tolerance) {
  if (tolerance < 0.0) throw DataError("tolerance must be non-negative");
  BoundaryMatch m;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ref.size() && j < hyp.size()) {
    if (std::abs(ref[i] - hyp[j]) <= tolerance + kTimeEpsilon) {
      m.pairs.emplace_back(ref[i], hyp[j]);
      ++m.hits;
      ++i;
      ++j;
    } else if (ref[i] < hyp[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return m;
}

// Segmentation R-value from hit rate HR and over-segmentation OS:
//   r1 = sqrt((1 - HR)^2 + OS^2), r2 = (-OS + HR - 1) / sqrt(2), R = 1 - (|r1| + |r2|) / 2
inline double r_value(double hit_rate, double over_segmentation) {
  const double r1 = std::sqrt((1.0 - hit_rate) * (1.0 - hit_rate) + over_segmentation * over_segmentation);
  const double r2 = (-over_segmentation + hit_rate - 1.0) / std::numbers::sqrt2;
  return 1.0 - (std::abs(r1) + std::abs(r2)) / 2.0;
}

inline double r_value(std::size_t n_ref, std::size_t n_hyp, std::size_t n_hit) {
  if (n_ref == 0) throw DataError("R-value is undefined without reference boundaries");
  const double hr = static_cast<double>(n_hit) / static_cast<double>(n_ref);
  const double os = static_cast<double>(n_hyp) / static_cast<double>(n_ref) - 1.0;
  return r_value(hr, os);
}

inline double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

// Fills precision, recall, F1 and R-value from the counts.
inline void score(BoundaryEvalResult& r) {
  r.precision = r.n_hyp ? static_cast<double>(r.n_hit) / static_cast<double>(r.n_hyp) : 0.0;
  r.recall = r.n_ref ? static_cast<double>(r.n_hit) / static_cast<double>(r.n_ref) : 0.0;
  r.f1 = f1_score(r.precision, r.recall);
  r.r_value = r_value(r.n_ref, r.n_hyp, r.n_hit);
}

struct EvalOptions {
  double tolerance = kDefaultTolerance;
  bool macro = false;              // average per-utterance scores instead of pooling counts
  bool exclude_endpoints = false;  // drop each utterance's first and last boundary
  bool pearson = false;
};

inline std::optional<double> pearson_correlation(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& [x, y] : xy) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0 && syy > 0.0)) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// Pairs references with hypotheses by utterance id; every id must appear on both sides.
inline std::vector<std::pair<Alignment, Alignment>> pair_by_utterance(const std::vector<Alignment>& refs,
                                                                      const std::vector<Alignment>& hyps) {
  std::map<std::string, const Alignment*> by_id;
  for (const auto& h : hyps) {
    if (!by_id.emplace(h.utterance_id, &h).second)
      throw DataError("duplicate hypothesis utterance id '" + h.utterance_id + "'");
  }
  std::vector<std::pair<Alignment, Alignment>> out;
  std::vector<std::string> unpaired;
  std::map<std::string, bool> used;
  for (const auto& r : refs) {
    auto it = by_id.find(r.utterance_id);
    if (it == by_id.end()) {
      unpaired.push_back(r.utterance_id + " (reference only)");
      continue;
    }
    if (used[r.utterance_id]) throw DataError("duplicate reference utterance id '" + r.utterance_id + "'");
    used[r.utterance_id] = true;
    out.emplace_back(r, *it->second);
  }
  for (const auto& [id, _] : by_id)
    if (!used.count(id)) unpaired.push_back(id + " (hypothesis only)");
  if (!unpaired.empty()) {
    std::string list;
    for (const auto& u : unpaired) list += (list.empty() ? "" : ", ") + u;
    throw DataError("unpaired utterances: " + list);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first.utterance_id < b.first.utterance_id; });
  return out;
}

inline BoundaryEvalResult evaluate_corpus(const std::vector<std::pair<Alignment, Alignment>>& pairs,
                                          const EvalOptions& opt = {}) {
  for (const auto& [ref, hyp] : pairs)
    if (ref.utterance_id != hyp.utterance_id)
      throw DataError("utterance ids differ within a pair: '" + ref.utterance_id + "' vs '" + hyp.utterance_id + "'");

  BoundaryEvalResult total;
  total.tolerance = opt.tolerance;
  total.utterances = pairs.size();
  total.macro = opt.macro;
  std::vector<std::pair<double, double>> matched;
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0, sum_rv = 0.0;
  std::size_t scored = 0;
  auto trim = [&](std::vector<double> b) {
    if (opt.exclude_endpoints && !b.empty()) {
      b.erase(b.begin());
      if (!b.empty()) b.pop_back();
    }
    return b;
  };
  for (const auto& [ref, hyp] : pairs) {
    const auto rb = trim(extract_boundaries(ref));
    const auto hb = trim(extract_boundaries(hyp));
    auto m = match_boundaries(rb, hb, opt.tolerance);
    total.n_ref += rb.size();
    total.n_hyp += hb.size();
    total.n_hit += m.hits;
    if (opt.pearson) matched.insert(matched.end(), m.pairs.begin(), m.pairs.end());
    if (opt.macro && !rb.empty()) {
      BoundaryEvalResult u;
      u.n_ref = rb.size();
      u.n_hyp = hb.size();
      u.n_hit = m.hits;
      score(u);
      sum_p += u.precision;
      sum_r += u.recall;
      sum_f += u.f1;
      sum_rv += u.r_value;
      ++scored;
    }
  }
  score(total);
  if (opt.macro) {
    if (scored == 0) throw DataError("no utterance has reference boundaries");
    const auto n = static_cast<double>(scored);
    total.precision = sum_p / n;
    total.recall = sum_r / n;
    total.f1 = sum_f / n;
    total.r_value = sum_rv / n;
  }
  if (opt.pearson) total.pearson = pearson_correlation(matched);
  return total;
}

}  // namespace phonalign
