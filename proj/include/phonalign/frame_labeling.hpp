#pragma once

#include "phonalign/alignment.hpp"
#include "phonalign/embedding.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace phonalign {

struct FrameRef {
  std::string utterance_id;
  Eigen::Index frame = 0;
  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

// Rows of X, y and provenance are aligned.
struct LabeledFrameDataset {
  RowMatrixF X;
  std::vector<PhoneId> y;
  std::vector<FrameRef> provenance;
  PhoneInventory inventory;

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }

  // Rows per phone id, indexed by id (length = inventory size).
  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(inventory.size(), 0);
    for (auto id : y) ++counts[static_cast<std::size_t>(id)];
    return counts;
  }
};

// Overlaps closer than this are ties. Frame edges computed as offset + i*stride carry
// rounding error of a few ulps, which must not decide a tie.
inline constexpr double kOverlapEpsilon = 1e-9;

// Labels each frame with the reference segment that overlaps its span the most; ties go
// to the earlier segment and frames overlapping nothing are dropped.
inline LabeledFrameDataset label_frames(const EmbeddingMatrix& matrix, const Alignment& ref,
                                        const PhoneInventory& inventory) {
  auto segs = ref.segments;
  std::stable_sort(segs.begin(), segs.end(), [](const PhoneSegment& a, const PhoneSegment& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return a.label < b.label;
  });
  std::vector<PhoneId> seg_ids;
  seg_ids.reserve(segs.size());
  for (const auto& s : segs) {
    auto id = inventory.find(s.label);
    if (!id) throw DataError("label '" + s.label + "' in '" + ref.utterance_id + "' is not in the inventory");
    seg_ids.push_back(*id);
  }

  std::vector<Eigen::Index> rows;
  std::vector<PhoneId> labels;
  for (Eigen::Index i = 0; i < matrix.frames(); ++i) {
    const double f0 = matrix.frame_start(i);
    const double f1 = matrix.frame_end(i);
    double best = kOverlapEpsilon;
    std::optional<std::size_t> best_seg;
    for (std::size_t s = 0; s < segs.size() && segs[s].start < f1; ++s) {
      if (segs[s].end <= f0) continue;
      const double overlap = std::min(f1, segs[s].end) - std::max(f0, segs[s].start);
      if (overlap > best + (best_seg ? kOverlapEpsilon : 0.0)) {
        best = overlap;
        best_seg = s;
      }
    }
    if (!best_seg) continue;
    rows.push_back(i);
    labels.push_back(seg_ids[*best_seg]);
  }

  LabeledFrameDataset out;
  out.inventory = inventory;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), matrix.dim());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.X.row(static_cast<Eigen::Index>(r)) = matrix.data.row(rows[r]);
    out.provenance.push_back({matrix.utterance_id, rows[r]});
  }
  out.y = std::move(labels);
  return out;
}

// Appends `more` to `into`. Both must share the inventory and feature dimension.
inline void append(LabeledFrameDataset& into, const LabeledFrameDataset& more) {
  if (into.empty() && into.X.cols() == 0) {
    into = more;
    return;
  }
  if (!(into.inventory == more.inventory)) throw DataError("cannot concatenate datasets with different inventories");
  if (more.empty()) return;
  if (into.X.cols() != more.X.cols()) throw DataError("cannot concatenate datasets with different dimensions");
  const auto n0 = into.X.rows();
  into.X.conservativeResize(n0 + more.X.rows(), Eigen::NoChange);
  into.X.bottomRows(more.X.rows()) = more.X;
  into.y.insert(into.y.end(), more.y.begin(), more.y.end());
  into.provenance.insert(into.provenance.end(), more.provenance.begin(), more.provenance.end());
}

struct BalanceResult {
  LabeledFrameDataset dataset;
  std::size_t per_class = 0;
  std::vector<std::size_t> counts_before;   // by phone id
  std::vector<std::string> absent_classes;  // inventory phones with no rows
};

// Draws exactly `per_class` rows from each phone present (the smallest class size when
// unset), uniformly without replacement. Selected rows keep their original order.
inline BalanceResult balance(const LabeledFrameDataset& data, std::optional<std::size_t> per_class,
                             std::uint64_t seed) {
  if (data.empty()) throw DataError("cannot balance an empty dataset");
  BalanceResult result;
  result.counts_before = data.class_counts();

  std::vector<std::vector<std::size_t>> by_class(data.inventory.size());
  for (std::size_t r = 0; r < data.y.size(); ++r) by_class[static_cast<std::size_t>(data.y[r])].push_back(r);

  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) result.absent_classes.push_back(data.inventory.symbol(static_cast<PhoneId>(c)));
    else smallest = std::min(smallest, by_class[c].size());
  }
  const std::size_t k = per_class.value_or(smallest);
  if (k == 0) throw DataError("per-class count must be positive");

  std::string deficient;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && by_class[c].size() < k) {
      if (!deficient.empty()) deficient += ", ";
      deficient += data.inventory.symbol(static_cast<PhoneId>(c)) + " (" + std::to_string(by_class[c].size()) + ")";
    }
  }
  if (!deficient.empty())
    throw DataError("per-class count " + std::to_string(k) + " exceeds the size of classes: " + deficient);

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (auto& rows : by_class) {
    if (rows.empty()) continue;
    // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(rows.size() - i));
      std::swap(rows[i], rows[j]);
    }
    chosen.insert(chosen.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::sort(chosen.begin(), chosen.end());

  auto& out = result.dataset;
  out.inventory = data.inventory;
  out.X.resize(static_cast<Eigen::Index>(chosen.size()), data.X.cols());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(static_cast<Eigen::Index>(chosen[i]));
    out.y.push_back(data.y[chosen[i]]);
    out.provenance.push_back(data.provenance[chosen[i]]);
  }
  result.per_class = k;
  return result;
}

}  // namespace phonalign
