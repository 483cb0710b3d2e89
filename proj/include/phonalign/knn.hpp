#pragma once

#include "phonalign/alignment.hpp"
#include "phonalign/npy.hpp"
#include "phonalign/parallel.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace phonalign {

inline constexpr int kKnnModelVersion = 1;
inline constexpr int kDefaultNeighbors = 10;

// Lazy k-nearest-neighbour frame classifier under Euclidean distance with uniform votes.
struct KnnClassifier {
  RowMatrixD train_X;  // M x K
  std::vector<PhoneId> train_y;
  int k = kDefaultNeighbors;
  PhoneInventory inventory;

  Eigen::Index size() const noexcept { return train_X.rows(); }
  Eigen::Index dim() const noexcept { return train_X.cols(); }
};

// T x P class posteriors, one row per frame.
struct Posteriorgram {
  RowMatrixD probs;
  PhoneInventory inventory;
  double stride = 0.02;
  double offset = 0.0;

  Eigen::Index frames() const noexcept { return probs.rows(); }
};

struct Neighbor {
  double distance2 = 0.0;  // squared Euclidean distance
  Eigen::Index index = 0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

template <class Derived>
KnnClassifier fit_knn(const Eigen::MatrixBase<Derived>& X, std::vector<PhoneId> y, PhoneInventory inventory,
                      int k = kDefaultNeighbors) {
  if (k < 1) throw DataError("k must be at least 1, got " + std::to_string(k));
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw DataError("KNN: row count and label count differ");
  if (X.rows() < k)
    throw DataError("KNN: " + std::to_string(X.rows()) + " training rows is fewer than k = " + std::to_string(k));
  for (auto id : y)
    if (id < 0 || static_cast<std::size_t>(id) >= inventory.size())
      throw DataError("KNN: label id " + std::to_string(id) + " outside the inventory");
  KnnClassifier clf;
  clf.train_X = X.template cast<double>();
  if (!clf.train_X.allFinite()) throw DataError("KNN: training data contains non-finite values");
  clf.train_y = std::move(y);
  clf.k = k;
  clf.inventory = std::move(inventory);
  return clf;
}

// The k training rows nearest to `query`, sorted by (distance, index). Rows are scanned in
// index order, so a later row displaces the current k-th best only when strictly closer;
// that lets the distance sum stop as soon as it reaches the k-th best. Partial sums of
// squares never decrease, so the result is exactly that of a full sort of all distances.
inline std::vector<Neighbor> nearest_neighbors(const KnnClassifier& clf, std::span<const double> query) {
  const auto m = clf.size();
  const auto dim = clf.dim();
  const auto k = static_cast<std::size_t>(clf.k);
  if (static_cast<Eigen::Index>(query.size()) != dim)
    throw DataError("KNN: query has dimension " + std::to_string(query.size()) + ", classifier expects " +
                    std::to_string(dim));
  std::vector<Neighbor> best;
  best.reserve(k + 1);
  constexpr Eigen::Index kBlock = 8;
  for (Eigen::Index r = 0; r < m; ++r) {
    const double* row = clf.train_X.data() + r * dim;
    const bool full = best.size() == k;
    const double bound = full ? best.back().distance2 : 0.0;
    double acc = 0.0;
    bool pruned = false;
    for (Eigen::Index c = 0; c < dim;) {
      const auto stop = std::min(dim, c + kBlock);
      for (; c < stop; ++c) {
        const double diff = row[c] - query[static_cast<std::size_t>(c)];
        acc += diff * diff;
      }
      if (full && acc >= bound) {
        pruned = true;
        break;
      }
    }
    if (pruned) continue;
    const Neighbor cand{acc, r};
    auto pos = std::upper_bound(best.begin(), best.end(), cand, [](const Neighbor& a, const Neighbor& b) {
      return a.distance2 < b.distance2;
    });
    best.insert(pos, cand);
    if (best.size() > k) best.pop_back();
  }
  return best;
}

// Posterior of phone p for a frame = (neighbours labelled p) / k.
template <class Derived>
Posteriorgram predict_posteriorgram(const KnnClassifier& clf, const Eigen::MatrixBase<Derived>& frames,
                                    double stride, double offset = 0.0, std::size_t jobs = 1) {
  if (frames.rows() > 0 && frames.cols() != clf.dim())
    throw DataError("KNN: frames have dimension " + std::to_string(frames.cols()) + ", classifier expects " +
                    std::to_string(clf.dim()));
  const RowMatrixD q = frames.template cast<double>();
  Posteriorgram pg;
  pg.inventory = clf.inventory;
  pg.stride = stride;
  pg.offset = offset;
  pg.probs = RowMatrixD::Zero(q.rows(), static_cast<Eigen::Index>(clf.inventory.size()));
  const double vote = 1.0 / static_cast<double>(clf.k);
  parallel_for(static_cast<std::size_t>(q.rows()), jobs, [&](std::size_t t) {
    const auto row = static_cast<Eigen::Index>(t);
    const auto nn = nearest_neighbors(clf, std::span<const double>(q.data() + row * q.cols(), static_cast<std::size_t>(q.cols())));
    std::vector<int> counts(clf.inventory.size(), 0);
    for (const auto& n : nn) ++counts[static_cast<std::size_t>(clf.train_y[static_cast<std::size_t>(n.index)])];
    for (std::size_t p = 0; p < counts.size(); ++p)
      if (counts[p] != 0) pg.probs(row, static_cast<Eigen::Index>(p)) = static_cast<double>(counts[p]) * vote;
  });
  return pg;
}

inline void save_knn(const KnnClassifier& clf, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta = {{"version", kKnnModelVersion}, {"k", clf.k},          {"metric", "euclidean"},
                         {"M", clf.size()},             {"dim", clf.dim()},    {"inventory", clf.inventory.symbols()}};
  std::ofstream out(dir / "knn.json", std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "knn.json").string());
  out << meta.dump(2) << "\n";
  npy::write_matrix((dir / "knn_X.npy").string(), clf.train_X);
  npy::write_vector<std::int32_t>((dir / "knn_y.npy").string(), clf.train_y);
}

inline KnnClassifier load_knn(const std::filesystem::path& dir) {
  std::ifstream in(dir / "knn.json");
  if (!in) throw Error("cannot open " + (dir / "knn.json").string());
  try {
    nlohmann::json meta;
    in >> meta;
    if (meta.at("version").get<int>() != kKnnModelVersion)
      throw DataError("unsupported model version " + meta.at("version").dump());
    if (meta.value("metric", "euclidean") != "euclidean") throw DataError("unsupported KNN metric");
    auto X = npy::read_matrix<double>((dir / "knn_X.npy").string());
    auto y = npy::read_vector<std::int32_t>((dir / "knn_y.npy").string());
    if (X.rows() != meta.at("M").get<Eigen::Index>() || X.cols() != meta.at("dim").get<Eigen::Index>())
      throw DataError("KNN model in " + dir.string() + " has inconsistent shapes");
    return fit_knn(X, std::move(y), PhoneInventory(meta.at("inventory").get<std::vector<std::string>>()),
                   meta.at("k").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad knn.json: " + std::string(e.what()));
  }
}

}  // namespace phonalign
