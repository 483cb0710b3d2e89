#pragma once

// Random inputs shared by the unit and acceptance tests.

#include "phonalign/common.hpp"
#include "phonalign/knn.hpp"

#include "oracles.hpp"

namespace testutil {

using phonalign::RowMatrixD;
using phonalign::Rng;

inline oracle::Dense to_dense(const RowMatrixD& m) {
  oracle::Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

// Correlated Gaussian data with a random, decaying spectrum; occasionally rank-deficient.
inline RowMatrixD random_matrix(Rng& rng, Eigen::Index n, Eigen::Index d) {
  RowMatrixD z(n, d), a(d, d);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
  const double decay = 0.5 + 0.5 * rng.uniform();
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) a(r, c) = rng.normal() * std::pow(decay, static_cast<double>(r));
  RowMatrixD x = z * a;
  if (rng.uniform() < 0.2 && d > 2) x.col(d - 1) = x.col(0) - 2.0 * x.col(1);  // exact linear dependence
  const double shift = 10.0 * rng.normal();
  return x.array() + shift;
}

// Training set with deliberate duplicate rows and coarse (tie-prone) coordinates.
struct KnnInstance {
  RowMatrixD train;
  std::vector<phonalign::PhoneId> labels;
  RowMatrixD queries;
  int classes = 0;
  int k = 0;
};

inline KnnInstance random_knn_instance(Rng& rng, Eigen::Index max_m, Eigen::Index max_dim, Eigen::Index queries) {
  KnnInstance inst;
  const auto m = 1 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(max_m)));
  const auto d = 1 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(max_dim)));
  inst.classes = 1 + static_cast<int>(rng.below(12));
  inst.k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min<Eigen::Index>(m, 25))));
  const bool coarse = rng.uniform() < 0.5;
  auto draw = [&] { return coarse ? std::round(rng.normal() * 2.0) : rng.normal(); };
  inst.train.resize(m, d);
  for (Eigen::Index r = 0; r < m; ++r) {
    if (r > 0 && rng.uniform() < 0.1) {
      inst.train.row(r) = inst.train.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(r))));
    } else {
      for (Eigen::Index c = 0; c < d; ++c) inst.train(r, c) = draw();
    }
    inst.labels.push_back(static_cast<phonalign::PhoneId>(rng.below(static_cast<std::uint64_t>(inst.classes))));
  }
  inst.queries.resize(queries, d);
  for (Eigen::Index q = 0; q < queries; ++q) {
    if (rng.uniform() < 0.2) {
      inst.queries.row(q) = inst.train.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m))));
    } else {
      for (Eigen::Index c = 0; c < d; ++c) inst.queries(q, c) = draw();
    }
  }
  return inst;
}

// Rows either quantised to multiples of 1/k (KNN-like, tie-prone) or continuous, with
// a sticky dominant class so that runs form.
inline phonalign::Posteriorgram random_posteriorgram(Rng& rng, Eigen::Index frames, int classes) {
  phonalign::Posteriorgram pg;
  pg.probs = RowMatrixD::Zero(frames, classes);
  for (int c = 0; c < classes; ++c) pg.inventory.add("c" + std::to_string(c));
  pg.stride = 0.01 + 0.02 * rng.uniform();
  pg.offset = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
  const bool quantised = rng.uniform() < 0.5;
  const int k = 1 + static_cast<int>(rng.below(12));
  int dominant = 0;
  for (Eigen::Index t = 0; t < frames; ++t) {
    if (rng.uniform() < 0.15) dominant = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    if (quantised) {
      for (int v = 0; v < k; ++v) {
        const int c = rng.uniform() < 0.6 ? dominant : static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
        pg.probs(t, c) += 1.0;
      }
      pg.probs.row(t) /= static_cast<double>(k);
    } else {
      for (int c = 0; c < classes; ++c) pg.probs(t, c) = rng.uniform() + (c == dominant ? 2.0 * rng.uniform() : 0.0);
      pg.probs.row(t) /= pg.probs.row(t).sum();
    }
  }
  return pg;
}

inline phonalign::PhoneInventory numbered_inventory(int n) {
  phonalign::PhoneInventory inv;
  for (int i = 0; i < n; ++i) inv.add("c" + std::to_string(i));
  return inv;
}

}  // namespace testutil
