#pragma once

#include "phonalign/common.hpp"
#include "phonalign/npy.hpp"

#include <Eigen/SVD>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

namespace phonalign {

inline constexpr int kPcaModelVersion = 1;

// Projection onto the leading principal axes, without whitening.
//
// components holds one axis per row, sorted by decreasing explained variance, each
// signed so that its largest-magnitude entry is non-negative. explained_ratio[i] is the
// share of total variance (sum of all squared singular values) carried by axis i. A
// pass-through model (no variance target) has identity components and per-coordinate
// variance shares, in coordinate order.
struct PcaModel {
  VectorD mean;
  RowMatrixD components;  // K x D
  VectorD explained_ratio;
  std::optional<double> variance_target;  // nullopt: pass-through
  std::optional<std::uint64_t> seed;      // training seed, recorded for provenance

  Eigen::Index input_dim() const noexcept { return mean.size(); }
  Eigen::Index output_dim() const noexcept { return components.rows(); }
  double retained_variance() const { return explained_ratio.sum(); }

  friend bool operator==(const PcaModel& a, const PcaModel& b) {
    return a.mean == b.mean && a.components == b.components && a.explained_ratio == b.explained_ratio &&
           a.variance_target == b.variance_target && a.seed == b.seed;
  }
};

namespace pca_detail {

// Flips `v` so its largest-magnitude element (first one on ties) is non-negative.
template <class Row>
void canonical_sign(Row&& v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best) {
      best = std::abs(v(i));
      arg = i;
    }
  }
  if (v(arg) < 0) v = -v;
}

}  // namespace pca_detail

// Fits on the rows of X. The retained dimension K is the smallest k whose cumulative
// explained ratio reaches `variance_target`; if rounding keeps the running sum just
// below a target of 1, K is the numerical rank.
template <class Derived>
PcaModel fit_pca(const Eigen::MatrixBase<Derived>& X_in, std::optional<double> variance_target) {
  if (variance_target && !(*variance_target > 0.0 && *variance_target <= 1.0))
    throw DataError("variance target must lie in (0, 1]");
  const RowMatrixD X = X_in.template cast<double>();
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 2) throw DataError("PCA needs at least 2 rows, got " + std::to_string(n));
  if (d < 1) throw DataError("PCA needs at least 1 column");
  if (!X.allFinite()) throw DataError("PCA input contains non-finite values");

  PcaModel model;
  model.variance_target = variance_target;
  model.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();

  if (!variance_target) {
    const VectorD col_var = centered.colwise().squaredNorm().transpose();
    const double total = col_var.sum();
    if (!(total > 0.0)) throw DataError("degenerate data: zero total variance");
    model.components = RowMatrixD::Identity(d, d);
    model.explained_ratio = col_var / total;
    return model;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const VectorD power = svd.singularValues().array().square();
  const double total = power.sum();
  if (!(total > 0.0)) throw DataError("degenerate data: zero total variance");

  const double cutoff = svd.singularValues()(0) * static_cast<double>(std::max(n, d)) *
                        std::numeric_limits<double>::epsilon();
  Eigen::Index rank = 0;
  while (rank < power.size() && svd.singularValues()(rank) > cutoff) ++rank;

  Eigen::Index k = 0;
  double cumulative = 0.0;
  while (k < rank) {
    cumulative += power(k) / total;
    ++k;
    if (cumulative >= *variance_target) break;
  }

  model.components = svd.matrixV().leftCols(k).transpose();
  for (Eigen::Index i = 0; i < k; ++i) pca_detail::canonical_sign(model.components.row(i));
  model.explained_ratio = power.head(k) / total;
  return model;
}

// (X - mean) * components^T
template <class Derived>
RowMatrixD transform(const PcaModel& model, const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() != model.input_dim())
    throw DataError("PCA transform: input has " + std::to_string(X.cols()) + " columns, model expects " +
                    std::to_string(model.input_dim()));
  const RowMatrixD centered = X.template cast<double>().rowwise() - model.mean.transpose();
  return centered * model.components.transpose();
}

inline void save_pca(const PcaModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["version"] = kPcaModelVersion;
  meta["variance_target"] = model.variance_target ? nlohmann::json(*model.variance_target) : nlohmann::json("none");
  meta["K"] = model.output_dim();
  meta["D"] = model.input_dim();
  meta["seed"] = model.seed ? nlohmann::json(*model.seed) : nlohmann::json(nullptr);
  meta["explained_ratio"] = std::vector<double>(model.explained_ratio.data(),
                                                model.explained_ratio.data() + model.explained_ratio.size());
  std::ofstream out(dir / "pca.json", std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "pca.json").string());
  out << meta.dump(2) << "\n";
  npy::write_vector<double>((dir / "pca_mean.npy").string(),
                            std::span<const double>(model.mean.data(), static_cast<std::size_t>(model.mean.size())));
  npy::write_matrix((dir / "pca_components.npy").string(), model.components);
}

inline PcaModel load_pca(const std::filesystem::path& dir) {
  std::ifstream in(dir / "pca.json");
  if (!in) throw Error("cannot open " + (dir / "pca.json").string());
  PcaModel model;
  try {
    nlohmann::json meta;
    in >> meta;
    if (meta.at("version").get<int>() != kPcaModelVersion)
      throw DataError("unsupported model version " + meta.at("version").dump());
    const auto& target = meta.at("variance_target");
    if (!target.is_string()) model.variance_target = target.get<double>();
    else if (target.get<std::string>() != "none") throw DataError("bad variance_target in pca.json");
    if (!meta.at("seed").is_null()) model.seed = meta.at("seed").get<std::uint64_t>();
    const auto k = meta.at("K").get<Eigen::Index>();
    const auto d = meta.at("D").get<Eigen::Index>();
    const auto ratio = meta.at("explained_ratio").get<std::vector<double>>();
    model.explained_ratio = Eigen::Map<const VectorD>(ratio.data(), static_cast<Eigen::Index>(ratio.size()));
    auto mean = npy::read_vector<double>((dir / "pca_mean.npy").string());
    model.mean = Eigen::Map<const VectorD>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    model.components = npy::read_matrix<double>((dir / "pca_components.npy").string());
    if (model.mean.size() != d || model.components.rows() != k || model.components.cols() != d ||
        model.explained_ratio.size() != k)
      throw DataError("PCA model in " + dir.string() + " has inconsistent shapes");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad pca.json: " + std::string(e.what()));
  }
  return model;
}

}  // namespace phonalign
