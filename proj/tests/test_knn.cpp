#include "phonalign/knn.hpp"
#include "phonalign/pipeline.hpp"

#include <gtest/gtest.h>

#include "testdata.hpp"

using namespace phonalign;

namespace {

// 30 points on a 0.1 grid; rows 6 and 25 coincide. Neighbours and votes for the query
// (0.5, -0.2) were computed with numpy (stable argsort of squared distances).
const double kPoints[30][2] = {
    {-1.6, -0.4}, {-2.4, 0.6}, {1.7, 2.2},   {-1, -2.3},   {-0.6, 0.5},  {-1.5, 0.9}, {2.4, -0.7}, {-0.1, 1.6},
    {0.7, 1.5},   {0, 2.3},    {-2.1, 0.6},  {-2.4, 2.8},  {-0.4, -2.3}, {2.4, 2.6},  {-1.6, -1.1}, {-1.9, -0.7},
    {-0.1, -1.2}, {-1, -1.4},  {-2.3, -2.1}, {2.9, -1.9},  {2, 2.4},     {0.8, 1.1},  {-1.2, -2},  {2.7, -1.4},
    {2.6, 1.8},   {2.4, -0.7}, {-0.5, -0.3}, {-2, -0.4},   {-2.3, 0.8},  {-1.6, -0.3}};
const PhoneId kLabels[30] = {0, 1, 0, 0, 1, 2, 0, 2, 1, 2, 1, 1, 2, 1, 0, 0, 1, 1, 0, 1, 2, 1, 1, 1, 1, 2, 1, 1, 0, 2};

KnnClassifier fixture_classifier(int k) {
  RowMatrixD x(30, 2);
  for (int i = 0; i < 30; ++i) x.row(i) << kPoints[i][0], kPoints[i][1];
  return fit_knn(x, std::vector<PhoneId>(std::begin(kLabels), std::end(kLabels)), PhoneInventory({"a", "b", "c"}), k);
}

}  // namespace

TEST(Knn, ThirtyPointFixture) {
  const auto clf = fixture_classifier(10);
  const double q[2] = {0.5, -0.2};
  const auto nn = nearest_neighbors(clf, q);
  std::vector<Eigen::Index> idx;
  for (const auto& n : nn) idx.push_back(n.index);
  EXPECT_EQ(idx, (std::vector<Eigen::Index>{26, 16, 4, 21, 8, 7, 17, 6, 25, 29}));
  EXPECT_NEAR(nn.front().distance2, 1.01, 1e-12);
  EXPECT_NEAR(nn.back().distance2, 4.42, 1e-12);

  RowMatrixD query(1, 2);
  query << 0.5, -0.2;
  const auto pg = predict_posteriorgram(clf, query, 0.02);
  EXPECT_DOUBLE_EQ(pg.probs(0, 0), 0.1);
  EXPECT_DOUBLE_EQ(pg.probs(0, 1), 0.6);
  EXPECT_DOUBLE_EQ(pg.probs(0, 2), 0.3);
}

TEST(Knn, DistanceTiesGoToLowerIndex) {
  // k=8 cuts between rows 6 and 25, which are equidistant from the query.
  const double q[2] = {0.5, -0.2};
  const auto nn = nearest_neighbors(fixture_classifier(8), q);
  EXPECT_EQ(nn.back().index, 6);
}

TEST(Knn, SingleClassAndSelfQuery) {
  RowMatrixD x = RowMatrixD::Random(20, 3);
  const auto one_class = fit_knn(x, std::vector<PhoneId>(20, 1), PhoneInventory({"x", "AA"}), 10);
  const auto pg = predict_posteriorgram(one_class, RowMatrixD::Random(7, 3), 0.02);
  EXPECT_TRUE((pg.probs.col(1).array() == 1.0).all());
  EXPECT_TRUE((pg.probs.col(0).array() == 0.0).all());

  std::vector<PhoneId> y(20);
  for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i)] = i % 4;
  const auto k1 = fit_knn(x, y, testutil::numbered_inventory(4), 1);
  const auto self = predict_posteriorgram(k1, x, 0.02);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(self.probs(i, i % 4), 1.0);
}

TEST(Knn, FitErrors) {
  const RowMatrixD x = RowMatrixD::Random(5, 2);
  const std::vector<PhoneId> y(5, 0);
  const PhoneInventory inv({"a"});
  EXPECT_THROW(fit_knn(x, y, inv, 0), DataError);
  EXPECT_THROW(fit_knn(x, y, inv, 6), DataError);
  EXPECT_THROW(fit_knn(x, std::vector<PhoneId>(4, 0), inv, 1), DataError);
  EXPECT_THROW(fit_knn(x, std::vector<PhoneId>(5, 1), inv, 1), DataError);
  const auto clf = fit_knn(x, y, inv, 5);
  EXPECT_EQ(clf.size(), 5);
  EXPECT_THROW(predict_posteriorgram(clf, RowMatrixD::Random(3, 3), 0.02), DataError);
}

TEST(Knn, DuplicateRowsAreKept) {
  RowMatrixD x(4, 1);
  x << 0, 0, 0, 5;
  const auto clf = fit_knn(x, {0, 1, 1, 0}, PhoneInventory({"a", "b"}), 3);
  EXPECT_EQ(clf.size(), 4);
  RowMatrixD q(1, 1);
  q << 0.0;
  const auto pg = predict_posteriorgram(clf, q, 0.02);
  EXPECT_DOUBLE_EQ(pg.probs(0, 1), 2.0 / 3.0);
}

TEST(Knn, MatchesExhaustiveOracleBitwise) {
  Rng rng(2718);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = testutil::random_knn_instance(rng, 400, 40, 20);
    const auto clf = fit_knn(inst.train, inst.labels, testutil::numbered_inventory(inst.classes), inst.k);
    const auto pg = predict_posteriorgram(clf, inst.queries, 0.02, 0.0, 1 + trial % 3);
    const auto train = testutil::to_dense(inst.train);
    for (Eigen::Index q = 0; q < inst.queries.rows(); ++q) {
      const std::vector<double> query(inst.queries.row(q).begin(), inst.queries.row(q).end());
      const auto expect = oracle::knn(train, query, static_cast<std::size_t>(inst.k));
      const auto got = nearest_neighbors(clf, query);
      ASSERT_EQ(got.size(), expect.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].index, static_cast<Eigen::Index>(expect[i].second));
        EXPECT_EQ(got[i].distance2, expect[i].first);
      }
      const auto votes = oracle::vote_fractions(expect, inst.labels, static_cast<std::size_t>(inst.classes),
                                                static_cast<std::size_t>(inst.k));
      double sum = 0.0;
      for (int c = 0; c < inst.classes; ++c) {
        EXPECT_EQ(pg.probs(q, c), votes[static_cast<std::size_t>(c)]);
        sum += pg.probs(q, c);
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(Knn, PermutationOnlyAffectsTies) {
  Rng rng(8);
  RowMatrixD x(200, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  std::vector<PhoneId> y(200);
  for (auto& v : y) v = static_cast<PhoneId>(rng.below(4));
  std::vector<Eigen::Index> perm(200);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  RowMatrixD xp(200, 5);
  std::vector<PhoneId> yp(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yp[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  RowMatrixD q(50, 5);
  for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = rng.normal();
  const auto inv = testutil::numbered_inventory(4);
  EXPECT_EQ(predict_posteriorgram(fit_knn(x, y, inv, 7), q, 0.02).probs,
            predict_posteriorgram(fit_knn(xp, yp, inv, 7), q, 0.02).probs);
}

TEST(Knn, SaveLoadIsExact) {
  testutil::TempDir dir("knn");
  const auto clf = fixture_classifier(7);
  save_knn(clf, dir.path());
  const auto back = load_knn(dir.path());
  EXPECT_EQ(back.train_X, clf.train_X);
  EXPECT_EQ(back.train_y, clf.train_y);
  EXPECT_EQ(back.k, 7);
  EXPECT_EQ(back.inventory, clf.inventory);

  auto meta = read_file(dir / "knn.json");
  meta.replace(meta.find("\"version\": 1"), 12, "\"version\": 2");
  write_file(dir / "knn.json", meta);
  EXPECT_THROW(load_knn(dir.path()), Error);
}
