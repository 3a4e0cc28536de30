#include "check_list.hpp"

using namespace abe;
using namespace abe::testing;

TEST(Core, WorkedExamples) { expect_all(core_examples); }

TEST(Core, MaskEncoding) {
  const auto m = FeatureMask::from_integer(5, 4);
  EXPECT_EQ(m.to_string(), "0101");
  EXPECT_FALSE(m[0]);
  EXPECT_TRUE(m[1]);
  EXPECT_TRUE(m[3]);
  EXPECT_EQ(FeatureMask::all(3).value(), 7u);
}

TEST(Core, LoocvNeighborsMatchRetrieve) {
  const auto ds = load_standard("synthetic/albrecht_like.csv", "Effort");
  const LoocvNeighbors nb(ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto train = ds.without(i);
    const auto direct = retrieve(train, ds.project(i), train.size());
    const auto pre = nb.of(i);
    ASSERT_EQ(pre.size(), direct.size());
    for (std::size_t r = 0; r < pre.size(); ++r) {
      const std::size_t mapped = direct[r].index < i ? direct[r].index : direct[r].index + 1;
      EXPECT_EQ(pre[r].index, mapped) << "project " << i << " rank " << r;
      EXPECT_EQ(pre[r].distance, direct[r].distance);
    }
  }
}

TEST(Core, PredictionMatchesNaiveOracleOnRealisticData) {
  const auto ds = load_standard("synthetic/small8.csv", "effort");
  const auto rows = rows_of(ds);
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t i = rng.below(ds.size());
    const auto train = ds.without(i);
    const std::size_t k = 1 + rng.below(train.size());
    const std::uint64_t v = 1 + rng.below(15);
    std::vector<std::vector<double>> w(train.size(), std::vector<double>(4));
    std::vector<double> flat;
    for (auto& r : w) {
      for (double& x : r) x = rng.uniform();
      flat.insert(flat.end(), r.begin(), r.end());
    }
    SolutionVector sol{k, FeatureMask::from_integer(v, 4), WeightMatrix(train.size(), 4, flat)};
    const auto train_rows = rows_of(train);
    std::vector<double> effs;
    for (std::size_t j = 0; j < train.size(); ++j) effs.push_back(train.effort(j));
    EXPECT_NEAR(predict_adapted(train, ds.project(i), sol), naive_predict(train_rows, effs, rows[i], k, mask_bits(v, 4), w),
                1e-9);
  }
}

TEST(Core, PredictionFloorsAtTinyPositive) {
  const auto train = numeric_dataset({{1.0}, {0.9}}, {1e-3, 2e-3});
  SolutionVector sol{1, FeatureMask::all(1), WeightMatrix(2, 1, 1.0)};
  const double t[] = {0.0};
  EXPECT_EQ(predict_adapted(train, {t, 0}, sol), kEffortFloor);
}

TEST(Core, SolutionShapeChecks) {
  const auto train = numeric_dataset({{0.0}, {1.0}}, {1, 2});
  const double t[] = {0.5};
  EXPECT_THROW(predict_adapted(train, {t, 0}, SolutionVector{3, FeatureMask::all(1), WeightMatrix(3, 1, 1.0)}),
               BoundsError);
  EXPECT_THROW(predict_adapted(train, {t, 0}, SolutionVector{2, FeatureMask::all(1), WeightMatrix(1, 1, 1.0)}),
               InvalidArgument);
}
