#include <gtest/gtest.h>

#include "../common/properties.hpp"

using namespace abe::testing;

namespace {

void expect_property(const PropertyReport& r) {
  EXPECT_GE(r.cases, kPropertyCases) << r.name;
  EXPECT_EQ(r.failures, 0u) << r.name << ": " << r.first_failure;
}

}  // namespace

TEST(Properties, DominanceLaws) { expect_property(prop_dominance_laws()); }
TEST(Properties, ArchiveInvariants) { expect_property(prop_archive()); }
TEST(Properties, WeightRowSums) { expect_property(prop_weight_rows()); }
TEST(Properties, PositionInBounds) { expect_property(prop_position_in_bounds()); }
TEST(Properties, ConstantFixedPoints) { expect_property(prop_constant_fixed_points()); }
TEST(Properties, SaScaleInvariance) { expect_property(prop_sa_scale_invariance()); }
TEST(Properties, WilcoxonSymmetry) { expect_property(prop_wilcoxon_symmetry()); }
TEST(Properties, WilcoxonExactVsNormal) { expect_property(prop_wilcoxon_exact_vs_normal()); }
TEST(Properties, DistanceMetric) { expect_property(prop_distance_metric()); }
TEST(Properties, EncodeDecode) { expect_property(prop_encode_decode()); }
TEST(Properties, VariantFlags) { expect_property(prop_variant_flags()); }
TEST(Properties, PreprocessIdempotent) { expect_property(prop_preprocess_idempotent()); }
