#include <sstream>

#include <gtest/gtest.h>

#include "fbrrt/basis.hpp"
#include "support.hpp"

namespace fbrrt {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ChebyshevBasis unit_basis(int n) { return {Vector::Zero(n), Vector::Ones(n)}; }

TEST(Chebyshev, FeatureCount) {
  EXPECT_EQ(ChebyshevBasis::feature_count(1), 3);
  EXPECT_EQ(ChebyshevBasis::feature_count(2), 6);
  EXPECT_EQ(ChebyshevBasis::feature_count(4), 15);
  EXPECT_EQ(ChebyshevBasis::feature_count(8), 45);
}

TEST(Chebyshev, FeatureExamples) {
  EXPECT_EQ(unit_basis(1).features(vec({0})), vec({1, 0, -1}));
  EXPECT_EQ(unit_basis(1).features(vec({1})), vec({1, 1, 1}));
  EXPECT_EQ(unit_basis(2).features(vec({0.5, -0.5})), vec({1, 0.5, -0.5, -0.5, -0.5, -0.25}));
}

TEST(Chebyshev, FeaturesAtOffset) {
  const ChebyshevBasis b(vec({1, -2, 3, 0.5}), vec({2, 1, 0.5, 4}));
  const Vector phi = b.features(b.offset());
  EXPECT_EQ(phi(0), 1.0);
  EXPECT_TRUE(phi.segment(1, 4).isZero(0.0));
  EXPECT_TRUE((phi.segment(5, 4).array() == -1.0).all());
  EXPECT_TRUE(phi.tail(6).isZero(0.0));
}

TEST(Chebyshev, FeatureNamesMatchOrder) {
  const auto names = unit_basis(3).feature_names();
  ASSERT_EQ(names.size(), 10u);
  EXPECT_EQ(names[0], "1");
  EXPECT_EQ(names[1], "z1");
  EXPECT_EQ(names[4], "T2(z1)");
  EXPECT_EQ(names[7], "z1*z2");
  EXPECT_EQ(names[8], "z1*z3");
  EXPECT_EQ(names[9], "z2*z3");
}

TEST(Chebyshev, RejectsBadInput) {
  EXPECT_THROW(unit_basis(2).features(vec({0, std::nan("")})), std::invalid_argument);
  EXPECT_THROW(ChebyshevBasis(vec({0}), vec({0})), std::invalid_argument);
  EXPECT_THROW(ChebyshevBasis(vec({0}), vec({-1})), std::invalid_argument);
}

TEST(Chebyshev, FromRegionMapsToUnitCube) {
  const Box roi{vec({-2, 0}), vec({2, 10})};
  const ChebyshevBasis b = ChebyshevBasis::from_region(roi);
  const Vector lo = b.features(roi.lower), hi = b.features(roi.upper);
  EXPECT_DOUBLE_EQ(lo(1), -1.0);
  EXPECT_DOUBLE_EQ(lo(2), -1.0);
  EXPECT_DOUBLE_EQ(hi(1), 1.0);
  EXPECT_DOUBLE_EQ(hi(2), 1.0);
}

TEST(Chebyshev, ConstantAndLinearModels) {
  const ChebyshevBasis c = unit_basis(3);
  Vector e1 = Vector::Zero(c.num_features());
  e1(0) = 1.0;
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const Vector x = testing::normal_vector(3, 2.0, rng);
    EXPECT_EQ(c.value(e1, x), 1.0);
    EXPECT_TRUE(c.gradient(e1, x).isZero(0.0));
  }
  const ChebyshevBasis b(vec({0}), vec({2}));
  for (double x : {-3.0, 0.0, 0.7, 5.0}) EXPECT_DOUBLE_EQ(b.gradient(vec({0, 1, 0}), vec({x}))(0), 0.5);
}

class GradientVsFiniteDifference : public ::testing::TestWithParam<int> {};

TEST_P(GradientVsFiniteDifference, CentralDifferences) {
  const int n = GetParam();
  Rng rng(100 + n);
  Vector offset = testing::normal_vector(n, 1.0, rng);
  Vector scale = (testing::normal_vector(n, 1.0, rng).array().abs() + 0.5).matrix();
  const ChebyshevBasis b(offset, scale);
  const Vector alpha = testing::normal_vector(b.num_features(), 1.0, rng);
  const double h = 1e-5;
  for (int k = 0; k < 100; ++k) {
    const Vector x = offset + testing::normal_vector(n, 1.0, rng).cwiseProduct(scale);
    const Vector g = b.gradient(alpha, x);
    for (int j = 0; j < n; ++j) {
      Vector xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const double fd = (b.value(alpha, xp) - b.value(alpha, xm)) / (2 * h);
      EXPECT_NEAR(g(j), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "n=" << n << " j=" << j;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dimensions, GradientVsFiniteDifference, ::testing::Values(1, 2, 4, 8));

TEST(ValueModel, DefinedMaskAndErrors) {
  ValueModel m(unit_basis(2), 5);
  EXPECT_EQ(m.num_steps(), 5);
  EXPECT_TRUE(m.empty());
  EXPECT_FALSE(m.defined(3));
  EXPECT_THROW(m.value(3, vec({0, 0})), std::out_of_range);
  EXPECT_THROW(m.set(3, Vector::Zero(5)), std::invalid_argument);
  EXPECT_THROW(m.set(6, Vector::Zero(6)), std::out_of_range);
  Vector bad = Vector::Zero(6);
  bad(2) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(m.set(3, bad), std::invalid_argument);
  m.set(3, Vector::Ones(6));
  EXPECT_TRUE(m.defined(3));
  EXPECT_FALSE(m.empty());
  EXPECT_DOUBLE_EQ(m.value(3, vec({0.5, -0.5})), 1 + 0.5 - 0.5 - 0.5 - 0.5 - 0.25);
  m.clear(3);
  EXPECT_TRUE(m.empty());
}

TEST(ValueModel, CsvRoundTrip) {
  ValueModel m(ChebyshevBasis(vec({0.1, -0.3}), vec({1.7, 0.2})), 4);
  Rng rng(9);
  for (int i : {1, 2, 4}) m.set(i, testing::normal_vector(6, 1.0, rng));
  std::stringstream ss;
  write_model_csv(ss, m);
  const ValueModel back = read_model_csv(ss);
  EXPECT_EQ(back.num_steps(), 4);
  EXPECT_EQ(back.basis().offset(), m.basis().offset());
  EXPECT_EQ(back.basis().scale(), m.basis().scale());
  EXPECT_FALSE(back.defined(0));
  EXPECT_FALSE(back.defined(3));
  for (int i : {1, 2, 4}) EXPECT_EQ(back.coefficients(i), m.coefficients(i));
}

}  // namespace
}  // namespace fbrrt
