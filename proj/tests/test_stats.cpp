#include <gtest/gtest.h>

#include <vector>

#include "ntfdm/stats.hpp"

using namespace ntfdm;

TEST(Stats, MeanAndUnbiasedVariance) {
  const std::vector<double> x = {2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(stats::mean(x), 5.0);
  EXPECT_DOUBLE_EQ(stats::variance(x), 32.0 / 7.0);
  EXPECT_DOUBLE_EQ(stats::central_moment(x, 2), 4.0);
}

TEST(Stats, VarianceOfShortInputIsZero) {
  EXPECT_EQ(stats::variance(std::vector<double>{3.0}), 0.0);
  EXPECT_EQ(stats::variance(std::vector<double>{}), 0.0);
}

TEST(Stats, QuantileInterpolatesOrderStatistics) {
  const std::vector<double> x = {4, 1, 3, 2, 5};
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(stats::median(x), 3.0);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.1), 1.4);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.75), 4.0);
}

TEST(Stats, QuantileOfEmptyThrows) {
  EXPECT_THROW(stats::quantile(std::vector<double>{}, 0.5), SizeError);
}
