#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "marketnet/error.hpp"
#include "marketnet/returns.hpp"

using namespace marketnet;

namespace {

PricePanel panel_of(const Eigen::MatrixXd& prices) {
  PricePanel p;
  for (Eigen::Index c = 0; c < prices.cols(); ++c) p.tickers.push_back("T" + std::to_string(c));
  for (Eigen::Index r = 0; r < prices.rows(); ++r) p.timestamps.push_back({"t" + std::to_string(r), r, 2000});
  p.prices = prices;
  return p;
}

ReturnMatrix random_returns(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  ReturnMatrix r;
  r.values.resize(rows, cols);
  const double market_weight = 0.3 + 0.6 * static_cast<double>(seed % 7) / 7.0;
  for (Eigen::Index t = 0; t < rows; ++t) {
    const double m = z(gen);
    for (Eigen::Index c = 0; c < cols; ++c) r.values(t, c) = market_weight * m + z(gen);
  }
  for (Eigen::Index c = 0; c < cols; ++c) r.tickers.push_back("T" + std::to_string(c));
  return r;
}

// Two-pass textbook Pearson.
double pearson_oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sab += (a(i) - ma) * (b(i) - mb);
    saa += (a(i) - ma) * (a(i) - ma);
    sbb += (b(i) - mb) * (b(i) - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(LogReturns, ConstantPrice) {
  const ReturnMatrix r = log_returns(panel_of(Eigen::MatrixXd::Ones(3, 1)));
  ASSERT_EQ(r.rows(), 2u);
  EXPECT_EQ(r.values(0, 0), 0.0);
  EXPECT_EQ(r.values(1, 0), 0.0);
}

TEST(LogReturns, UnitLogStep) {
  Eigen::MatrixXd p(2, 1);
  p << 1.0, std::exp(1.0);
  EXPECT_NEAR(log_returns(panel_of(p)).values(0, 0), 1.0, 1e-15);
}

TEST(LogReturns, MatchesDirectRecomputation) {
  Eigen::MatrixXd p(3, 1);
  p << 100, 105, 102;
  const ReturnMatrix r = log_returns(panel_of(p));
  EXPECT_NEAR(r.values(0, 0), std::log(105.0 / 100.0), 1e-15);
  EXPECT_NEAR(r.values(1, 0), std::log(102.0 / 105.0), 1e-15);
  EXPECT_EQ(r.rows() + 1, 3u);
}

TEST(LogReturns, RejectsNonPositivePrices) {
  Eigen::MatrixXd p(2, 1);
  p << 1.0, 0.0;
  EXPECT_THROW(log_returns(panel_of(p)), InputError);
}

TEST(Correlation, SelfCorrelationIsOne) {
  const ReturnMatrix r = random_returns(1, 30, 1);
  EXPECT_NEAR(correlation_matrix(r).values(0, 0), 1.0, 1e-12);
}

TEST(Correlation, NegatedSeriesIsMinusOne) {
  ReturnMatrix r = random_returns(2, 25, 2);
  r.values.col(1) = -2.0 * r.values.col(0);
  EXPECT_NEAR(correlation_matrix(r).values(0, 1), -1.0, 1e-12);
}

TEST(Correlation, DegenerateColumn) {
  ReturnMatrix r = random_returns(3, 20, 3);
  r.values.col(1).setConstant(0.01);
  const CorrelationMatrix c = correlation_matrix(r);
  EXPECT_TRUE(c.degenerate[1]);
  EXPECT_FALSE(c.degenerate[0]);
  EXPECT_EQ(c.values(1, 1), 1.0);
  EXPECT_EQ(c.values(0, 1), 0.0);
  EXPECT_EQ(c.values(2, 1), 0.0);
}

TEST(Correlation, MatchesTwoPassOracleAndInvariants) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const ReturnMatrix r = random_returns(seed, 10 + static_cast<Eigen::Index>(seed), 6);
    const CorrelationMatrix c = correlation_matrix(r);
    for (Eigen::Index i = 0; i < 6; ++i) {
      EXPECT_NEAR(c.values(i, i), 1.0, 1e-12);
      for (Eigen::Index j = 0; j < 6; ++j) {
        EXPECT_NEAR(c.values(i, j), c.values(j, i), 1e-12);
        EXPECT_LE(std::abs(c.values(i, j)), 1.0 + 1e-12);
        if (i != j) EXPECT_NEAR(c.values(i, j), pearson_oracle(r.values.col(i), r.values.col(j)), 1e-12);
      }
    }
  }
}

TEST(Correlation, PopulationStandardDeviation) {
  ReturnMatrix r;
  r.tickers = {"A"};
  r.values.resize(4, 1);
  r.values << 1, 2, 3, 4;
  EXPECT_NEAR(correlation_matrix(r).stdevs(0), std::sqrt(1.25), 1e-15);
}

TEST(MaxEigenvalue, IdentityIsOne) {
  CorrelationMatrix c;
  c.values = Eigen::MatrixXd::Identity(5, 5);
  EXPECT_NEAR(max_eigenvalue(c), 1.0, 1e-10);
}

TEST(MaxEigenvalue, AllOnesIsN) {
  CorrelationMatrix c;
  c.values = Eigen::MatrixXd::Ones(7, 7);
  EXPECT_NEAR(max_eigenvalue(c), 7.0, 1e-10);
}

TEST(MaxEigenvalue, TwoByTwo) {
  CorrelationMatrix c;
  c.values.resize(2, 2);
  c.values << 1, 0.3, 0.3, 1;
  EXPECT_NEAR(max_eigenvalue(c), 1.3, 1e-10);
}

TEST(MaxEigenvalue, StartVectorOrthogonalToTopEigenvector) {
  // Top eigenvector (1, -1) is orthogonal to the all-ones start.
  CorrelationMatrix c;
  c.values.resize(2, 2);
  c.values << 1, -0.8, -0.8, 1;
  EXPECT_NEAR(max_eigenvalue(c), 1.8, 1e-9);
}

TEST(MaxEigenvalue, DenseOracleAndBounds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 19);
    const CorrelationMatrix c = correlation_matrix(random_returns(seed, 40, n));
    const double oracle = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c.values).eigenvalues().maxCoeff();
    const double lambda = max_eigenvalue(c);
    EXPECT_NEAR(lambda, oracle, 1e-7) << "seed " << seed;
    EXPECT_GE(lambda, 1.0 - 1e-9);
    EXPECT_LE(lambda, static_cast<double>(n) + 1e-9);
  }
}

TEST(MaxEigenvalue, GeneralSymmetricWithLargeNegativeEigenvalue) {
  Eigen::MatrixXd m(3, 3);
  m << -5, 0, 0, 0, 1, 0.5, 0, 0.5, 1;
  EXPECT_NEAR(max_eigenvalue_symmetric(m), 1.5, 1e-9);
}

TEST(MarketReturn, MeanOfStockMeans) {
  ReturnMatrix r;
  r.tickers = {"A", "B"};
  r.values.resize(2, 2);
  r.values << 0.1, 0.3, 0.3, -0.1;
  EXPECT_NEAR(market_log_return(r), 0.15, 1e-15);
  EXPECT_NEAR(mean_log_returns(r)(1), 0.1, 1e-15);
}

TEST(Correlation, CsvDumpHasTickerHeaders) {
  const CorrelationMatrix c = correlation_matrix(random_returns(5, 10, 2));
  std::ostringstream out;
  write_correlation_csv(out, c);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "ticker,T0,T1");
}
