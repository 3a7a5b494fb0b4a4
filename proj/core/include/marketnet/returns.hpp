#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "marketnet/ingest.hpp"

namespace marketnet {

// Log-returns, rows = consecutive timestamp pairs, columns = tickers.
struct ReturnMatrix {
  std::vector<std::string> tickers;
  Eigen::MatrixXd values;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

// Pearson correlation of log-returns over one window.
struct CorrelationMatrix {
  std::vector<std::string> tickers;
  Eigen::MatrixXd values;
  Eigen::VectorXd stdevs;         // population standard deviations
  std::vector<bool> degenerate;   // zero-variance columns

  std::size_t size() const { return tickers.size(); }
};

// values(t, i) = ln P_i(t+1) - ln P_i(t). Needs at least two timestamps and
// strictly positive prices.
ReturnMatrix log_returns(const PricePanel& panel);

// Population-moment Pearson correlation. Zero-variance columns keep a unit
// diagonal, zero off-diagonal entries and are flagged degenerate.
CorrelationMatrix correlation_matrix(const ReturnMatrix& returns);

struct PowerIterationOptions {
  double relative_tolerance = 1e-10;
  std::size_t max_iterations = 10000;
};

// Largest eigenvalue of a correlation matrix (positive semi-definite) by
// power iteration. Throws NonConvergenceError when the Rayleigh quotient
// has not settled within max_iterations.
double max_eigenvalue(const CorrelationMatrix& corr, const PowerIterationOptions& options = {});

// Largest (algebraic) eigenvalue of an arbitrary symmetric matrix. The
// matrix is shifted by its Gershgorin lower bound so that power iteration
// cannot lock onto a large negative eigenvalue.
double max_eigenvalue_symmetric(const Eigen::MatrixXd& matrix,
                                const PowerIterationOptions& options = {});

// Mean over stocks of each stock's mean log-return in the window.
double market_log_return(const ReturnMatrix& returns);

// Per-stock mean log-return over the window.
Eigen::VectorXd mean_log_returns(const ReturnMatrix& returns);

// CSV dump with ticker row and column headers.
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& corr);

}  // namespace marketnet
