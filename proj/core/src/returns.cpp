#include "marketnet/returns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "marketnet/error.hpp"

namespace marketnet {
namespace {

struct PowerResult {
  double value = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Rayleigh-quotient power iteration on a positive semi-definite matrix.
PowerResult power_iterate(const Eigen::MatrixXd& m, Eigen::VectorXd x, const PowerIterationOptions& options) {
  PowerResult result;
  x.normalize();
  double previous = x.dot(m * x);
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    Eigen::VectorXd next = m * x;
    const double norm = next.norm();
    result.iterations = it;
    if (norm == 0.0) {
      // x lies in the null space; 0 is an eigenvalue and a valid lower bound.
      result.value = 0.0;
      result.converged = true;
      return result;
    }
    x = next / norm;
    const Eigen::VectorXd mx = m * x;
    const double rayleigh = x.dot(mx);
    result.value = rayleigh;
    result.residual = (mx - rayleigh * x).norm();
    if (std::abs(rayleigh - previous) <= options.relative_tolerance * std::max(std::abs(rayleigh), 1e-300)) {
      result.converged = true;
      return result;
    }
    previous = rayleigh;
  }
  return result;
}

// Runs from the all-ones vector and from a graded vector; the all-ones start
// is exactly orthogonal to the dominant direction for some sign patterns
// (e.g. a series and its negation).
double dominant_psd_eigenvalue(const Eigen::MatrixXd& m, const PowerIterationOptions& options) {
  const Eigen::Index n = m.rows();
  if (n == 0) throw InputError("eigenvalue of an empty matrix");
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd graded(n);
  for (Eigen::Index i = 0; i < n; ++i) graded[i] = 1.0 + static_cast<double>(i + 1) / static_cast<double>(n + 1);

  double best = -std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& start : {ones, graded}) {
    const PowerResult r = power_iterate(m, start, options);
    if (!r.converged) {
      throw NonConvergenceError("power iteration for the largest eigenvalue did not converge", r.iterations,
                                r.residual);
    }
    best = std::max(best, r.value);
  }
  return best;
}

}  // namespace

ReturnMatrix log_returns(const PricePanel& panel) {
  if (panel.rows() < 2) throw InputError("log returns need at least two timestamps");
  if (!(panel.prices.array() > 0.0).all() || !panel.prices.allFinite()) {
    throw InputError("log returns need strictly positive, finite prices");
  }
  ReturnMatrix out;
  out.tickers = panel.tickers;
  const Eigen::MatrixXd logs = panel.prices.array().log().matrix();
  const Eigen::Index rows = logs.rows() - 1;
  out.values = logs.bottomRows(rows) - logs.topRows(rows);
  return out;
}

CorrelationMatrix correlation_matrix(const ReturnMatrix& returns) {
  if (returns.rows() < 2) throw InputError("correlation needs at least two return rows");
  const Eigen::Index n = returns.values.cols();
  const double count = static_cast<double>(returns.rows());

  CorrelationMatrix corr;
  corr.tickers = returns.tickers;
  corr.stdevs.resize(n);
  corr.degenerate.assign(static_cast<std::size_t>(n), false);

  const Eigen::RowVectorXd means = returns.values.colwise().mean();
  const Eigen::MatrixXd centred = returns.values.rowwise() - means;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto column = returns.values.col(i);
    corr.degenerate[static_cast<std::size_t>(i)] = column.minCoeff() == column.maxCoeff();
    corr.stdevs[i] = std::sqrt(centred.col(i).squaredNorm() / count);
  }

  const Eigen::MatrixXd cov = (centred.transpose() * centred) / count;
  corr.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    corr.values(i, i) = 1.0;
    if (corr.degenerate[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (corr.degenerate[static_cast<std::size_t>(j)]) continue;
      const double c = std::clamp(cov(i, j) / (corr.stdevs[i] * corr.stdevs[j]), -1.0, 1.0);
      corr.values(i, j) = c;
      corr.values(j, i) = c;
    }
  }
  return corr;
}

double max_eigenvalue(const CorrelationMatrix& corr, const PowerIterationOptions& options) {
  return dominant_psd_eigenvalue(corr.values, options);
}

double max_eigenvalue_symmetric(const Eigen::MatrixXd& matrix, const PowerIterationOptions& options) {
  if (matrix.rows() != matrix.cols()) throw InputError("eigenvalue of a non-square matrix");
  double shift = 0.0;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const double radius = matrix.row(i).cwiseAbs().sum() - std::abs(matrix(i, i));
    shift = std::max(shift, -(matrix(i, i) - radius));
  }
  Eigen::MatrixXd shifted = matrix;
  shifted.diagonal().array() += shift;
  return dominant_psd_eigenvalue(shifted, options) - shift;
}

Eigen::VectorXd mean_log_returns(const ReturnMatrix& returns) {
  if (returns.rows() == 0) throw InputError("mean log return of an empty window");
  return returns.values.colwise().mean().transpose();
}

double market_log_return(const ReturnMatrix& returns) { return mean_log_returns(returns).mean(); }

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& corr) {
  const auto precision = out.precision(17);
  out << "ticker";
  for (const auto& t : corr.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < corr.size(); ++i) {
    out << corr.tickers[i];
    for (std::size_t j = 0; j < corr.size(); ++j) {
      out << ',' << corr.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace marketnet
