#include "marketnet/causality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "marketnet/error.hpp"

namespace marketnet {
namespace {

bool is_constant(std::span<const double> v) {
  if (v.empty()) return true;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo == *hi;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) return h;
  }
  throw NonConvergenceError("incomplete beta continued fraction", kMaxIterations, 0.0);
}

GrangerLag granger_lag(std::span<const double> x, std::span<const double> y, std::size_t q) {
  const std::size_t len = y.size();
  const std::size_t n = len - q;
  const auto rows = static_cast<Eigen::Index>(n);
  const auto lag_cols = static_cast<Eigen::Index>(q);

  Eigen::MatrixXd unrestricted(rows, 1 + 2 * lag_cols);
  Eigen::VectorXd target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t t = static_cast<std::size_t>(r) + q;
    target[r] = y[t];
    unrestricted(r, 0) = 1.0;
    for (Eigen::Index k = 1; k <= lag_cols; ++k) {
      unrestricted(r, k) = y[t - static_cast<std::size_t>(k)];
      unrestricted(r, lag_cols + k) = x[t - static_cast<std::size_t>(k)];
    }
  }
  const Eigen::MatrixXd restricted = unrestricted.leftCols(1 + lag_cols);

  GrangerLag out;
  out.lag = q;
  out.df_num = q;
  out.df_den = n - 2 * q - 1;
  out.ssr_restricted = ols_fit(restricted, target).ssr;
  out.ssr_unrestricted = ols_fit(unrestricted, target).ssr;

  const double total = (target.array() - target.mean()).square().sum();
  if (out.ssr_unrestricted <= 1e-14 * total) {
    out.degenerate = true;
    out.f = std::numeric_limits<double>::infinity();
    out.p = 0.0;
    return out;
  }
  const double gain = std::max(0.0, out.ssr_restricted - out.ssr_unrestricted);
  out.f = (gain / static_cast<double>(q)) / (out.ssr_unrestricted / static_cast<double>(out.df_den));
  out.p = f_pvalue(out.f, static_cast<double>(out.df_num), static_cast<double>(out.df_den));
  return out;
}

}  // namespace

OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) throw InputError("ols_fit: design and target row counts differ");
  if (n <= p) throw InputError("ols_fit: needs more rows than columns");
  if (!X.allFinite() || !y.allFinite()) throw InputError("ols_fit: non-finite input");

  Eigen::Index intercept = -1;
  for (Eigen::Index j = 0; j < p && intercept < 0; ++j) {
    if ((X.col(j).array() == 1.0).all()) intercept = j;
  }

  // Z = (X - shift) / scale column-wise; the fitted values are unchanged.
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j == intercept) continue;
    if (intercept >= 0) {
      const double mean = X.col(j).mean();
      const double spread = std::sqrt((X.col(j).array() - mean).square().mean());
      if (spread > 0.0) {
        shift[j] = mean;
        scale[j] = spread;
      }
    } else {
      const double norm = X.col(j).norm();
      if (norm > 0.0) scale[j] = norm;
    }
  }
  Eigen::MatrixXd Z = X;
  for (Eigen::Index j = 0; j < p; ++j) Z.col(j) = (X.col(j).array() - shift[j]) / scale[j];

  Eigen::MatrixXd normal = Z.transpose() * Z;
  const Eigen::VectorXd rhs = Z.transpose() * y;
  OlsFit fit;
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13)) {
    const double jitter = 1e-10 * std::max(1.0, normal.diagonal().mean());
    normal.diagonal().array() += jitter;
    llt.compute(normal);
    fit.jittered = true;
    if (llt.info() != Eigen::Success) throw InputError("ols_fit: design matrix is rank deficient");
  }
  const Eigen::VectorXd gamma = llt.solve(rhs);
  if (!gamma.allFinite()) throw InputError("ols_fit: design matrix is rank deficient");

  fit.ssr = (y - Z * gamma).squaredNorm();
  fit.coefficients.resize(p);
  double intercept_adjust = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.coefficients[j] = gamma[j] / scale[j];
    intercept_adjust += fit.coefficients[j] * shift[j];
  }
  if (intercept >= 0) fit.coefficients[intercept] -= intercept_adjust;
  return fit;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InputError("incomplete_beta: parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw InputError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_pvalue(double f, double d1, double d2) {
  if (!(d1 >= 1.0) || !(d2 >= 1.0)) throw InputError("f_pvalue: degrees of freedom must be >= 1");
  if (std::isnan(f) || f < 0.0) throw InputError("f_pvalue: statistic must be non-negative");
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double x = d2 / (d2 + d1 * f);
  return std::clamp(incomplete_beta(0.5 * d2, 0.5 * d1, x), 0.0, 1.0);
}

GrangerResult granger_test(std::span<const double> x, std::span<const double> y, std::size_t max_lag,
                           std::string variable) {
  if (x.size() != y.size()) throw InputError("granger_test: series lengths differ for " + variable);
  if (max_lag < 1) throw InputError("granger_test: max_lag must be at least 1");
  if (y.size() <= 3 * max_lag + 3) {
    throw InputError("granger_test: series length " + std::to_string(y.size()) + " must exceed 3 * max_lag + 3 = " +
                     std::to_string(3 * max_lag + 3));
  }
  GrangerResult result;
  result.variable = std::move(variable);
  result.n_obs = y.size();
  if (is_constant(x) || is_constant(y)) {
    result.untestable = true;
    result.note = is_constant(x) ? "constant regressor series" : "constant target series";
    return result;
  }
  for (std::size_t q = 1; q <= max_lag; ++q) result.lags.push_back(granger_lag(x, y, q));
  result.best_lag = 1;
  for (const GrangerLag& lag : result.lags) {
    if (lag.p < result.best().p) result.best_lag = lag.lag;
  }
  return result;
}

std::vector<GrangerResult> scan_all(std::span<const NamedSeries> features, std::span<const double> target,
                                    std::size_t max_lag) {
  std::vector<GrangerResult> results;
  results.reserve(features.size());
  for (const NamedSeries& feature : features) {
    results.push_back(granger_test(feature.values, target, max_lag, feature.name));
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const GrangerResult& a, const GrangerResult& b) { return a.variable < b.variable; });
  return results;
}

}  // namespace marketnet
