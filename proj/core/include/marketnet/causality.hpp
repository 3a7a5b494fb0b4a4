#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace marketnet {

inline constexpr double kSignificanceLevel = 0.05;

struct OlsFit {
  Eigen::VectorXd coefficients;
  double ssr = 0.0;
  bool jittered = false;  // normal matrix needed the 1e-10 ridge to factor
};

// Least squares via the normal equations and a Cholesky solve. Non-constant
// columns are centred and scaled when X carries an intercept column, which
// leaves the fitted values unchanged. Requires rows > cols. Throws
// InputError when the system cannot be factored even with the ridge.
OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Upper tail P(F_{d1,d2} > f) = I_{d2/(d2 + d1 f)}(d2/2, d1/2).
double f_pvalue(double f, double d1, double d2);

struct GrangerLag {
  std::size_t lag = 0;
  double f = 0.0;
  double p = 1.0;
  std::size_t df_num = 0;
  std::size_t df_den = 0;
  double ssr_restricted = 0.0;
  double ssr_unrestricted = 0.0;
  bool degenerate = false;  // unrestricted fit is exact; p reported as 0
};

struct GrangerResult {
  std::string variable;
  std::vector<GrangerLag> lags;
  std::size_t best_lag = 0;  // argmin p, smallest lag on ties
  std::size_t n_obs = 0;
  bool untestable = false;   // zero-variance input series
  std::string note;

  const GrangerLag& best() const { return lags.at(best_lag - 1); }
  bool significant(double alpha = kSignificanceLevel) const {
    return !untestable && best().p < alpha;
  }
};

// Does x Granger-cause y? For q = 1..max_lag, compares y ~ 1 + q own lags
// against y ~ 1 + q own lags + q lags of x on the last len - q samples.
// F = ((SSR_r - SSR_u) / q) / (SSR_u / (n - 2q - 1)). Requires equal lengths
// and len > 3 * max_lag + 3.
GrangerResult granger_test(std::span<const double> x, std::span<const double> y,
                           std::size_t max_lag, std::string variable = {});

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

// granger_test for every feature against the target, ordered by name.
std::vector<GrangerResult> scan_all(std::span<const NamedSeries> features,
                                    std::span<const double> target, std::size_t max_lag);

}  // namespace marketnet
