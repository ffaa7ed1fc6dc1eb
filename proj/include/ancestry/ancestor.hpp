#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include <json.hpp>

#include "ancestry/linreg.hpp"
#include "ancestry/timeseries.hpp"

namespace ancestry {

// sign(u) * |u|^alpha, the test nonlinearity. Requires alpha > 1; the
// default used throughout is alpha = 3.
double nonlinearity(double u, double alpha);

inline constexpr double kDefaultExponent = 3.0;

// Pluggable transform applied to the response residuals. Only the sign-power
// monomials are exercised by the test suites.
using Nonlinearity = std::function<double(double)>;
Nonlinearity monomial_nonlinearity(double exponent);

double standard_normal_cdf(double x);

// Two-sided p-value 2 * (1 - Phi(|z|)), clamped below at 1e-300.
double two_sided_normal_p(double z);

// Design matrix of stacked lags. Row for time t (0-based, t in
// [t_first, t_last]) holds (x_{t-s}, x_{t-s-1}, ..., x_{t-s-p+1})
// concatenated, giving d*p columns.
Eigen::MatrixXd lagged_design(const TimeSeries& x, int p, int start_lag,
                              Eigen::Index t_first, Eigen::Index t_last);

// Residuals of x_{t,k} on the lag block starting tau + 1 steps back, for all
// k at once. Rows cover times p+tau .. T-1; for tau = 0 these estimate the
// reduced-form innovations.
Eigen::MatrixXd xi_residuals(const TimeSeries& x, int p, int tau, bool center = true,
                             double rank_tol = kDefaultRankTol);

// Residuals of x_{t,k} on the contemporaneous other series plus all p lags of
// every series. Rows cover times p .. T-1.
Eigen::MatrixXd z_residuals(const TimeSeries& x, int p, bool center = true,
                            double rank_tol = kDefaultRankTol);

// One directed hypothesis "source is a lag-`lag` ancestor of target".
struct AncestorTest {
  int source = 0;  // k, 0-based
  int target = 0;  // j, 0-based
  int lag = 0;     // tau
  double beta = 0.0;
  double var_beta = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  Eigen::Index n_used = 0;  // T - p - lag
};

// Regresses the nonlinear transform of the lag-tau innovation residual of the
// target on all lag-0 innovation residuals (response at t + tau pairs with
// predictors at t) and returns one test record per source series, including
// the diagonal source == target entry.
std::vector<AncestorTest> ancestor_test(const TimeSeries& x, int p, int target, int lag,
                                        double exponent = kDefaultExponent,
                                        bool center = true,
                                        double rank_tol = kDefaultRankTol);
std::vector<AncestorTest> ancestor_test(const TimeSeries& x, int p, int target, int lag,
                                        const Nonlinearity& transform,
                                        bool center = true,
                                        double rank_tol = kDefaultRankTol);

// All off-diagonal tests: d * (d - 1) * (p + 1) records in
// (target, lag, source) order.
struct EdgePValueTensor {
  int d = 0;
  int p = 0;
  std::vector<AncestorTest> tests;

  const AncestorTest& test(int source, int target, int lag) const;
  double p_value(int source, int target, int lag) const {
    return test(source, target, lag).p_value;
  }
};

EdgePValueTensor all_pairs_tests(const TimeSeries& x, int p,
                                 double exponent = kDefaultExponent,
                                 bool center = true,
                                 double rank_tol = kDefaultRankTol);
EdgePValueTensor all_pairs_tests(const TimeSeries& x, int p,
                                 const Nonlinearity& transform, bool center = true,
                                 double rank_tol = kDefaultRankTol);

struct TargetDecision {
  AncestorTest test;
  double p_corrected = 1.0;
  bool detected = false;
};

// Holm-corrected decisions over the (d - 1) * (p + 1) hypotheses pointing at
// one target, in (lag, source) order.
struct TargetAnalysis {
  int target = 0;
  double alpha = 0.05;
  std::vector<TargetDecision> decisions;
};

TargetAnalysis target_analysis(const EdgePValueTensor& tensor, int target, double alpha);
TargetAnalysis target_analysis(const TimeSeries& x, int p, int target, double alpha,
                               double exponent = kDefaultExponent, bool center = true,
                               double rank_tol = kDefaultRankTol);

// JSON row with keys k, j, tau (1-based series indices), beta, se, z, p.
nlohmann::json to_json(const AncestorTest& test);
nlohmann::json to_json(const TargetAnalysis& analysis);

}  // namespace ancestry
