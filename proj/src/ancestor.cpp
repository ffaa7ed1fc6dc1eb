#include "ancestry/ancestor.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ancestry/multiplicity.hpp"

namespace ancestry {

namespace {

Eigen::MatrixXd centered_data(const TimeSeries& x, bool center) {
  Eigen::MatrixXd data = x.data;
  if (center) data.rowwise() -= data.colwise().mean();
  return data;
}

// Core of lagged_design working on a plain (possibly centered) matrix.
Eigen::MatrixXd lag_block(const Eigen::MatrixXd& data, int p, int start_lag,
                          Eigen::Index t_first, Eigen::Index t_last) {
  const Eigen::Index d = data.cols();
  if (p < 0 || start_lag < 1) {
    throw std::invalid_argument("lagged design needs p >= 0 and start_lag >= 1");
  }
  if (t_first > t_last || t_last >= data.rows() ||
      t_first - start_lag - (p - 1) < 0) {
    throw std::out_of_range("lagged design time range [" + std::to_string(t_first) +
                            ", " + std::to_string(t_last) + "] out of bounds");
  }
  const Eigen::Index rows = t_last - t_first + 1;
  const Eigen::Index cols = d * p;
  if (rows < cols + 1) {
    throw InsufficientDataError("lagged design has " + std::to_string(rows) +
                                " rows for " + std::to_string(cols) + " columns");
  }
  Eigen::MatrixXd out(rows, cols);
  for (int lag = 0; lag < p; ++lag) {
    out.middleCols(static_cast<Eigen::Index>(lag) * d, d) =
        data.middleRows(t_first - start_lag - lag, rows);
  }
  return out;
}

Eigen::MatrixXd xi_residuals_m(const Eigen::MatrixXd& data, int p, int tau,
                               double rank_tol) {
  const Eigen::Index T = data.rows();
  const Eigen::Index d = data.cols();
  if (p < 0 || tau < 0) {
    throw std::invalid_argument("xi residuals need p >= 0 and tau >= 0");
  }
  const Eigen::Index n = T - p - tau;
  if (n < static_cast<Eigen::Index>(d) * p + 2) {
    throw InsufficientDataError("xi residuals need T - p - tau > d*p + 1, have " +
                                std::to_string(n) + " usable rows for " +
                                std::to_string(d * p) + " lag columns");
  }
  Eigen::MatrixXd y = data.middleRows(p + tau, n);
  if (p == 0) return y;
  const Eigen::MatrixXd design = lag_block(data, p, tau + 1, p + tau, T - 1);
  return residualize(y, design, rank_tol);
}

}  // namespace

double nonlinearity(double u, double alpha) {
  if (!(alpha > 1.0)) {
    throw std::invalid_argument("nonlinearity exponent must exceed 1");
  }
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), alpha), u);
}

Nonlinearity monomial_nonlinearity(double exponent) {
  if (!(exponent > 1.0)) {
    throw std::invalid_argument("nonlinearity exponent must exceed 1");
  }
  return [exponent](double u) { return nonlinearity(u, exponent); };
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double two_sided_normal_p(double z) {
  const double p = std::erfc(std::abs(z) / std::numbers::sqrt2);
  return std::max(p, 1e-300);
}

Eigen::MatrixXd lagged_design(const TimeSeries& x, int p, int start_lag,
                              Eigen::Index t_first, Eigen::Index t_last) {
  return lag_block(x.data, p, start_lag, t_first, t_last);
}

Eigen::MatrixXd xi_residuals(const TimeSeries& x, int p, int tau, bool center,
                             double rank_tol) {
  return xi_residuals_m(centered_data(x, center), p, tau, rank_tol);
}

Eigen::MatrixXd z_residuals(const TimeSeries& x, int p, bool center, double rank_tol) {
  const Eigen::Index T = x.T();
  const Eigen::Index d = x.d();
  if (p < 0) throw std::invalid_argument("z residuals need p >= 0");
  const Eigen::Index n = T - p;
  if (n < d * (p + 1) + 1) {
    throw InsufficientDataError("z residuals need T - p > d*(p+1), have " +
                                std::to_string(n) + " usable rows");
  }
  const Eigen::MatrixXd data = centered_data(x, center);
  const Eigen::MatrixXd contemporaneous = data.middleRows(p, n);
  const Eigen::MatrixXd lags =
      p > 0 ? lag_block(data, p, 1, p, T - 1) : Eigen::MatrixXd(n, 0);

  const Eigen::Index q = d - 1 + lags.cols();
  Eigen::MatrixXd out(n, d);
  Eigen::MatrixXd design(n, q);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (q == 0) {
      out.col(k) = contemporaneous.col(k);
      continue;
    }
    Eigen::Index c = 0;
    for (Eigen::Index l = 0; l < d; ++l) {
      if (l != k) design.col(c++) = contemporaneous.col(l);
    }
    design.rightCols(lags.cols()) = lags;
    out.col(k) = OlsSolver(design, rank_tol).fit(contemporaneous.col(k)).residuals;
  }
  return out;
}

namespace {

// Shared per-analysis state: innovation residuals for every lag plus the
// factored lag-0 predictor block restricted to the usable window of each lag.
struct Engine {
  Eigen::Index T = 0;
  int d = 0;
  int p = 0;
  Eigen::MatrixXd xi0;
  std::vector<Eigen::MatrixXd> xi_tau;   // index tau, entry 0 duplicates xi0
  std::vector<OlsSolver> solver;         // index tau, design xi0 rows 0..n_tau-1

  Engine(const TimeSeries& x, int p_order, bool center, double rank_tol) {
    T = x.T();
    d = static_cast<int>(x.d());
    p = p_order;
    const Eigen::MatrixXd data = centered_data(x, center);
    xi0 = xi_residuals_m(data, p, 0, rank_tol);
    xi_tau.reserve(p + 1);
    solver.reserve(p + 1);
    for (int tau = 0; tau <= p; ++tau) {
      xi_tau.push_back(tau == 0 ? xi0 : xi_residuals_m(data, p, tau, rank_tol));
      const Eigen::Index n = T - p - tau;
      if (n <= d) {
        throw InsufficientDataError("ancestor test at lag " + std::to_string(tau) +
                                    " has " + std::to_string(n) + " rows for " +
                                    std::to_string(d) + " predictors");
      }
      solver.emplace_back(xi0.topRows(n), rank_tol);
    }
  }

  // All d coefficients of the regression for one (target, lag) pair.
  std::vector<AncestorTest> tests_for(int target, int tau,
                                      const Nonlinearity& transform) const {
    const Eigen::Index n = T - p - tau;
    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      f(i) = transform(xi_tau[tau](i, target));
      if (!std::isfinite(f(i))) {
        throw NumericOverflowError("nonlinearity overflowed at time index " +
                                   std::to_string(p + tau + i) + " for series " +
                                   std::to_string(target + 1));
      }
    }
    const OlsFit fit = solver[tau].fit(f);
    const double sigma2 = fit.rss / static_cast<double>(fit.df);

    std::vector<AncestorTest> out;
    out.reserve(d);
    for (int k = 0; k < d; ++k) {
      AncestorTest t;
      t.source = k;
      t.target = target;
      t.lag = tau;
      t.beta = fit.coefficients(k);
      t.var_beta = sigma2 * solver[tau].gram_inverse_diagonal()(k);
      if (!(t.var_beta > 0.0) || !std::isfinite(t.var_beta)) {
        throw NumericError("degenerate coefficient variance in ancestor test for target " +
                           std::to_string(target + 1) + ", lag " + std::to_string(tau));
      }
      t.z = t.beta / std::sqrt(t.var_beta);
      t.p_value = two_sided_normal_p(t.z);
      t.n_used = n;
      out.push_back(t);
    }
    return out;
  }
};

void check_analysis_args(const TimeSeries& x, int p, int target, int lag) {
  if (target < 0 || target >= x.d()) {
    throw std::invalid_argument("target index out of range");
  }
  if (lag < 0 || lag > p) throw std::invalid_argument("lag must lie in [0, p]");
}

}  // namespace

std::vector<AncestorTest> ancestor_test(const TimeSeries& x, int p, int target, int lag,
                                        const Nonlinearity& transform, bool center,
                                        double rank_tol) {
  check_analysis_args(x, p, target, lag);
  const Engine engine(x, p, center, rank_tol);
  return engine.tests_for(target, lag, transform);
}

std::vector<AncestorTest> ancestor_test(const TimeSeries& x, int p, int target, int lag,
                                        double exponent, bool center, double rank_tol) {
  return ancestor_test(x, p, target, lag, monomial_nonlinearity(exponent), center,
                       rank_tol);
}

const AncestorTest& EdgePValueTensor::test(int source, int target, int lag) const {
  if (source == target) {
    throw std::invalid_argument("autoregressive pairs are not tested");
  }
  if (source < 0 || source >= d || target < 0 || target >= d || lag < 0 || lag > p) {
    throw std::out_of_range("edge index out of range");
  }
  const std::size_t base =
      (static_cast<std::size_t>(target) * (p + 1) + lag) * (d - 1);
  const std::size_t offset = source < target ? source : source - 1;
  return tests.at(base + offset);
}

EdgePValueTensor all_pairs_tests(const TimeSeries& x, int p,
                                 const Nonlinearity& transform, bool center,
                                 double rank_tol) {
  if (x.d() < 2) {
    throw std::invalid_argument("pairwise tests need at least two series");
  }
  const Engine engine(x, p, center, rank_tol);

  EdgePValueTensor tensor;
  tensor.d = engine.d;
  tensor.p = p;
  tensor.tests.reserve(static_cast<std::size_t>(engine.d) * (engine.d - 1) * (p + 1));
  for (int j = 0; j < engine.d; ++j) {
    for (int tau = 0; tau <= p; ++tau) {
      const auto row = engine.tests_for(j, tau, transform);
      for (int k = 0; k < engine.d; ++k) {
        if (k != j) tensor.tests.push_back(row[k]);
      }
    }
  }
  return tensor;
}

EdgePValueTensor all_pairs_tests(const TimeSeries& x, int p, double exponent,
                                 bool center, double rank_tol) {
  return all_pairs_tests(x, p, monomial_nonlinearity(exponent), center, rank_tol);
}

TargetAnalysis target_analysis(const EdgePValueTensor& tensor, int target, double alpha) {
  if (target < 0 || target >= tensor.d) {
    throw std::invalid_argument("target index out of range");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  TargetAnalysis out;
  out.target = target;
  out.alpha = alpha;
  std::vector<double> raw;
  for (int tau = 0; tau <= tensor.p; ++tau) {
    for (int k = 0; k < tensor.d; ++k) {
      if (k == target) continue;
      out.decisions.push_back({tensor.test(k, target, tau), 1.0, false});
      raw.push_back(out.decisions.back().test.p_value);
    }
  }
  const std::vector<double> corrected = holm(raw);
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    out.decisions[i].p_corrected = corrected[i];
    out.decisions[i].detected = corrected[i] <= alpha;
  }
  return out;
}

TargetAnalysis target_analysis(const TimeSeries& x, int p, int target, double alpha,
                               double exponent, bool center, double rank_tol) {
  check_analysis_args(x, p, target, /*lag=*/0);
  if (x.d() < 2) {
    throw std::invalid_argument("target analysis needs at least two series");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  const Nonlinearity transform = monomial_nonlinearity(exponent);
  const Engine engine(x, p, center, rank_tol);

  TargetAnalysis out;
  out.target = target;
  out.alpha = alpha;
  std::vector<double> raw;
  for (int tau = 0; tau <= p; ++tau) {
    const auto row = engine.tests_for(target, tau, transform);
    for (int k = 0; k < engine.d; ++k) {
      if (k == target) continue;
      out.decisions.push_back({row[k], 1.0, false});
      raw.push_back(row[k].p_value);
    }
  }
  const std::vector<double> corrected = holm(raw);
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    out.decisions[i].p_corrected = corrected[i];
    out.decisions[i].detected = corrected[i] <= alpha;
  }
  return out;
}

nlohmann::json to_json(const AncestorTest& test) {
  return nlohmann::json{{"k", test.source + 1}, {"j", test.target + 1},
                        {"tau", test.lag},      {"beta", test.beta},
                        {"se", std::sqrt(test.var_beta)},
                        {"z", test.z},          {"p", test.p_value}};
}

nlohmann::json to_json(const TargetAnalysis& analysis) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& decision : analysis.decisions) {
    nlohmann::json row = to_json(decision.test);
    row["p_corrected"] = decision.p_corrected;
    row["detected"] = decision.detected;
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"j", analysis.target + 1},
                        {"alpha", analysis.alpha},
                        {"tests", std::move(rows)}};
}

}  // namespace ancestry
