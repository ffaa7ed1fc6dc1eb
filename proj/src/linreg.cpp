#include "ancestry/linreg.hpp"

#include <string>
#include <utility>

namespace ancestry {

OlsSolver::OlsSolver(Eigen::MatrixXd X, double rank_tol) : X_(std::move(X)) {
  const Eigen::Index n = X_.rows();
  const Eigen::Index q = X_.cols();
  if (q < 1) {
    throw std::invalid_argument("least squares design must have at least one column");
  }
  if (n <= q) {
    throw InsufficientDataError("least squares needs more rows than columns, got " +
                                std::to_string(n) + " rows for " + std::to_string(q) +
                                " columns");
  }
  qr_.compute(X_);
  r_ = qr_.matrixQR().topRows(q).triangularView<Eigen::Upper>();

  // R shares its singular values with X, so the rank check runs on the small
  // triangular factor.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r_);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(q - 1);
  if (!(smax > 0.0) || smin < rank_tol * smax) {
    throw RankDeficientError("design matrix with " + std::to_string(q) +
                             " columns is rank-deficient (singular value ratio " +
                             std::to_string(smax > 0.0 ? smin / smax : 0.0) + ")");
  }

  const Eigen::MatrixXd rinv =
      r_.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(q, q));
  gram_inv_diag_ = rinv.rowwise().squaredNorm();
}

OlsFit OlsSolver::fit(const Eigen::VectorXd& y) const {
  if (y.size() != X_.rows()) {
    throw std::invalid_argument("response length does not match design rows");
  }
  const Eigen::Index q = X_.cols();
  Eigen::VectorXd qty = y;
  qty.applyOnTheLeft(qr_.householderQ().transpose());

  OlsFit out;
  out.coefficients = r_.triangularView<Eigen::Upper>().solve(qty.head(q));
  out.residuals = y - X_ * out.coefficients;
  out.rss = out.residuals.squaredNorm();
  out.df = X_.rows() - q;
  return out;
}

Eigen::MatrixXd OlsSolver::residuals(const Eigen::MatrixXd& Y) const {
  if (Y.rows() != X_.rows()) {
    throw std::invalid_argument("response rows do not match design rows");
  }
  const Eigen::Index q = X_.cols();
  Eigen::MatrixXd qty = Y;
  qty.applyOnTheLeft(qr_.householderQ().transpose());
  const Eigen::MatrixXd coef =
      r_.triangularView<Eigen::Upper>().solve(qty.topRows(q));
  return Y - X_ * coef;
}

OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double rank_tol) {
  return OlsSolver(X, rank_tol).fit(y);
}

Eigen::MatrixXd residualize(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                            double rank_tol) {
  if (Y.rows() != X.rows()) {
    throw std::invalid_argument("residualize: row counts of Y and X differ");
  }
  return OlsSolver(X, rank_tol).residuals(Y);
}

}  // namespace ancestry
