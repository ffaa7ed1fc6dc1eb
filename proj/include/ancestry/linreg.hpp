#pragma once

#include <Eigen/Dense>

#include "ancestry/errors.hpp"

namespace ancestry {

// Relative singular-value cutoff below which a design is declared
// rank-deficient. Surfaced on the CLI as --rank-tol.
inline constexpr double kDefaultRankTol = 1e-10;

// Result of a dense least squares fit.
struct OlsFit {
  Eigen::VectorXd coefficients;  // length q
  Eigen::VectorXd residuals;     // length n, equal to y - X * coefficients
  double rss = 0.0;              // squared norm of the residuals
  Eigen::Index df = 0;           // n - q
};

// Householder-QR least squares solver. Factors the design once so that many
// responses can be fitted against the same predictors.
class OlsSolver {
 public:
  // Throws InsufficientDataError when n <= q and RankDeficientError when the
  // smallest-to-largest singular value ratio of X falls below rank_tol.
  explicit OlsSolver(Eigen::MatrixXd X, double rank_tol = kDefaultRankTol);

  OlsFit fit(const Eigen::VectorXd& y) const;

  // Residuals of every column of Y against the design.
  Eigen::MatrixXd residuals(const Eigen::MatrixXd& Y) const;

  // Diagonal of (X^T X)^{-1}; entry k times the residual variance estimate is
  // the sampling variance of coefficient k.
  const Eigen::VectorXd& gram_inverse_diagonal() const { return gram_inv_diag_; }

  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index q() const { return X_.cols(); }

 private:
  Eigen::MatrixXd X_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd r_;  // q x q upper-triangular factor
  Eigen::VectorXd gram_inv_diag_;
};

OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               double rank_tol = kDefaultRankTol);

// Residual of every column of Y on the column span of X. X must have at
// least one column.
Eigen::MatrixXd residualize(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                            double rank_tol = kDefaultRankTol);

}  // namespace ancestry
