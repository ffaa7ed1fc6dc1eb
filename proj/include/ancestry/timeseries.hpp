#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ancestry {

// T x d panel of observations; column c holds one series, rows are time order.
struct TimeSeries {
  Eigen::MatrixXd data;
  std::vector<std::string> names;

  Eigen::Index T() const { return data.rows(); }
  Eigen::Index d() const { return data.cols(); }
};

// Validates shape and finiteness; fills default names "x1".."xd" when none
// are given.
TimeSeries make_series(Eigen::MatrixXd data, std::vector<std::string> names = {});

}  // namespace ancestry
