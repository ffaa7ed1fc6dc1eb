#include "ancestry/timeseries.hpp"

#include <stdexcept>

namespace ancestry {

TimeSeries make_series(Eigen::MatrixXd data, std::vector<std::string> names) {
  if (data.rows() < 1 || data.cols() < 1) {
    throw std::invalid_argument("time series must have at least one row and one column");
  }
  if (!data.allFinite()) {
    throw std::invalid_argument("time series contains non-finite entries");
  }
  if (names.empty()) {
    names.reserve(static_cast<std::size_t>(data.cols()));
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      names.push_back("x" + std::to_string(c + 1));
    }
  } else if (static_cast<Eigen::Index>(names.size()) != data.cols()) {
    throw std::invalid_argument("name count does not match column count");
  }
  return TimeSeries{std::move(data), std::move(names)};
}

}  // namespace ancestry
