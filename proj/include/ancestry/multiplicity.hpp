#pragma once

#include <string>
#include <vector>

#include "ancestry/errors.hpp"

namespace ancestry {

// A family of p-values with parallel labels.
struct PValueSet {
  std::vector<double> values;
  std::vector<std::string> labels;
};

// Bonferroni-Holm step-down correction. Output order matches input order and
// the corrected values are monotone nondecreasing along the sorted input.
std::vector<double> holm(const std::vector<double>& ps);
PValueSet holm(const PValueSet& ps);

// Order-statistic combination of the p-values attached to one potential edge
// across lags: min over i of (r/i) * p_(i), scaled by the r-th harmonic
// number and capped at 1. Valid under arbitrary dependence.
double combine_lags(const std::vector<double>& ps);

double harmonic_number(int r);

}  // namespace ancestry
