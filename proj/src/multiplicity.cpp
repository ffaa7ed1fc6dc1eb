#include "ancestry/multiplicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ancestry {

namespace {

void check_unit_interval(const std::vector<double>& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!(ps[i] >= 0.0 && ps[i] <= 1.0)) {
      throw InvalidPValueError("p-value " + std::to_string(ps[i]) + " at index " +
                               std::to_string(i) + " lies outside [0, 1]");
    }
  }
}

}  // namespace

std::vector<double> holm(const std::vector<double>& ps) {
  if (ps.empty()) {
    throw std::invalid_argument("holm: empty p-value set");
  }
  check_unit_interval(ps);

  const std::size_t m = ps.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ps[a] < ps[b]; });

  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double scaled = std::min(1.0, static_cast<double>(m - i) * ps[order[i]]);
    running = std::max(running, scaled);
    out[order[i]] = running;
  }
  return out;
}

PValueSet holm(const PValueSet& ps) {
  return PValueSet{holm(ps.values), ps.labels};
}

double harmonic_number(int r) {
  if (r < 1) {
    throw std::invalid_argument("harmonic number needs r >= 1");
  }
  double h = 0.0;
  for (int i = 1; i <= r; ++i) h += 1.0 / i;
  return h;
}

double combine_lags(const std::vector<double>& ps) {
  if (ps.empty()) {
    throw std::invalid_argument("combine_lags: empty p-value set");
  }
  check_unit_interval(ps);

  std::vector<double> sorted = ps;
  std::sort(sorted.begin(), sorted.end());
  const int r = static_cast<int>(sorted.size());

  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= r; ++i) {
    best = std::min(best, static_cast<double>(r) / i * sorted[i - 1]);
  }
  return std::min(1.0, best * harmonic_number(r));
}

}  // namespace ancestry
