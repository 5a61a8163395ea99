#include "localfid/logspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace localfid {
namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi == kNegInf) return kNegInf;
  double s = 0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

double log_sum_exp_doubled(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  const double hi = *std::max_element(v.begin(), v.end());
  if (hi == kNegInf) return kNegInf;
  double s = 0;
  for (double x : v) s += std::exp(2.0 * (x - hi));
  return 2.0 * hi + std::log(s);
}

}  // namespace localfid
