#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "localfid/logspace.hpp"

using localfid::log_sum_exp;
using localfid::log_sum_exp_doubled;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

TEST_CASE("log_sum_exp basics") {
  std::vector<double> v = {0.0, 0.0};
  CHECK(log_sum_exp(v) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  std::vector<double> one = {1.7};
  CHECK(log_sum_exp(one) == doctest::Approx(1.7));
}

TEST_CASE("log_sum_exp is shift invariant") {
  std::vector<double> v = {-1.0, 0.5, 2.0, -3.0};
  const double base = log_sum_exp(v);
  for (double c : {5.0, -40.0, 1e3}) {
    std::vector<double> shifted;
    for (double x : v) shifted.push_back(x + c);
    CHECK(log_sum_exp(shifted) == doctest::Approx(base + c).epsilon(1e-12));
  }
}

TEST_CASE("log_sum_exp survives magnitudes that would overflow") {
  std::vector<double> v = {1e5, 1e5};
  CHECK(log_sum_exp(v) == doctest::Approx(1e5 + std::log(2.0)));
  std::vector<double> w = {-1e5, -1e5};
  CHECK(log_sum_exp(w) == doctest::Approx(-1e5 + std::log(2.0)));
}

TEST_CASE("-inf entries are ignored; all -inf collapses") {
  std::vector<double> v = {kNegInf, 0.0, kNegInf};
  CHECK(log_sum_exp(v) == doctest::Approx(0.0));
  std::vector<double> w = {kNegInf, kNegInf};
  CHECK(log_sum_exp(w) == kNegInf);
  CHECK(log_sum_exp_doubled(w) == kNegInf);
}

TEST_CASE("doubled version equals log sum of squared exponentials") {
  std::vector<double> v = {-0.3, 1.1, 0.2, -2.5};
  double direct = 0;
  for (double x : v) direct += std::exp(2 * x);
  CHECK(log_sum_exp_doubled(v) ==
        doctest::Approx(std::log(direct)).epsilon(1e-13));
}
