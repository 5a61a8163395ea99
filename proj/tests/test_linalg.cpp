#include <doctest.h>

#include <cmath>
#include <vector>

#include "localfid/common.hpp"
#include "localfid/linalg.hpp"
#include "localfid/rng.hpp"

using localfid::fit_line;
using localfid::NumericError;
using localfid::RngStream;
using localfid::solve_spd;

TEST_CASE("solve_spd solves a hand-checked 2x2 system") {
  // [4 2; 2 3] x = [10, 9]  ->  x = (1.5, 2)
  std::vector<double> A = {4, 2, 2, 3};
  std::vector<double> b = {10, 9};
  const auto x = solve_spd(A, b, {0, 0});
  CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("solve_spd satisfies the normal equations on random SPD systems") {
  RngStream rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6;
    std::vector<double> M(n * n);
    for (auto& v : M) v = rng.normal();
    // A = M^T M + I is comfortably positive definite
    std::vector<double> A(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = (i == j) ? 1.0 : 0.0;
        for (std::size_t k = 0; k < n; ++k) s += M[k * n + i] * M[k * n + j];
        A[i * n + j] = s;
      }
    std::vector<double> b(n);
    for (auto& v : b) v = rng.normal();

    const auto x = solve_spd(A, b, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      double r = -b[i];
      for (std::size_t j = 0; j < n; ++j) r += A[i * n + j] * x[j];
      CHECK(std::abs(r) < 1e-8);
    }
  }
}

TEST_CASE("an all-zero row/column is dropped with coefficient zero") {
  std::vector<double> A = {2, 0, 0, 0};
  const auto x = solve_spd(A, {4, 0}, {0, 0});
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == 0.0);
}

TEST_CASE("a genuinely rank-deficient system is refused") {
  // identical columns, not removable by the zero-column rule
  std::vector<double> A = {1, 1, 1, 1};
  CHECK_THROWS_AS(solve_spd(A, {1, 1}, {0, 0}), NumericError);
}

TEST_CASE("ridge enters the diagonal") {
  // (1 + 1) x = 1  ->  x = 0.5
  const auto x = solve_spd({1}, {1}, {1});
  CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("fit_line recovers an exact line") {
  std::vector<double> xs = {0, 1, 2, 3, 4};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3 * x - 2);
  const auto fit = fit_line(xs, ys);
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(fit.intercept == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_line on a symmetric vee has slope zero") {
  // x = 0,1,2 ; y = 0,1,0: centered cross term cancels exactly
  const auto fit = fit_line({0, 1, 2}, {0, 1, 0});
  CHECK(fit.slope == doctest::Approx(0.0));
  CHECK(fit.intercept == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(fit.r2 == doctest::Approx(0.0));
}
