#pragma once

#include <cstddef>
#include <vector>

namespace localfid {

// Solves (A + diag(ridge)) x = b for a symmetric positive semidefinite A
// (n x n, row-major) via Cholesky. Columns whose diagonal entry is exactly
// zero after the ridge (an all-zero feature under the regression weights)
// are excluded from the solve and receive coefficient 0. A pivot below
// tolerance on a nonzero column means the system is genuinely rank
// deficient; throws NumericError in that case.
std::vector<double> solve_spd(std::vector<double> A, std::vector<double> b,
                              const std::vector<double>& ridge);

// Least-squares slope/intercept of y against x, plus R^2.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace localfid
