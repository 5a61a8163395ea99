#include "localfid/linalg.hpp"

#include <cmath>
#include <cstddef>

#include "localfid/common.hpp"

namespace localfid {

std::vector<double> solve_spd(std::vector<double> A, std::vector<double> b,
                              const std::vector<double>& ridge) {
  const std::size_t n = b.size();
  if (A.size() != n * n || ridge.size() != n)
    throw NumericError("solve_spd: dimension mismatch");

  // Drop columns that are identically zero (zero diagonal, zero ridge);
  // their coefficients are pinned to 0 and the reduced system is solved.
  std::vector<std::size_t> active;
  active.reserve(n);
  double maxDiag = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = A[j * n + j] + ridge[j];
    if (d != 0.0) active.push_back(j);
    if (d > maxDiag) maxDiag = d;
  }
  if (active.empty()) throw NumericError("solve_spd: all-zero system");

  const std::size_t k = active.size();
  std::vector<double> L(k * k, 0.0);
  std::vector<double> rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      L[i * k + j] = A[active[i] * n + active[j]];
    L[i * k + i] += ridge[active[i]];
    rhs[i] = b[active[i]];
  }

  // Cholesky, lower triangular in place.
  const double tol = 1e-12 * maxDiag;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = L[i * k + j];
      for (std::size_t p = 0; p < j; ++p) s -= L[i * k + p] * L[j * k + p];
      if (i == j) {
        if (!(s > tol))
          throw NumericError(
              "solve_spd: singular system (rank deficient); a positive ridge "
              "resolves the tie");
        L[i * k + i] = std::sqrt(s);
      } else {
        L[i * k + j] = s / L[j * k + j];
      }
    }
  }

  // Forward then backward substitution.
  for (std::size_t i = 0; i < k; ++i) {
    double s = rhs[i];
    for (std::size_t p = 0; p < i; ++p) s -= L[i * k + p] * rhs[p];
    rhs[i] = s / L[i * k + i];
  }
  for (std::size_t ii = k; ii-- > 0;) {
    double s = rhs[ii];
    for (std::size_t p = ii + 1; p < k; ++p) s -= L[p * k + ii] * rhs[p];
    rhs[ii] = s / L[ii * k + ii];
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) x[active[i]] = rhs[i];
  return x;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw NumericError("fit_line: need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw NumericError("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace localfid
