#pragma once

// Thomas elimination for symmetric tridiagonal systems whose off-diagonal
// entries are all -1 (the form every Hessian and linear system here takes).
// No pivoting: the intended inputs are positive definite, and near-singular
// inputs are reported rather than "solved".

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace nonspurious {

struct TridiagResult {
  std::vector<double> solution;  // empty when singular
  double min_abs_pivot = std::numeric_limits<double>::infinity();
  double min_pivot = std::numeric_limits<double>::infinity();  // signed
  bool singular = false;
  int pivot_index = -1;  // 0-based row where elimination broke down
};

// Solves A y = rhs where A is m-by-m with diagonal `diag` and all
// off-diagonal entries -1. Elimination is declared singular when a pivot's
// magnitude falls below 1e-13 times the matrix scale; the scale is the
// largest diagonal magnitude floored at 1, the off-diagonal magnitude, so
// an all-zero diagonal is still reported instead of divided by.
inline TridiagResult thomas_solve(std::span<const double> diag,
                                  std::span<const double> rhs) {
  const size_t m = diag.size();
  if (m == 0) throw std::invalid_argument("empty tridiagonal system");
  if (rhs.size() != m)
    throw std::invalid_argument("tridiagonal rhs size mismatch");

  double max_diag = 1.0;
  for (double d : diag) max_diag = std::max(max_diag, std::fabs(d));
  const double threshold = 1e-13 * max_diag;

  TridiagResult result;
  std::vector<double> pivot(m), z(m);

  // Forward sweep. With off-diagonal t = -1 the multiplier is -1/pivot, so
  //   pivot_i = diag_i - 1/pivot_{i-1},   z_i = rhs_i + z_{i-1}/pivot_{i-1}.
  for (size_t i = 0; i < m; ++i) {
    double p = diag[i];
    double y = rhs[i];
    if (i > 0) {
      p -= 1.0 / pivot[i - 1];
      y += z[i - 1] / pivot[i - 1];
    }
    result.min_abs_pivot = std::min(result.min_abs_pivot, std::fabs(p));
    result.min_pivot = std::min(result.min_pivot, p);
    if (std::fabs(p) < threshold) {
      result.singular = true;
      result.pivot_index = static_cast<int>(i);
      return result;
    }
    pivot[i] = p;
    z[i] = y;
  }

  // Back substitution: y_i = (z_i + y_{i+1}) / pivot_i.
  result.solution.resize(m);
  result.solution[m - 1] = z[m - 1] / pivot[m - 1];
  for (size_t i = m - 1; i-- > 0;)
    result.solution[i] = (z[i] + result.solution[i + 1]) / pivot[i];
  return result;
}

}  // namespace nonspurious
