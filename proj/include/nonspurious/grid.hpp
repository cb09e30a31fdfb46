#pragma once

// Grid functions on {0, 1/n, ..., 1} with homogeneous Dirichlet boundary
// values, forward differences, and the three norms used throughout:
//
//   norm_E(x)   = (sum_{k=1..n} |x(k) - x(k-1)|^2)^(1/2)
//   norm_0(x)   = Euclidean norm of the interior values x(1..n-1)
//   max_norm(x) = max_{k=0..n} |x(k)|
//
// For every x in this space:
//   (1/2) norm_E <= norm_0 <= sqrt((n-1) n) * norm_E
//   max_norm <= (sqrt(n+1)/2) * norm_E

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonspurious {

// A function on the n+1 grid nodes with value 0 pinned at both endpoints.
class GridFunction {
 public:
  explicit GridFunction(int n) : n_(n), values_(static_cast<size_t>(n) + 1) {
    if (n < 2) throw std::invalid_argument("grid requires n >= 2");
  }

  int n() const { return n_; }

  double operator[](int k) const {
    check_index(k, 0, n_);
    return values_[static_cast<size_t>(k)];
  }

  // Interior nodes 1..n-1 are the only mutable ones.
  void set_interior(int k, double v) {
    check_index(k, 1, n_ - 1);
    values_[static_cast<size_t>(k)] = v;
  }

  std::span<const double> values() const { return values_; }

 private:
  void check_index(int k, int lo, int hi) const {
    if (k < lo || k > hi)
      throw std::out_of_range("grid index " + std::to_string(k) +
                              " outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
  }

  int n_;
  std::vector<double> values_;
};

// Forward difference x(k) - x(k-1), defined for k = 1..n.
inline double delta(const GridFunction& x, int k) {
  if (k < 1 || k > x.n())
    throw std::out_of_range("delta index outside [1, n]");
  return x[k] - x[k - 1];
}

// Second difference x(k+1) - 2 x(k) + x(k-1), defined for k = 1..n-1.
inline double delta2(const GridFunction& x, int k) {
  if (k < 1 || k > x.n() - 1)
    throw std::out_of_range("delta2 index outside [1, n-1]");
  return x[k + 1] - 2.0 * x[k] + x[k - 1];
}

inline double norm_E(const GridFunction& x) {
  double sum = 0.0;
  for (int k = 1; k <= x.n(); ++k) {
    const double d = delta(x, k);
    sum += d * d;
  }
  return std::sqrt(sum);
}

inline double norm_0(const GridFunction& x) {
  double sum = 0.0;
  for (int k = 1; k <= x.n() - 1; ++k) sum += x[k] * x[k];
  return std::sqrt(sum);
}

inline double max_norm(const GridFunction& x) {
  double m = 0.0;
  for (int k = 0; k <= x.n(); ++k) m = std::max(m, std::fabs(x[k]));
  return m;
}

// CSV rows "k,t,value" with t = k/n; all reals printed with %.17g so output
// round-trips exactly and repeated writes are byte-identical.
inline void write_csv(std::ostream& os, const GridFunction& x) {
  os << "k,t,value\n";
  char buf[64];
  for (int k = 0; k <= x.n(); ++k) {
    const double t = static_cast<double>(k) / x.n();
    os << k << ',';
    std::snprintf(buf, sizeof buf, "%.17g", t);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", x[k]);
    os << buf << '\n';
  }
}

}  // namespace nonspurious
