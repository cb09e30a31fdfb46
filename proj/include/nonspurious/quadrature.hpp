#pragma once

// Adaptive Gauss-Legendre quadrature and a golden-section maximizer, used by
// the nonlinearity module to build antiderivatives and the constant
// c = max_t |f(t,0)|.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace nonspurious {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// 15-point Gauss-Legendre rule on [-1, 1]: {node, weight}.
inline constexpr double kGauss15[15][2] = {
    {-9.87992518020485377e-01, 3.07532419961186465e-02},
    {-9.37273392400705951e-01, 7.03660474881080689e-02},
    {-8.48206583410427206e-01, 1.07159220467171773e-01},
    {-7.24417731360170070e-01, 1.39570677926153908e-01},
    {-5.70972172608538830e-01, 1.66269205816993781e-01},
    {-3.94151347077563385e-01, 1.86161000015561878e-01},
    {-2.01194093997434514e-01, 1.98431485327111246e-01},
    {0.00000000000000000e+00, 2.02578241925560898e-01},
    {2.01194093997434514e-01, 1.98431485327111246e-01},
    {3.94151347077563385e-01, 1.86161000015561878e-01},
    {5.70972172608538830e-01, 1.66269205816993781e-01},
    {7.24417731360170070e-01, 1.39570677926153908e-01},
    {8.48206583410427206e-01, 1.07159220467171773e-01},
    {9.37273392400705951e-01, 7.03660474881080689e-02},
    {9.87992518020485377e-01, 3.07532419961186465e-02}};

template <class F>
double gauss15(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (const auto& nw : kGauss15) sum += nw[1] * f(mid + half * nw[0]);
  return half * sum;
}

template <class F>
double integrate_panel(const F& f, double a, double b, double whole,
                       double abs_tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss15(f, a, mid);
  const double right = gauss15(f, mid, b);
  const double refined = left + right;
  const double discrepancy = std::fabs(refined - whole);
  // The relative floor keeps the recursion from chasing noise when the
  // integrand is so large that the absolute target is below rounding.
  const double accept =
      std::max(abs_tol,
               64.0 * std::numeric_limits<double>::epsilon() *
                   std::fabs(refined));
  if (discrepancy <= accept) return refined;
  if (depth <= 0)
    throw QuadratureError("quadrature failed to converge to tolerance");
  // Children get tol/sqrt(2) rather than tol/2. Halving is the textbook
  // worst-case-safe split, but it starves the refinement chain that forms
  // against an endpoint singularity (tolerance shrinks faster than a
  // root-type cusp error decays, so the recursion bottoms out). The sqrt(2)
  // schedule still damps accumulated error along such a chain to a small
  // multiple of abs_tol while letting integrands like sqrt(|s|) converge.
  const double child_tol = abs_tol / 1.4142135623730951;
  return integrate_panel(f, a, mid, left, child_tol, depth - 1) +
         integrate_panel(f, mid, b, right, child_tol, depth - 1);
}

}  // namespace detail

// Integrates f over [a, b] to roughly absolute tolerance abs_tol (the
// accumulated error can exceed it by a small constant factor, and a
// floating-point floor of 64 eps relative to the panel value always
// applies). Throws QuadratureError when the recursion depth is exhausted
// without convergence.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12,
                 int max_depth = 48) {
  if (a == b) return 0.0;
  const double sign = (a <= b) ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double whole = detail::gauss15(f, lo, hi);
  return sign * detail::integrate_panel(f, lo, hi, whole, abs_tol, max_depth);
}

// Golden-section search for a maximizer of f on [a, b]; returns {argmax,
// max}. Assumes f is unimodal on the bracket; used to polish grid-search
// results, where the bracket spans one grid cell on each side of the best
// sample.
template <class F>
std::pair<double, double> golden_section_max(const F& f, double a, double b,
                                             double x_tol = 1e-10) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

}  // namespace nonspurious
