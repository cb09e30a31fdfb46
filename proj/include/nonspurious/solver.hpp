#pragma once

// The discrete energy
//
//   I(x) = sum_{k=1..n} (1/2)|dx(k-1)|^2 + (1/n^2) sum_{k=1..n-1} F(k/n, x(k))
//
// its gradient and tridiagonal Hessian, and the damped-Newton minimizer.
// Critical points of I are exactly the solutions of
//
//   d2x(k-1) = (1/n^2) f(k/n, x(k)),   x(0) = x(n) = 0.
//
// A separate linear path solves d2x(k) + lambda x(k) = 0 with general
// Dirichlet data and full singularity/consistency reporting; it backs the
// spurious-solution demos.

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonspurious/grid.hpp"
#include "nonspurious/nonlinearity.hpp"
#include "nonspurious/tridiag.hpp"

namespace nonspurious {

struct DiscreteBVP {
  int n;
  Nonlinearity nl;

  DiscreteBVP(int n_, Nonlinearity nl_) : n(n_), nl(std::move(nl_)) {
    if (n < 2) throw std::invalid_argument("DiscreteBVP requires n >= 2");
  }
};

struct NewtonConfig {
  double residual_tol = 1e-12;  // max-norm of the gradient
  int max_iter = 50;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  DerivativeMode derivative_mode = DerivativeMode::Symbolic;
  // Fallback first-order method (still Armijo-damped); mainly for
  // cross-checking the finite-difference derivative mode.
  bool gradient_descent = false;
};

enum class SolveStatus { Converged, Singular, NoConvergence };
enum class SingularKind { None, NoSolution, InfinitelyMany };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Singular: return "singular";
    case SolveStatus::NoConvergence: return "no-convergence";
  }
  return "?";
}

inline const char* singular_kind_name(SingularKind k) {
  switch (k) {
    case SingularKind::None: return "none";
    case SingularKind::NoSolution: return "no-solution";
    case SingularKind::InfinitelyMany: return "infinitely-many";
  }
  return "?";
}

struct SolveReport {
  int n = 0;
  SolveStatus status = SolveStatus::NoConvergence;
  int iterations = 0;
  double final_residual = 0.0;
  double energy = 0.0;
  double norm_E_value = 0.0;
  double max_abs_value = 0.0;    // N_n = max_k |x(k)|
  double max_scaled_slope = 0.0; // Q_n = max_k n|dx(k-1)|
  std::vector<double> solution;  // nodal values x(0..n); empty when singular
  // I at the start iterate and after each accepted Newton step; strictly
  // decreasing by the Armijo condition.
  std::vector<double> energy_trace;
  SingularKind singular_kind = SingularKind::None;
};

// Raised when a required hypothesis check fails before a solve or study.
class AssumptionError : public std::runtime_error {
 public:
  AssumptionError(const AssumptionVerdict& verdict, const std::string& what)
      : std::runtime_error(what), verdict_(verdict) {}
  const AssumptionVerdict& verdict() const { return verdict_; }

 private:
  AssumptionVerdict verdict_;
};

enum class AssumptionPolicy { Enforce, Skip };

// Raised by orchestration layers (studies, references, verify runs) when an
// inner solve ends in a non-converged status.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(SolveStatus status, int n)
      : std::runtime_error("solve at n=" + std::to_string(n) +
                           " ended with status " + status_name(status)),
        status_(status),
        n_(n) {}
  SolveStatus status() const { return status_; }
  int n() const { return n_; }

 private:
  SolveStatus status_;
  int n_;
};

inline double energy(const DiscreteBVP& p, const GridFunction& x) {
  if (x.n() != p.n) throw std::invalid_argument("grid size mismatch");
  const double n = static_cast<double>(p.n);
  double quadratic = 0.0;
  for (int k = 1; k <= p.n; ++k) {
    const double d = delta(x, k);
    quadratic += 0.5 * d * d;
  }
  double potential = 0.0;
  for (int k = 1; k <= p.n - 1; ++k)
    potential += p.nl.F(static_cast<double>(k) / n, x[k]);
  return quadratic + potential / (n * n);
}

// Component j of the gradient: -d2x(j-1) + (1/n^2) f(j/n, x(j)).
inline GridFunction gradient(const DiscreteBVP& p, const GridFunction& x) {
  if (x.n() != p.n) throw std::invalid_argument("grid size mismatch");
  const double n = static_cast<double>(p.n);
  GridFunction g(p.n);
  for (int j = 1; j <= p.n - 1; ++j)
    g.set_interior(j, -delta2(x, j) +
                          p.nl.f(static_cast<double>(j) / n, x[j]) / (n * n));
  return g;
}

// Diagonal of the (n-1)x(n-1) Hessian; every off-diagonal entry is -1.
// d[j-1] = 2 + (1/n^2) df/dx(j/n, x(j)); positive definite whenever
// df/dx >= 0.
inline std::vector<double> hessian_tridiag(const DiscreteBVP& p,
                                           const GridFunction& x,
                                           DerivativeMode mode =
                                               DerivativeMode::Symbolic) {
  if (x.n() != p.n) throw std::invalid_argument("grid size mismatch");
  const double n = static_cast<double>(p.n);
  const bool fd = (mode == DerivativeMode::FiniteDifference) ||
                  (p.nl.derivative_mode() == DerivativeMode::FiniteDifference);
  std::vector<double> d(static_cast<size_t>(p.n) - 1);
  for (int j = 1; j <= p.n - 1; ++j) {
    const double t = static_cast<double>(j) / n;
    const double fx =
        fd ? p.nl.fx_finite_difference(t, x[j]) : p.nl.fx(t, x[j]);
    d[static_cast<size_t>(j) - 1] = 2.0 + fx / (n * n);
  }
  return d;
}

namespace detail {

inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline double max_abs_interior(const GridFunction& g) {
  double m = 0.0;
  for (int k = 1; k <= g.n() - 1; ++k) m = std::max(m, std::fabs(g[k]));
  return m;
}

inline void fill_report_from_grid(SolveReport& r, const GridFunction& x) {
  r.n = x.n();
  r.norm_E_value = norm_E(x);
  r.max_abs_value = max_norm(x);
  double q = 0.0;
  for (int k = 1; k <= x.n(); ++k)
    q = std::max(q, x.n() * std::fabs(delta(x, k)));
  r.max_scaled_slope = q;
  r.solution.assign(x.values().begin(), x.values().end());
}

inline void enforce_minimizer_assumptions(const Nonlinearity& nl) {
  const AssumptionVerdict h1 = check_H1(nl);
  if (!h1.pass)
    throw AssumptionError(
        h1,
        "assumption H1 failed: f(t,0) != 0 for t in [0,1] is violated at t=" +
            fmt_g(h1.witness->first));
  const AssumptionVerdict h2 = check_H2(nl);
  if (!h2.pass)
    throw AssumptionError(
        h2, "assumption H2 failed: f is not nondecreasing in x (witness t=" +
                fmt_g(h2.witness->first) +
                ", x=" + fmt_g(h2.witness->second) + ")");
}

}  // namespace detail

// Damped Newton descent on I from x0 (default: the zero function). Each step
// solves the tridiagonal Newton system directly and backtracks until the
// Armijo decrease condition holds. Under H1 the result is nontrivial, since
// the zero function has nonzero gradient.
inline SolveReport newton_solve(const DiscreteBVP& p,
                                const NewtonConfig& cfg = {},
                                const std::optional<GridFunction>& x0 = {},
                                AssumptionPolicy policy =
                                    AssumptionPolicy::Enforce) {
  if (!(cfg.residual_tol > 0.0) || !(cfg.backtrack_factor > 0.0) ||
      !(cfg.backtrack_factor < 1.0) || !(cfg.armijo_c > 0.0) ||
      !(cfg.armijo_c < 1.0) || cfg.max_iter < 0)
    throw std::invalid_argument("invalid Newton configuration");
  if (policy == AssumptionPolicy::Enforce)
    detail::enforce_minimizer_assumptions(p.nl);

  GridFunction x = x0 ? *x0 : GridFunction(p.n);
  if (x.n() != p.n) throw std::invalid_argument("start iterate size mismatch");

  SolveReport report;
  report.n = p.n;
  const int m = p.n - 1;

  double current_energy = energy(p, x);
  report.energy_trace.push_back(current_energy);

  GridFunction g = gradient(p, x);
  double residual = detail::max_abs_interior(g);

  int steps = 0;
  while (residual > cfg.residual_tol && steps < cfg.max_iter) {
    // Descent direction: Newton unless configured (or forced) otherwise.
    std::vector<double> direction(static_cast<size_t>(m));
    double slope = 0.0;  // directional derivative g.s; must be negative
    bool have_newton_direction = false;
    if (!cfg.gradient_descent) {
      const std::vector<double> diag =
          hessian_tridiag(p, x, cfg.derivative_mode);
      std::vector<double> rhs(static_cast<size_t>(m));
      for (int j = 1; j <= m; ++j) rhs[static_cast<size_t>(j) - 1] = -g[j];
      const TridiagResult ts = thomas_solve(diag, rhs);
      if (ts.singular) {
        report.status = SolveStatus::Singular;
        report.iterations = steps;
        report.final_residual = residual;
        report.energy = current_energy;
        detail::fill_report_from_grid(report, x);
        report.solution.clear();  // the iterate is not a solution
        return report;
      }
      direction = ts.solution;
      for (int j = 1; j <= m; ++j)
        slope += g[j] * direction[static_cast<size_t>(j) - 1];
      have_newton_direction = slope < 0.0;
    }
    if (!have_newton_direction) {
      // Steepest descent, used by the fallback mode and whenever an
      // (assumption-overridden) indefinite Hessian fails to give descent.
      slope = 0.0;
      for (int j = 1; j <= m; ++j) {
        direction[static_cast<size_t>(j) - 1] = -g[j];
        slope -= g[j] * g[j];
      }
    }

    double step = 1.0;
    GridFunction trial(p.n);
    double trial_energy = 0.0;
    bool accepted = false;
    while (step > 1e-18) {
      for (int j = 1; j <= m; ++j)
        trial.set_interior(j, x[j] + step * direction[static_cast<size_t>(j) -
                                                      1]);
      bool finite = true;
      try {
        trial_energy = energy(p, trial);
      } catch (const EvalError&) {
        finite = false;  // overshot into overflow; shorten the step
      }
      if (finite) {
        const double predicted = cfg.armijo_c * step * slope;
        // Near the minimum the predicted decrease drops below the energy's
        // rounding resolution and the sufficient-decrease test becomes
        // vacuous: the trial can sit one ulp above the current value even
        // though the step is (to machine precision) exactly right. Accept
        // any step that does not measurably increase the energy in that
        // regime, so the quadratically convergent full Newton step is not
        // rejected over a rounding tie and the iterate cannot freeze.
        const double resolution =
            4.0 * std::numeric_limits<double>::epsilon() *
            (std::fabs(current_energy) + std::fabs(trial_energy));
        if (trial_energy <= current_energy + predicted ||
            (std::fabs(predicted) <= resolution &&
             trial_energy <= current_energy + resolution)) {
          accepted = true;
          break;
        }
      }
      step *= cfg.backtrack_factor;
    }
    if (!accepted) break;  // line search stalled -> no convergence

    x = trial;
    current_energy = trial_energy;
    report.energy_trace.push_back(current_energy);
    g = gradient(p, x);
    residual = detail::max_abs_interior(g);
    ++steps;
  }

  report.status = (residual <= cfg.residual_tol) ? SolveStatus::Converged
                                                 : SolveStatus::NoConvergence;
  report.iterations = steps;
  report.final_residual = residual;
  report.energy = current_energy;
  detail::fill_report_from_grid(report, x);
  return report;
}

// Converts a zero-boundary report back into a grid function.
inline GridFunction to_grid_function(const SolveReport& r) {
  if (r.solution.size() != static_cast<size_t>(r.n) + 1)
    throw std::invalid_argument("report carries no solution");
  if (r.solution.front() != 0.0 || r.solution.back() != 0.0)
    throw std::invalid_argument("solution has nonzero boundary values");
  GridFunction x(r.n);
  for (int k = 1; k <= r.n - 1; ++k)
    x.set_interior(k, r.solution[static_cast<size_t>(k)]);
  return x;
}

// Solves the linear two-point problem d2x(k) + lambda x(k) = 0 with
// x(0) = alpha, x(n) = beta. When elimination hits the singular threshold,
// the report says whether the system is inconsistent (no solution) or
// consistent (infinitely many), decided against the null vector of the
// three-term recurrence.
inline SolveReport linear_bvp_solve(int n, double lambda, double alpha,
                                    double beta) {
  if (n < 2) throw std::invalid_argument("linear_bvp_solve requires n >= 2");
  const int m = n - 1;
  std::vector<double> diag(static_cast<size_t>(m), 2.0 - lambda);
  std::vector<double> rhs(static_cast<size_t>(m), 0.0);
  rhs.front() += alpha;
  rhs.back() += beta;

  SolveReport report;
  report.n = n;
  report.iterations = 1;

  const TridiagResult ts = thomas_solve(diag, rhs);
  if (ts.singular) {
    report.status = SolveStatus::Singular;
    // Null vector v of the tridiagonal operator: v(1)=1,
    // v(k+1) = (2-lambda) v(k) - v(k-1). The system is consistent iff the
    // right-hand side is orthogonal to it.
    std::vector<double> v(static_cast<size_t>(m));
    v[0] = 1.0;
    if (m > 1) v[1] = 2.0 - lambda;
    for (int k = 2; k < m; ++k)
      v[static_cast<size_t>(k)] = (2.0 - lambda) * v[static_cast<size_t>(k) -
                                                     1] -
                                  v[static_cast<size_t>(k) - 2];
    double vb = 0.0, vv = 0.0, bb = 0.0;
    for (int k = 0; k < m; ++k) {
      vb += v[static_cast<size_t>(k)] * rhs[static_cast<size_t>(k)];
      vv += v[static_cast<size_t>(k)] * v[static_cast<size_t>(k)];
      bb += rhs[static_cast<size_t>(k)] * rhs[static_cast<size_t>(k)];
    }
    const bool consistent =
        std::fabs(vb) <= 1e-10 * std::sqrt(vv) * std::sqrt(bb);
    report.singular_kind =
        consistent ? SingularKind::InfinitelyMany : SingularKind::NoSolution;
    return report;
  }

  std::vector<double> x(static_cast<size_t>(n) + 1);
  x[0] = alpha;
  x[static_cast<size_t>(n)] = beta;
  for (int k = 1; k <= m; ++k)
    x[static_cast<size_t>(k)] = ts.solution[static_cast<size_t>(k) - 1];

  double residual = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double r = x[static_cast<size_t>(k) + 1] -
                     2.0 * x[static_cast<size_t>(k)] +
                     x[static_cast<size_t>(k) - 1] +
                     lambda * x[static_cast<size_t>(k)];
    residual = std::max(residual, std::fabs(r));
  }

  double quadratic = 0.0, q = 0.0, max_abs = 0.0, sum_sq = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double d = x[static_cast<size_t>(k)] - x[static_cast<size_t>(k) - 1];
    quadratic += 0.5 * d * d;
    q = std::max(q, n * std::fabs(d));
  }
  for (int k = 0; k <= n; ++k)
    max_abs = std::max(max_abs, std::fabs(x[static_cast<size_t>(k)]));
  for (int k = 1; k <= m; ++k)
    sum_sq += x[static_cast<size_t>(k)] * x[static_cast<size_t>(k)];

  report.status = SolveStatus::Converged;
  report.final_residual = residual;
  report.energy = quadratic - 0.5 * lambda * sum_sq;
  report.norm_E_value = std::sqrt(2.0 * quadratic);
  report.max_abs_value = max_abs;
  report.max_scaled_slope = q;
  report.solution = std::move(x);
  return report;
}

}  // namespace nonspurious
