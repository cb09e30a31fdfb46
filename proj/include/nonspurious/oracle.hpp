#pragma once

// Reference values x(t) of the continuous problem, used to measure the error
// of discrete solutions: closed forms where known, otherwise a fine-grid
// solve pair combined by Richardson extrapolation.
//
// Closed forms are self-checked at construction: a Richardson-extrapolated
// five-point second difference of the candidate must satisfy the ODE
// residual |x''(t) - f(t, x(t))| <= 1e-8 at 1001 sample points. (A plain
// three-point stencil cannot certify 1e-8 in double precision.)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nonspurious/solver.hpp"

namespace nonspurious {

class Oracle {
 public:
  enum class Kind { ClosedForm, FineGrid };

  Kind kind() const { return kind_; }
  const std::string& provenance() const { return provenance_; }

  // Reference value at t. Closed forms evaluate their formula anywhere;
  // the fine-grid oracle interpolates and only accepts t in [0, 1].
  double operator()(double t) const {
    if (kind_ == Kind::ClosedForm) return closed_eval_(t);
    if (t < 0.0 || t > 1.0)
      throw std::out_of_range("fine-grid oracle sampled outside [0, 1]");
    // Nodes are uniform: find the cell and interpolate linearly. Study
    // schedules only ever sample at shared nodes, where this is exact.
    const size_t cells = knots_.size() - 1;
    const double pos = t * static_cast<double>(cells);
    size_t i = std::min(static_cast<size_t>(pos), cells - 1);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * values_[i] + w * values_[i + 1];
  }

  // Sample table as CSV rows "t,value".
  void write_csv(std::ostream& os) const {
    os << "t,value\n";
    char buf[64];
    for (size_t i = 0; i < knots_.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", knots_[i]);
      os << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", values_[i]);
      os << buf << '\n';
    }
  }

  // Closed-form reference for a catalogue problem. Known names:
  //   "affine"  -> x(t) = cosh(t - 1/2)/cosh(1/2) - 1   (for f = x + 1)
  static Oracle closed_form(const std::string& name) {
    if (name == "affine") {
      auto x = [](double t) {
        return std::cosh(t - 0.5) / std::cosh(0.5) - 1.0;
      };
      auto f = [](double t, double xv) {
        (void)t;
        return xv + 1.0;
      };
      Oracle o;
      o.kind_ = Kind::ClosedForm;
      o.provenance_ = "closed form cosh(t - 1/2)/cosh(1/2) - 1";
      o.closed_eval_ = x;
      o.verify_ode_residual(x, f, 0.0, 1.0);
      o.tabulate(0.0, 1.0, 1001);
      return o;
    }
    throw std::invalid_argument("no closed-form reference named '" + name +
                                "'");
  }

  // Closed form for the second linear demo problem: x'' + (pi^2/4n^2) x = 0
  // on [0, n] with x(0) = 0, x(n) = 1, solved by x(t) = sin(pi t / 2n).
  static Oracle example1_case2(int n) {
    if (n < 2) throw std::invalid_argument("example1_case2 requires n >= 2");
    const double w = std::numbers::pi / (2.0 * n);
    auto x = [w](double t) { return std::sin(w * t); };
    auto f = [w](double t, double xv) {
      (void)t;
      return -(w * w) * xv;
    };
    Oracle o;
    o.kind_ = Kind::ClosedForm;
    o.provenance_ = "closed form sin(pi t / 2n), n = " + std::to_string(n);
    o.closed_eval_ = x;
    o.verify_ode_residual(x, f, 0.0, static_cast<double>(n));
    o.tabulate(0.0, static_cast<double>(n), 1001);
    return o;
  }

  // Solves the discrete problem at n_ref and 2 n_ref and serves the
  // Richardson combination (4 x_{2n_ref}(2k) - x_{n_ref}(k)) / 3 at the
  // shared nodes k / n_ref, linearly interpolated in between.
  static Oracle fine_grid_reference(const DiscreteBVP& p, int n_ref,
                                    const NewtonConfig& cfg = {},
                                    AssumptionPolicy policy =
                                        AssumptionPolicy::Enforce) {
    if (n_ref < 4096 || (n_ref & (n_ref - 1)) != 0)
      throw std::invalid_argument(
          "fine-grid reference requires n_ref a power of two >= 4096");
    if (policy == AssumptionPolicy::Enforce)
      detail::enforce_minimizer_assumptions(p.nl);

    auto solve_level = [&](int n) {
      const SolveReport r = newton_solve(DiscreteBVP(n, p.nl), cfg, {},
                                         AssumptionPolicy::Skip);
      if (r.status != SolveStatus::Converged)
        throw SolveFailure(r.status, n);
      return r.solution;
    };
    const std::vector<double> coarse = solve_level(n_ref);
    const std::vector<double> fine = solve_level(2 * n_ref);

    Oracle o;
    o.kind_ = Kind::FineGrid;
    o.provenance_ = "Richardson fine-grid reference, n_ref = " +
                    std::to_string(n_ref) + " and " + std::to_string(2 * n_ref);
    o.knots_.resize(static_cast<size_t>(n_ref) + 1);
    o.values_.resize(static_cast<size_t>(n_ref) + 1);
    for (int k = 0; k <= n_ref; ++k) {
      o.knots_[static_cast<size_t>(k)] =
          static_cast<double>(k) / static_cast<double>(n_ref);
      o.values_[static_cast<size_t>(k)] =
          (4.0 * fine[static_cast<size_t>(2 * k)] -
           coarse[static_cast<size_t>(k)]) /
          3.0;
    }
    return o;
  }

 private:
  Oracle() = default;

  template <class X, class F>
  void verify_ode_residual(const X& x, const F& f, double t_lo,
                           double t_hi) const {
    constexpr double h = 2e-3;
    constexpr int kSamples = 1000;
    auto second_difference = [&](double t, double step) {
      return (x(t + step) - 2.0 * x(t) + x(t - step)) / (step * step);
    };
    for (int i = 0; i <= kSamples; ++i) {
      const double t = t_lo + (t_hi - t_lo) * static_cast<double>(i) /
                                  static_cast<double>(kSamples);
      const double coarse = second_difference(t, h);
      const double fine = second_difference(t, 0.5 * h);
      const double xdd = (4.0 * fine - coarse) / 3.0;
      if (std::fabs(xdd - f(t, x(t))) > 1e-8)
        throw std::logic_error(
            "closed-form reference fails its ODE residual check at t=" +
            std::to_string(t));
    }
  }

  void tabulate(double t_lo, double t_hi, int samples) {
    knots_.resize(static_cast<size_t>(samples));
    values_.resize(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i) {
      const double t = t_lo + (t_hi - t_lo) * static_cast<double>(i) /
                                  static_cast<double>(samples - 1);
      knots_[static_cast<size_t>(i)] = t;
      values_[static_cast<size_t>(i)] = closed_eval_(t);
    }
  }

  Kind kind_ = Kind::ClosedForm;
  std::string provenance_;
  std::function<double(double)> closed_eval_;
  std::vector<double> knots_, values_;
};

}  // namespace nonspurious
