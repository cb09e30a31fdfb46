#pragma once

// The right-hand side f(t,x) packaged with its x-derivative and its
// antiderivative F(t,x) = ∫₀ˣ f(t,s) ds, plus the hypothesis checks the
// solver and analysis layers rely on:
//
//   H1:  f(t,0) != 0 for every t in [0,1]
//   H2:  f is nondecreasing in x
//   H2a: f(t,x) <= a + b|x|^gamma with gamma in [0,1)
//   relaxed convexity: x -> F(t,x) + (a/2pi) x^2 is convex
//
// All checks are sampled on configurable grids; a failing verdict always
// carries a witness point.

#include <cmath>
#include <istream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nonspurious/expr.hpp"
#include "nonspurious/quadrature.hpp"

namespace nonspurious {

enum class DerivativeMode { Symbolic, FiniteDifference };

struct H2aConstants {
  double a = 0.0;  // > 0
  double b = 0.0;  // > 0
  double gamma = 0.0;  // in [0, 1)
};

// Sampling grids for the hypothesis checks: t_samples points on [0,1] times
// x_samples points on [-x_range, x_range].
struct SamplingConfig {
  double x_range = 100.0;
  int t_samples = 201;
  int x_samples = 401;
};

class Nonlinearity {
 public:
  double f(double t, double x) const { return f_expr_.eval(t, x); }

  // df/dx: symbolic when the expression allows it, otherwise a central
  // difference with step 1e-6 * (1 + |x|).
  double fx(double t, double x) const {
    if (derivative_mode_ == DerivativeMode::Symbolic)
      return fx_expr_.eval(t, x);
    return fx_finite_difference(t, x);
  }

  // Central-difference derivative regardless of mode (for callers that
  // explicitly request finite differences).
  double fx_finite_difference(double t, double x) const {
    const double h = 1e-6 * (1.0 + std::fabs(x));
    return (f_expr_.eval(t, x + h) - f_expr_.eval(t, x - h)) / (2.0 * h);
  }

  double F(double t, double x) const {
    if (!F_expr_.empty()) return F_expr_.eval(t, x);
    return F_quadrature(t, x);
  }

  // Quadrature construction of the antiderivative, exposed separately so the
  // closed form can be cross-checked against it.
  double F_quadrature(double t, double x) const {
    return integrate([&](double s) { return f_expr_.eval(t, s); }, 0.0, x,
                     1e-12);
  }

  // max over t in [0,1] of |f(t,0)|.
  double c() const { return c_; }
  DerivativeMode derivative_mode() const { return derivative_mode_; }
  const std::optional<H2aConstants>& h2a() const { return h2a_; }
  const std::string& label() const { return label_; }
  bool has_closed_form_F() const { return !F_expr_.empty(); }
  const Expr& f_expr() const { return f_expr_; }

 private:
  friend Nonlinearity build(Expr, std::optional<Expr>,
                            std::optional<H2aConstants>, std::string);

  Expr f_expr_;
  Expr fx_expr_;  // empty in finite-difference mode
  Expr F_expr_;   // empty when F comes from quadrature
  DerivativeMode derivative_mode_ = DerivativeMode::Symbolic;
  double c_ = 0.0;
  std::optional<H2aConstants> h2a_;
  std::string label_ = "custom";
};

// Builds the bundle: derives df/dx symbolically (falling back to central
// differences when the expression contains abs), and computes
// c = max_t |f(t,0)| on a uniform 10001-point grid refined by golden-section
// search to 1e-10 in t.
inline Nonlinearity build(Expr f_expr, std::optional<Expr> F_expr = {},
                          std::optional<H2aConstants> h2a = {},
                          std::string label = "custom") {
  Nonlinearity nl;
  nl.f_expr_ = f_expr;
  if (F_expr) nl.F_expr_ = *F_expr;
  nl.h2a_ = h2a;
  nl.label_ = std::move(label);

  try {
    nl.fx_expr_ = f_expr.diff_x();
    nl.derivative_mode_ = DerivativeMode::Symbolic;
  } catch (const NonDifferentiableError&) {
    nl.derivative_mode_ = DerivativeMode::FiniteDifference;
  }

  constexpr int kGrid = 10001;
  auto f0 = [&](double t) { return std::fabs(f_expr.eval(t, 0.0)); };
  double best_t = 0.0, best = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double t = static_cast<double>(i) / (kGrid - 1);
    const double v = f0(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  const double cell = 1.0 / (kGrid - 1);
  const double lo = std::max(0.0, best_t - cell);
  const double hi = std::min(1.0, best_t + cell);
  const auto [t_ref, v_ref] = golden_section_max(f0, lo, hi, 1e-10);
  (void)t_ref;
  nl.c_ = std::max(best, v_ref);
  return nl;
}

inline Nonlinearity build(const std::string& f_text,
                          const std::optional<std::string>& F_text = {},
                          std::optional<H2aConstants> h2a = {},
                          std::string label = "custom") {
  std::optional<Expr> F_expr;
  if (F_text) F_expr = Expr::parse(*F_text);
  return build(Expr::parse(f_text), F_expr, std::move(h2a), std::move(label));
}

// ---------------------------------------------------------------------------
// Hypothesis checks
// ---------------------------------------------------------------------------

enum class Hypothesis { H1, H2, H2a, RelaxedConvexity };

inline const char* hypothesis_name(Hypothesis h) {
  switch (h) {
    case Hypothesis::H1: return "H1";
    case Hypothesis::H2: return "H2";
    case Hypothesis::H2a: return "H2a";
    case Hypothesis::RelaxedConvexity: return "RelaxedConvexity";
  }
  return "?";
}

struct AssumptionVerdict {
  Hypothesis hypothesis = Hypothesis::H1;
  bool pass = false;
  std::optional<std::pair<double, double>> witness;  // (t, x) of a failure
  long sampled_points = 0;
  double c = 0.0;  // filled by check_H1
};

// H1: |f(t,0)| > 1e-12 at every point of a uniform 10001-point t-grid.
inline AssumptionVerdict check_H1(const Nonlinearity& nl) {
  AssumptionVerdict v;
  v.hypothesis = Hypothesis::H1;
  v.pass = true;
  v.c = nl.c();
  constexpr int kGrid = 10001;
  v.sampled_points = kGrid;
  for (int i = 0; i < kGrid; ++i) {
    const double t = static_cast<double>(i) / (kGrid - 1);
    if (std::fabs(nl.f(t, 0.0)) <= 1e-12) {
      v.pass = false;
      v.witness = {t, 0.0};
      break;
    }
  }
  return v;
}

namespace detail {

// Scans the t-by-x sampling grid, stopping at the first point where
// `violates` is true; returns a verdict with that witness.
template <class Violates>
AssumptionVerdict scan_grid(Hypothesis h, const SamplingConfig& cfg,
                            const Violates& violates) {
  if (cfg.t_samples < 2 || cfg.x_samples < 2 || cfg.x_range <= 0.0)
    throw std::invalid_argument("sampling grid needs >= 2 points per axis");
  AssumptionVerdict v;
  v.hypothesis = h;
  v.pass = true;
  v.sampled_points =
      static_cast<long>(cfg.t_samples) * static_cast<long>(cfg.x_samples);
  for (int i = 0; i < cfg.t_samples; ++i) {
    const double t = static_cast<double>(i) / (cfg.t_samples - 1);
    for (int j = 0; j < cfg.x_samples; ++j) {
      const double x = -cfg.x_range + 2.0 * cfg.x_range *
                                          static_cast<double>(j) /
                                          (cfg.x_samples - 1);
      if (violates(t, x)) {
        v.pass = false;
        v.witness = {t, x};
        return v;
      }
    }
  }
  return v;
}

}  // namespace detail

// H2: df/dx >= -1e-9 on the sampling grid (nondecreasing up to round-off).
inline AssumptionVerdict check_H2(const Nonlinearity& nl,
                                  const SamplingConfig& cfg = {}) {
  return detail::scan_grid(Hypothesis::H2, cfg, [&](double t, double x) {
    return nl.fx(t, x) < -1e-9;
  });
}

// H2a: f(t,x) <= a + b|x|^gamma + 1e-9 on the sampling grid.
inline AssumptionVerdict check_H2a(const Nonlinearity& nl,
                                   const SamplingConfig& cfg = {}) {
  if (!nl.h2a())
    throw std::logic_error("check_H2a requires (a, b, gamma) constants");
  const auto [a, b, gamma] = *nl.h2a();
  return detail::scan_grid(
      Hypothesis::H2a, cfg, [&, a = a, b = b, gamma = gamma](double t,
                                                             double x) {
        return nl.f(t, x) > a + b * std::pow(std::fabs(x), gamma) + 1e-9;
      });
}

// Relaxed convexity: the centered second difference (step 1e-3) of
// x -> F(t,x) + (a/2pi) x^2 is >= -1e-8 on the sampling grid.
inline AssumptionVerdict check_relaxed_convexity(const Nonlinearity& nl,
                                                 double a,
                                                 const SamplingConfig& cfg =
                                                     {}) {
  if (!(a > 0.0 && a < 1.0))
    throw std::invalid_argument("relaxed convexity constant must be in (0,1)");
  const double coef = a / (2.0 * std::numbers::pi);
  constexpr double h = 1e-3;
  auto G = [&](double t, double x) { return nl.F(t, x) + coef * x * x; };
  return detail::scan_grid(
      Hypothesis::RelaxedConvexity, cfg, [&](double t, double x) {
        const double second = G(t, x + h) - 2.0 * G(t, x) + G(t, x - h);
        return second < -1e-8;
      });
}

// ---------------------------------------------------------------------------
// Catalogue
// ---------------------------------------------------------------------------

struct CatalogueEntry {
  const char* name;
  const char* f;
  const char* F;  // closed-form antiderivative
  bool has_h2a;
  double a, b, gamma;
  // The linear family stands in for -lambda*n^2*x and is consumed only by
  // the linear demo path, never by the minimizer (it violates H1 and H2).
  bool linear_path_only;
};

inline const std::vector<CatalogueEntry>& catalogue_entries() {
  static const std::vector<CatalogueEntry> entries = {
      {"affine", "x + 1", "x^2/2 + x",
       false, 0.0, 0.0, 0.0, false},
      {"exp", "(1 + t^2) * exp(x - t^2)", "(1 + t^2) * exp(-t^2) * (exp(x) - 1)",
       false, 0.0, 0.0, 0.0, false},
      {"atan", "(1 + t^2) * atan(x)",
       "(1 + t^2) * (x * atan(x) - log(1 + x^2)/2)",
       true, std::numbers::pi, 1.0, 0.0, false},
      {"cubic", "(1 + t^2) * x^3 + exp(x - t^2)",
       "(1 + t^2) * x^4/4 + exp(-t^2) * (exp(x) - 1)",
       false, 0.0, 0.0, 0.0, false},
      {"sqrt", "sqrt(abs(x)) + 1", "2/3 * x * sqrt(abs(x)) + x",
       true, 1.0, 1.0, 0.5, false},
      {"linear", "-x", "-x^2/2",
       false, 0.0, 0.0, 0.0, true},
  };
  return entries;
}

inline std::vector<std::string> catalogue_names() {
  std::vector<std::string> names;
  for (const auto& e : catalogue_entries()) names.emplace_back(e.name);
  return names;
}

inline const CatalogueEntry* find_catalogue_entry(const std::string& name) {
  for (const auto& e : catalogue_entries())
    if (name == e.name) return &e;
  return nullptr;
}

inline Nonlinearity make_catalogue(const std::string& name) {
  const CatalogueEntry* e = find_catalogue_entry(name);
  if (!e) throw std::invalid_argument("unknown catalogue entry '" + name + "'");
  std::optional<H2aConstants> h2a;
  if (e->has_h2a) h2a = H2aConstants{e->a, e->b, e->gamma};
  return build(std::string(e->f), std::string(e->F), h2a, e->name);
}

// ---------------------------------------------------------------------------
// Problem configuration file: line-oriented key=value, UTF-8.
// Keys: f, F, a, b, gamma, xrange, tsamples, xsamples.
// Blank lines and lines starting with '#' are ignored.
// ---------------------------------------------------------------------------

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  std::optional<std::string> f, F;
  std::optional<double> a, b, gamma, xrange;
  std::optional<int> tsamples, xsamples;
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double config_number(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': malformed number '" + value +
                      "'");
  }
}

inline int config_integer(const std::string& key, const std::string& value) {
  const double v = config_number(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      value + "'");
  return i;
}

}  // namespace detail

inline ProblemConfig parse_config(std::istream& is) {
  ProblemConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key == "f")
      cfg.f = value;
    else if (key == "F")
      cfg.F = value;
    else if (key == "a")
      cfg.a = detail::config_number(key, value);
    else if (key == "b")
      cfg.b = detail::config_number(key, value);
    else if (key == "gamma")
      cfg.gamma = detail::config_number(key, value);
    else if (key == "xrange")
      cfg.xrange = detail::config_number(key, value);
    else if (key == "tsamples")
      cfg.tsamples = detail::config_integer(key, value);
    else if (key == "xsamples")
      cfg.xsamples = detail::config_integer(key, value);
    else
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
  }
  return cfg;
}

}  // namespace nonspurious
