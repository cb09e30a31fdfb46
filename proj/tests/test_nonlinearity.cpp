#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nonspurious/nonlinearity.hpp"
#include "oracles.hpp"

using nonspurious::AssumptionVerdict;
using nonspurious::build;
using nonspurious::check_H1;
using nonspurious::check_H2;
using nonspurious::check_H2a;
using nonspurious::check_relaxed_convexity;
using nonspurious::ConfigError;
using nonspurious::DerivativeMode;
using nonspurious::H2aConstants;
using nonspurious::make_catalogue;
using nonspurious::Nonlinearity;

TEST_CASE("antiderivative from quadrature matches hand values") {
  const Nonlinearity affine = build("x + 1");  // F = x^2/2 + x by hand
  CHECK_FALSE(affine.has_closed_form_F());
  CHECK(affine.F(0.3, 2.0) == Catch::Approx(4.0).margin(1e-12));
  CHECK(affine.F(0.3, -2.0) == Catch::Approx(0.0).margin(1e-12));

  const Nonlinearity sq = build("3 * x^2");  // F = x^3
  CHECK(sq.F(0.0, 2.0) == Catch::Approx(8.0).margin(1e-11));
  CHECK(sq.F(0.0, -2.0) == Catch::Approx(-8.0).margin(1e-11));

  const Nonlinearity ex = build("exp(x - t^2)");  // F(0,1) = e - 1
  CHECK(ex.F(0.0, 1.0) ==
        Catch::Approx(std::exp(1.0) - 1.0).margin(1e-10));
}

TEST_CASE("the antiderivative vanishes at zero") {
  for (const char* f : {"x + 1", "atan(x) + 1", "sqrt(abs(x)) + 1"}) {
    const Nonlinearity nl = build(f);
    for (double t : {0.0, 0.25, 1.0}) CHECK(nl.F(t, 0.0) == 0.0);
  }
  for (const auto& entry : nonspurious::catalogue_entries()) {
    const Nonlinearity nl = make_catalogue(entry.name);
    for (double t : {0.0, 0.5, 1.0})
      CHECK(nl.F(t, 0.0) == Catch::Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("closed-form antiderivatives agree with quadrature") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  for (const auto& entry : nonspurious::catalogue_entries()) {
    const Nonlinearity nl = make_catalogue(entry.name);
    REQUIRE(nl.has_closed_form_F());
    for (int i = 0; i < 25; ++i) {
      const double t = ut(rng);
      const double x = ux(rng);
      const double closed = nl.F(t, x);
      const double quad = nl.F_quadrature(t, x);
      INFO(entry.name << " at t=" << t << " x=" << x);
      CHECK_THAT(quad, Catch::Matchers::WithinAbs(
                           closed, 1e-10 * (1.0 + std::fabs(closed))));
    }
  }
}

TEST_CASE("quadrature agrees with composite Simpson on a smooth integrand") {
  const Nonlinearity nl = build("atan(x) + 1");
  for (double x : {-2.5, -0.5, 0.75, 3.0}) {
    const double quad = nl.F_quadrature(0.0, x);
    const double simp = testoracle::simpson(
        [](double s) { return std::atan(s) + 1.0; }, 0.0, x, 4000);
    CHECK_THAT(quad, Catch::Matchers::WithinAbs(simp, 1e-9));
  }
}

TEST_CASE("c is the sup of |f(t,0)| over the unit interval") {
  CHECK(build("x + 1").c() == Catch::Approx(1.0).margin(1e-12));
  CHECK(build("atan(x) + 1").c() == Catch::Approx(1.0).margin(1e-12));
  // max of sin(3t) + 2 on [0,1] is 3, attained at t = pi/6 (interior;
  // exercises the golden-section refinement).
  CHECK(build("sin(3*t) + 2").c() == Catch::Approx(3.0).margin(1e-10));
  CHECK(build("1 - 2*t").c() == Catch::Approx(1.0).margin(1e-12));
  CHECK(make_catalogue("affine").c() == Catch::Approx(1.0).margin(1e-12));
  CHECK(make_catalogue("exp").c() == Catch::Approx(1.0).margin(1e-12));
  CHECK(make_catalogue("cubic").c() == Catch::Approx(1.0).margin(1e-12));
  CHECK(make_catalogue("sqrt").c() == Catch::Approx(1.0).margin(1e-12));
  CHECK(make_catalogue("atan").c() == 0.0);
  CHECK(make_catalogue("linear").c() == 0.0);
}

TEST_CASE("nonvanishing check accepts and rejects the right entries") {
  for (const char* name : {"affine", "exp", "cubic", "sqrt"}) {
    const AssumptionVerdict v = check_H1(make_catalogue(name));
    INFO(name);
    CHECK(v.pass);
    CHECK_FALSE(v.witness.has_value());
    CHECK(v.sampled_points == 10001);
    CHECK(v.c > 0.0);
  }
  for (const char* name : {"atan", "linear"}) {
    const AssumptionVerdict v = check_H1(make_catalogue(name));
    INFO(name);
    CHECK_FALSE(v.pass);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->first == 0.0);
    CHECK(v.witness->second == 0.0);
  }
}

TEST_CASE("monotonicity check accepts and rejects the right entries") {
  for (const char* name : {"affine", "exp", "cubic", "atan"}) {
    const AssumptionVerdict v = check_H2(make_catalogue(name));
    INFO(name);
    CHECK(v.pass);
    CHECK(v.sampled_points == 201L * 401L);
  }
  for (const char* name : {"sqrt", "linear"}) {
    const AssumptionVerdict v = check_H2(make_catalogue(name));
    INFO(name);
    CHECK_FALSE(v.pass);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->first == 0.0);
    CHECK(v.witness->second == -100.0);
  }
}

TEST_CASE("growth check matches its defining examples") {
  // atan is bounded by pi/2, so (a, b, gamma) = (pi/2, 1, 0) works.
  const Nonlinearity bounded =
      build("atan(x)", {}, H2aConstants{std::numbers::pi / 2.0, 1.0, 0.0});
  CHECK(check_H2a(bounded).pass);

  // The sublinear catalogue entry satisfies its bound with equality.
  CHECK(check_H2a(make_catalogue("sqrt")).pass);
  CHECK(check_H2a(make_catalogue("atan")).pass);

  // Identity grows linearly, so no sublinear bound can hold for large x.
  const Nonlinearity ident = build("x", {}, H2aConstants{1.0, 1.0, 0.5});
  const AssumptionVerdict v = check_H2a(ident);
  CHECK_FALSE(v.pass);
  REQUIRE(v.witness.has_value());
  CHECK(v.witness->second > 1.0);
  CHECK(ident.f(v.witness->first, v.witness->second) >
        1.0 + std::sqrt(v.witness->second));
}

TEST_CASE("growth check requires constants") {
  CHECK_THROWS_AS(check_H2a(make_catalogue("affine")), std::logic_error);
  CHECK_THROWS_AS(check_H2a(build("x + 1")), std::logic_error);
}

TEST_CASE("relaxed convexity check separates slopes around its threshold") {
  // F = -x^2/8; adding (a/2pi) x^2 is convex iff a/(2 pi) >= 1/8.
  const Nonlinearity nl = build("-x/4");
  CHECK_FALSE(check_relaxed_convexity(nl, 0.5).pass);
  CHECK(check_relaxed_convexity(nl, 0.99).pass);
  CHECK(check_relaxed_convexity(make_catalogue("affine"), 0.5).pass);
  CHECK_THROWS_AS(check_relaxed_convexity(nl, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_relaxed_convexity(nl, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_relaxed_convexity(nl, -0.5), std::invalid_argument);
}

TEST_CASE("nondecreasing integrands give potentials below their chord bound") {
  // For nondecreasing f, convexity of F gives F(t,x) <= x f(t,x).
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  std::uniform_real_distribution<double> ux(-4.0, 4.0);
  for (const char* name : {"affine", "exp", "cubic", "atan"}) {
    const Nonlinearity nl = make_catalogue(name);
    for (int i = 0; i < 200; ++i) {
      const double t = ut(rng);
      const double x = ux(rng);
      const double lhs = nl.F(t, x);
      const double rhs = x * nl.f(t, x);
      INFO(name << " t=" << t << " x=" << x);
      CHECK(lhs <= rhs + 1e-9 * (1.0 + std::fabs(rhs)));
    }
  }
}

TEST_CASE("growth constants bound the potential on either sign of x") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  std::uniform_real_distribution<double> ux(0.0, 50.0);
  for (const char* name : {"sqrt", "atan"}) {
    const Nonlinearity nl = make_catalogue(name);
    REQUIRE(nl.h2a().has_value());
    const auto [a, b, gamma] = *nl.h2a();
    for (int i = 0; i < 200; ++i) {
      const double t = ut(rng);
      const double x = ux(rng);
      const double cap = a * x + b * std::pow(x, gamma + 1.0) / (gamma + 1.0);
      CHECK(nl.F(t, x) <= cap + 1e-9 * (1.0 + cap));
      CHECK(nl.F(t, -x) >= -cap - 1e-9 * (1.0 + cap));
    }
  }
}

TEST_CASE("derivatives fall back to finite differences only when they must") {
  const Nonlinearity sq = make_catalogue("sqrt");
  CHECK(sq.derivative_mode() == DerivativeMode::FiniteDifference);
  CHECK_FALSE(sq.f_expr().differentiable_in_x());
  CHECK(sq.fx(0.5, 4.0) == sq.fx_finite_difference(0.5, 4.0));
  CHECK(sq.fx(0.0, 4.0) == Catch::Approx(0.25).margin(1e-5));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  for (const char* name : {"affine", "exp", "atan", "cubic", "linear"}) {
    const Nonlinearity nl = make_catalogue(name);
    REQUIRE(nl.derivative_mode() == DerivativeMode::Symbolic);
    for (int i = 0; i < 100; ++i) {
      const double t = ut(rng);
      const double x = ux(rng);
      const double sym = nl.fx(t, x);
      const double fd = nl.fx_finite_difference(t, x);
      INFO(name << " t=" << t << " x=" << x);
      CHECK_THAT(fd, Catch::Matchers::WithinAbs(sym, 1e-5 * (1.0 +
                                                             std::fabs(sym))));
    }
  }
}

TEST_CASE("catalogue lookups are total over the published names") {
  const auto names = nonspurious::catalogue_names();
  REQUIRE(names.size() == 6);
  CHECK(names == std::vector<std::string>{"affine", "exp", "atan", "cubic",
                                          "sqrt", "linear"});
  for (const auto& name : names) {
    CHECK(make_catalogue(name).label() == name);
    CHECK(nonspurious::find_catalogue_entry(name) != nullptr);
  }
  CHECK(nonspurious::find_catalogue_entry("nope") == nullptr);
  CHECK_THROWS_AS(make_catalogue("nope"), std::invalid_argument);
  CHECK(build("x + 1").label() == "custom");
  CHECK(nonspurious::find_catalogue_entry("linear")->linear_path_only);
  CHECK_FALSE(nonspurious::find_catalogue_entry("affine")->linear_path_only);
}

TEST_CASE("config files parse keys, comments, and blank lines") {
  std::istringstream good(
      "# sample configuration\n"
      "\n"
      "f = atan(x) + 1\n"
      "F= x*atan(x) - log(1 + x^2)/2 + x\n"
      "a = 2.5708\n"
      "b=1\n"
      "gamma = 0\n"
      "xrange = 50\n"
      "tsamples = 101\n"
      "  xsamples = 201  \n");
  const nonspurious::ProblemConfig cfg = nonspurious::parse_config(good);
  REQUIRE(cfg.f.has_value());
  CHECK(*cfg.f == "atan(x) + 1");
  REQUIRE(cfg.F.has_value());
  CHECK(*cfg.F == "x*atan(x) - log(1 + x^2)/2 + x");
  CHECK(*cfg.a == 2.5708);
  CHECK(*cfg.b == 1.0);
  CHECK(*cfg.gamma == 0.0);
  CHECK(*cfg.xrange == 50.0);
  CHECK(*cfg.tsamples == 101);
  CHECK(*cfg.xsamples == 201);

  std::istringstream empty("# only a comment\n\n");
  const nonspurious::ProblemConfig none = nonspurious::parse_config(empty);
  CHECK_FALSE(none.f.has_value());
  CHECK_FALSE(none.a.has_value());
}

TEST_CASE("config errors carry enough context to locate the problem") {
  std::istringstream missing_eq("f = x + 1\nno equals sign here\n");
  CHECK_THROWS_WITH(nonspurious::parse_config(missing_eq),
                    Catch::Matchers::ContainsSubstring("line 2"));

  std::istringstream unknown("f = x + 1\n\nwidget = 3\n");
  CHECK_THROWS_WITH(nonspurious::parse_config(unknown),
                    Catch::Matchers::ContainsSubstring("unknown key"));

  std::istringstream bad_number("a = not-a-number\n");
  CHECK_THROWS_WITH(nonspurious::parse_config(bad_number),
                    Catch::Matchers::ContainsSubstring("malformed number"));

  std::istringstream frac_samples("tsamples = 10.5\n");
  CHECK_THROWS_AS(nonspurious::parse_config(frac_samples), ConfigError);
}

TEST_CASE("hypothesis names are stable identifiers") {
  using nonspurious::Hypothesis;
  CHECK(std::string(nonspurious::hypothesis_name(Hypothesis::H1)) == "H1");
  CHECK(std::string(nonspurious::hypothesis_name(Hypothesis::H2)) == "H2");
  CHECK(std::string(nonspurious::hypothesis_name(Hypothesis::H2a)) == "H2a");
  CHECK(std::string(nonspurious::hypothesis_name(
            Hypothesis::RelaxedConvexity)) == "RelaxedConvexity");
}

TEST_CASE("custom sampling grids are honored and validated") {
  nonspurious::SamplingConfig tight;
  tight.x_range = 2.0;
  tight.t_samples = 11;
  tight.x_samples = 21;
  const AssumptionVerdict v = check_H2(make_catalogue("affine"), tight);
  CHECK(v.pass);
  CHECK(v.sampled_points == 11L * 21L);

  nonspurious::SamplingConfig bad;
  bad.t_samples = 1;
  CHECK_THROWS_AS(check_H2(make_catalogue("affine"), bad),
                  std::invalid_argument);
}
