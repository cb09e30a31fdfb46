#pragma once

// CSV and JSON emitters for every report type. All floating-point values are
// printed with %.17g (or nlohmann's shortest round-trip form in JSON), so
// identical inputs always serialize to identical bytes.

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nonspurious/analysis.hpp"
#include "nonspurious/nonlinearity.hpp"
#include "nonspurious/solver.hpp"

namespace nonspurious {

using ordered_json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline const char* bool_name(bool b) { return b ? "true" : "false"; }

// ---------------------------------------------------------------------------
// SolveReport
// ---------------------------------------------------------------------------

inline ordered_json solve_report_to_json(const SolveReport& r,
                                         bool include_solution = true) {
  ordered_json j;
  j["n"] = r.n;
  j["status"] = status_name(r.status);
  j["iterations"] = r.iterations;
  j["residual"] = r.final_residual;
  j["energy"] = r.energy;
  j["norm_E"] = r.norm_E_value;
  j["N_n"] = r.max_abs_value;
  j["Q_n"] = r.max_scaled_slope;
  if (include_solution && !r.solution.empty()) j["solution"] = r.solution;
  return j;
}

// Grid table of the solution plus a summary footer.
inline void write_solve_csv(std::ostream& os, const SolveReport& r) {
  os << "k,t,value\n";
  const int n = r.n;
  for (size_t k = 0; k < r.solution.size(); ++k) {
    const double t = static_cast<double>(k) / n;
    os << k << ',' << fmt17(t) << ',' << fmt17(r.solution[k]) << '\n';
  }
  os << "# status=" << status_name(r.status) << '\n';
  if (r.status == SolveStatus::Singular)
    os << "# consistency=" << singular_kind_name(r.singular_kind) << '\n';
  os << "# iterations=" << r.iterations << '\n';
  os << "# residual=" << fmt17(r.final_residual) << '\n';
  os << "# energy=" << fmt17(r.energy) << '\n';
  os << "# norm_E=" << fmt17(r.norm_E_value) << '\n';
  os << "# N_n=" << fmt17(r.max_abs_value) << '\n';
  os << "# Q_n=" << fmt17(r.max_scaled_slope) << '\n';
}

// ---------------------------------------------------------------------------
// ConvergenceReport
// ---------------------------------------------------------------------------

inline void write_study_csv(std::ostream& os, const ConvergenceReport& r) {
  os << "n,e_n,Q_n,N_n,norm_E,iterations\n";
  for (const auto& row : r.rows)
    os << row.n << ',' << fmt17(row.e_n) << ',' << fmt17(row.Q_n) << ','
       << fmt17(row.N_n) << ',' << fmt17(row.norm_E) << ',' << row.iterations
       << '\n';
  os << "# rate=" << fmt17(r.rate) << '\n';
  os << "# r2=" << fmt17(r.r2) << '\n';
  os << "# verdict.converging=" << verdict_name(r.converging) << '\n';
  os << "# verdict.uniform_bounds=" << verdict_name(r.uniform_bounds) << '\n';
  os << "# verdict.max_bound=" << verdict_name(r.max_bound) << '\n';
  os << "# verdict.norm_bound=" << verdict_name(r.norm_bound) << '\n';
}

inline ordered_json study_to_json(const ConvergenceReport& r) {
  ordered_json j;
  j["rows"] = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json jr;
    jr["n"] = row.n;
    jr["e_n"] = row.e_n;
    jr["Q_n"] = row.Q_n;
    jr["N_n"] = row.N_n;
    jr["norm_E"] = row.norm_E;
    jr["iterations"] = row.iterations;
    j["rows"].push_back(jr);
  }
  j["rate"] = r.rate;
  j["r2"] = r.r2;
  j["c"] = r.c;
  ordered_json verdicts;
  verdicts["converging"] = verdict_name(r.converging);
  verdicts["uniform_bounds"] = verdict_name(r.uniform_bounds);
  verdicts["max_bound"] = verdict_name(r.max_bound);
  verdicts["norm_bound"] = verdict_name(r.norm_bound);
  j["verdicts"] = verdicts;
  return j;
}

// ---------------------------------------------------------------------------
// Assumption check verdicts
// ---------------------------------------------------------------------------

inline void write_checks_csv(std::ostream& os,
                             const std::vector<AssumptionVerdict>& checks) {
  os << "hypothesis,pass,witness_t,witness_x,samples,c\n";
  for (const auto& v : checks) {
    os << hypothesis_name(v.hypothesis) << ',' << bool_name(v.pass) << ',';
    if (v.witness)
      os << fmt17(v.witness->first) << ',' << fmt17(v.witness->second);
    else
      os << ',';
    os << ',' << v.sampled_points << ',' << fmt17(v.c) << '\n';
  }
}

inline ordered_json checks_to_json(
    const std::vector<AssumptionVerdict>& checks) {
  ordered_json j;
  j["checks"] = ordered_json::array();
  for (const auto& v : checks) {
    ordered_json jc;
    jc["hypothesis"] = hypothesis_name(v.hypothesis);
    jc["pass"] = v.pass;
    if (v.witness) {
      jc["witness"] = {{"t", v.witness->first}, {"x", v.witness->second}};
    } else {
      jc["witness"] = nullptr;
    }
    jc["samples"] = v.sampled_points;
    jc["c"] = v.c;
    j["checks"].push_back(jc);
  }
  return j;
}

// ---------------------------------------------------------------------------
// VerifyReport
// ---------------------------------------------------------------------------

inline void write_verify_csv(std::ostream& os, const VerifyReport& r) {
  const bool h2a = !r.rows.empty() && r.rows.front().h2a.has_value();
  os << "n,iterations,norm_E,N_n,Q_n,norm_bound,embed_bound,max_bound";
  if (h2a) os << ",coercivity,h2a_max_bound,max_le_2a,n0";
  os << '\n';
  for (const auto& row : r.rows) {
    os << row.n << ',' << row.iterations << ',' << fmt17(row.norm_E) << ','
       << fmt17(row.N_n) << ',' << fmt17(row.Q_n) << ','
       << bool_name(row.bounds.norm_bound) << ','
       << bool_name(row.bounds.embed_bound) << ','
       << bool_name(row.bounds.max_bound);
    if (row.h2a)
      os << ',' << bool_name(row.h2a->coercivity) << ','
         << verdict_name(row.h2a->max_bound) << ','
         << bool_name(row.h2a->max_le_2a_observed) << ',' << row.h2a->n0;
    os << '\n';
  }
  os << "# c=" << fmt17(r.c) << '\n';
  os << "# all_hold=" << bool_name(r.all_hold) << '\n';
}

inline ordered_json verify_to_json(const VerifyReport& r) {
  ordered_json j;
  j["c"] = r.c;
  j["rows"] = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json jr;
    jr["n"] = row.n;
    jr["iterations"] = row.iterations;
    jr["norm_E"] = row.norm_E;
    jr["N_n"] = row.N_n;
    jr["Q_n"] = row.Q_n;
    ordered_json bounds;
    bounds["norm_bound"] = row.bounds.norm_bound;
    bounds["embed_bound"] = row.bounds.embed_bound;
    bounds["max_bound"] = row.bounds.max_bound;
    bounds["norm_bound_rhs"] = row.bounds.norm_bound_rhs;
    bounds["embed_bound_rhs"] = row.bounds.embed_bound_rhs;
    jr["bounds"] = bounds;
    if (row.h2a) {
      ordered_json jh;
      jh["coercivity"] = row.h2a->coercivity;
      jh["max_bound"] = verdict_name(row.h2a->max_bound);
      jh["max_le_2a"] = row.h2a->max_le_2a_observed;
      jh["n0"] = row.h2a->n0;
      jr["h2a"] = jh;
    }
    j["rows"].push_back(jr);
  }
  j["all_hold"] = r.all_hold;
  return j;
}

// ---------------------------------------------------------------------------
// SpuriousDemoReport
// ---------------------------------------------------------------------------

inline void write_spurious_csv(std::ostream& os,
                               const SpuriousDemoReport& r) {
  os << "case,n,lambda,status,consistency,max_abs,matches_expected\n";
  for (const auto& row : r.cases)
    os << row.case_id << ',' << row.n << ',' << fmt17(row.lambda) << ','
       << status_name(row.status) << ',' << singular_kind_name(row.kind)
       << ',' << fmt17(row.max_abs) << ',' << bool_name(row.matches_expected)
       << '\n';
  for (const auto& row : r.lambda_table)
    os << "# lambda1." << row.n << '=' << fmt17(row.lambda1_value) << '\n';
  for (const auto& row : r.crossings)
    os << "# crossing." << fmt_short(row.a) << '=' << row.first_n_below << '\n';
  os << "# all_match=" << bool_name(r.all_match) << '\n';
}

inline ordered_json spurious_to_json(const SpuriousDemoReport& r) {
  ordered_json j;
  j["cases"] = ordered_json::array();
  for (const auto& row : r.cases) {
    ordered_json jc;
    jc["case"] = row.case_id;
    jc["n"] = row.n;
    jc["lambda"] = row.lambda;
    jc["status"] = status_name(row.status);
    jc["consistency"] = singular_kind_name(row.kind);
    jc["max_abs"] = row.max_abs;
    jc["matches_expected"] = row.matches_expected;
    j["cases"].push_back(jc);
  }
  j["lambda1"] = ordered_json::array();
  for (const auto& row : r.lambda_table) {
    ordered_json jl;
    jl["n"] = row.n;
    jl["value"] = row.lambda1_value;
    j["lambda1"].push_back(jl);
  }
  j["crossings"] = ordered_json::array();
  for (const auto& row : r.crossings) {
    ordered_json jc;
    jc["a"] = row.a;
    jc["first_n_below"] = row.first_n_below;
    j["crossings"].push_back(jc);
  }
  j["all_match"] = r.all_match;
  return j;
}

}  // namespace nonspurious
