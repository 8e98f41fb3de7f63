#pragma once

// Numerical audits of the a priori estimates satisfied by the computed
// minimizers, plus stabilization and comparison diagnostics.

#include "ncmin/solver.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ncmin
{

enum class EstimateId
{
  LINF_BOUND,       // ||u||_inf <= ||g||_inf
  PRIMASTIMA,       // alpha int |grad u|^2/(1+b|u|)^2 <= 1/2 int f^2
  TK_BOUND,         // int |grad T_k u|^2 <= (1+Bk)^2/(2 alpha) int f^2
  SECONDASTIMA,     // int u^2 <= 4 int f^2
  TERZASTIMA,       // int |grad u| <= sqrt(int f^2/(2 alpha)) (sqrt|Omega| + 2B sqrt(int f^2))
  GK_BOUND,         // int G_k(u)^2 <= 4 int_{|u|>=k} f^2
  COERCIVITY_CHAIN, // int |grad v| <= 1/2 int |grad v|^2/(1+|v|)^2 + 1/2 int (1+|v|)^2
  TESTCLASS,        // J(u) <= J(T_k w) over a family of steep competitors
  WEAK_GRAD_STAB,   // Cauchy decay of fixed pairings with grad u_n/(1+b|u_n|)
  STRONG_L2_STAB,   // decay of ||u_{n_{k+1}} - u_{n_k}||_L2
  MINIMALITY        // J(u) <= J(v) over random admissible comparison fields
};

std::string_view to_string(EstimateId id);
std::optional<EstimateId> estimate_from_string(std::string_view name);
const std::vector<EstimateId> &all_estimates();

enum class Verdict
{
  pass,
  fail,
  warn,        // failed a warning-grade check
  inapplicable // hypotheses of the check not met
};

std::string_view to_string(Verdict v);

struct Tolerance
{
  double rel = 1e-6;
  double abs = 1e-12;
};

/// One audited inequality lhs <= rhs.
struct EstimateReport
{
  EstimateId  id = EstimateId::LINF_BOUND;
  double      lhs = 0.0;
  double      rhs = 0.0;
  Tolerance   tol;
  Verdict     verdict = Verdict::pass;
  bool        hard    = true; // a failing hard check fails the run
  std::map<std::string, double> params;
  /// Right side with the truncated datum actually used by the stage.
  std::optional<double> rhs_tight;
  std::string note;

  double slack() const { return rhs - lhs; }
};

/// lhs <= rhs (1 + rel) + abs
bool holds(double lhs, double rhs, const Tolerance &tol);

/// Verdict recomputed from (lhs, rhs, tol, hard); inapplicable stays so.
Verdict recompute_verdict(const EstimateReport &r);
bool    consistent(const EstimateReport &r);

/// k values {0, 1/4, 1/2, 1, 2, 4} * ||u||_inf used by the TK and GK sweeps.
std::vector<double> level_sweep(const DiscreteField &u);

EstimateReport audit_linf(const DiscreteField &u, const Datum &g);
EstimateReport audit_primastima(const DiscreteField &u, const ProblemSpec &spec, const Datum &f_used);
EstimateReport audit_tk(const DiscreteField &u, const ProblemSpec &spec, double k,
                        const Datum &f_used);
EstimateReport audit_secondastima(const DiscreteField &u, const ProblemSpec &spec,
                                  const Datum &f_used);
EstimateReport audit_terzastima(const DiscreteField &u, const ProblemSpec &spec, const Datum &f_used);
/// Middle step of the Hoelder chain behind TERZASTIMA:
///   int |grad u| <= sqrt(int |grad u|^2/(1+b|u|)^2) sqrt(int (1+b|u|)^2),
/// valid for every field. Reported as TERZASTIMA with params holder_step = 1.
EstimateReport audit_holder_step(const DiscreteField &u, const ProblemSpec &spec);
EstimateReport audit_gk(const DiscreteField &u, const ProblemSpec &spec, const Datum &f_used,
                        double k);

/// Young's inequality chain with b = 1, valid for every P1 field (no trace
/// condition needed).
EstimateReport audit_coercivity_chain(const NodalFunction &v);
/// Worst case of the chain over `count` seeded random fields.
EstimateReport coercivity_property(const GridPtr &grid, std::size_t count, std::uint64_t seed);

/// Requires b >= A > 0; otherwise inapplicable.
EstimateReport audit_testclass(const DiscreteField &u, const ProblemSpec &spec);

EstimateReport audit_minimality(const DiscreteField &u, const ProblemSpec &spec,
                                std::uint64_t seed, std::size_t count = 50);

struct StabilizationReports
{
  EstimateReport strong;
  EstimateReport weak;
};

/// Pairings int Phi_m . grad u / (1 + b|u|) with Phi_m(x)_i = exp(-m x_i / 2),
/// m = 0..9.
std::vector<double> weak_pairings(const DiscreteField &u, const ProblemSpec &spec);

/// Unbounded datum: ratios of consecutive differences over the last three
/// differences, a difference below `floor` counting as saturated. Bounded
/// datum: stages at or beyond sup|f| must coincide up to `floor`.
StabilizationReports audit_stabilization(const SolveTrace &trace, const ProblemSpec &spec);

/// Everything for one solved problem: the stage battery for each outer stage,
/// then the whole-run checks. Deterministic for a given seed.
std::vector<EstimateReport> audit_run(const SolveResult &result, const ProblemSpec &spec,
                                      std::uint64_t seed, std::size_t minimality_samples = 50,
                                      std::size_t coercivity_fields = 200);

/// The stage battery (LINF, PRIMASTIMA, TK sweep, SECONDASTIMA, TERZASTIMA,
/// GK sweep) for one stage minimizer.
std::vector<EstimateReport> audit_stage(const DiscreteField &u, const ProblemSpec &spec,
                                        const Datum &f_used);

bool all_hard_pass(const std::vector<EstimateReport> &reports);

} // namespace ncmin
