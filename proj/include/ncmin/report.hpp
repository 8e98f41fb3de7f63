#pragma once

// CSV and JSON serialization. Reals are written with 17 significant digits.

#include "ncmin/auditor.hpp"
#include "ncmin/counterexample.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace ncmin
{

/// "%.17g"
std::string format_real(double x);

/// Estimates of one problem instance, tagged with a sweep point label.
struct LabelledReports
{
  std::string                 label;
  std::vector<EstimateReport> reports;
};

/// stage,n,node,x,y,value  (one row per node per outer stage)
void write_fields_csv(std::ostream &out, const SolveResult &result);

/// point,n,M,iterations,residual_inf,energy,converged,roundoff_steps,failure
void write_stages_csv(std::ostream &out, const std::string &label, const SolveTrace &trace,
                      bool header = true);

/// point,n,M,iteration,energy
void write_energies_csv(std::ostream &out, const std::string &label, const SolveTrace &trace,
                        bool header = true);

/// point,estimate_id,n,M,k,lhs,rhs,slack,rhs_tight,tol_rel,tol_abs,hard,verdict,note
void write_estimates_csv(std::ostream &out, const std::vector<LabelledReports> &groups);

/// n,cutoff,w11,log_h1,weighted_gradient,l2_sq,chain_rhs
void write_divergence_csv(std::ostream &out, const DivergenceReport &rep);

/// integrand,passed,samples,seed,lower_margin,upper_margin,gradient_margin,
/// convexity_margin,zero_value,max_gradient_error
void write_certify_csv(std::ostream &out, const std::vector<CertifyReport> &reports);

nlohmann::ordered_json to_json(const EstimateReport &r);
/// {estimate_id: [report, ...]} in the fixed estimate order.
nlohmann::ordered_json estimates_json(const std::vector<EstimateReport> &reports);
nlohmann::ordered_json trace_json(const SolveTrace &trace);
nlohmann::ordered_json to_json(const DivergenceReport &rep);
nlohmann::ordered_json to_json(const CertifyReport &rep);

/// Serialized with two-space indentation and a trailing newline.
std::string dump(const nlohmann::ordered_json &doc);

} // namespace ncmin
