#include "ncmin/report.hpp"

#include <cmath>
#include <cstdio>

namespace ncmin
{

namespace
{

// CSV cell: quote when needed
std::string cell(const std::string &s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s)
    {
      if (c == '"')
        out += '"';
      out += c;
    }
  return out + '"';
}

std::string param_or_empty(const EstimateReport &r, const char *key)
{
  const auto it = r.params.find(key);
  return it == r.params.end() ? "" : format_real(it->second);
}

// JSON has no infinities or NaN; encode them as strings
nlohmann::ordered_json real(double x)
{
  if (std::isfinite(x))
    return x;
  if (std::isnan(x))
    return "nan";
  return x > 0 ? "inf" : "-inf";
}

} // namespace

std::string format_real(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_fields_csv(std::ostream &out, const SolveResult &result)
{
  out << "stage,n,node,x,y,value\n";
  for (std::size_t s = 0; s < result.trace.outer.size(); ++s)
    {
      const auto &stage = result.trace.outer[s];
      const auto &f     = stage.inner.field;
      const Grid &g     = f.grid();
      for (std::size_t i = 0; i < g.num_nodes(); ++i)
        out << s << ',' << format_real(stage.n) << ',' << i << ',' << format_real(g.node(i)[0])
            << ',' << format_real(g.node(i)[1]) << ',' << format_real(f.values()[i]) << '\n';
    }
}

void write_stages_csv(std::ostream &out, const std::string &label, const SolveTrace &trace,
                      bool header)
{
  if (header)
    out << "point,n,M,iterations,residual_inf,energy,converged,roundoff_steps,failure\n";
  for (const auto &outer : trace.outer)
    for (const auto &st : outer.inner.stages)
      out << cell(label) << ',' << format_real(outer.n) << ',' << format_real(st.M) << ','
          << st.iterations << ',' << format_real(st.residual_inf) << ',' << format_real(st.energy)
          << ',' << (st.converged ? 1 : 0) << ',' << st.roundoff_steps << ',' << cell(st.failure)
          << '\n';
}

void write_energies_csv(std::ostream &out, const std::string &label, const SolveTrace &trace,
                        bool header)
{
  if (header)
    out << "point,n,M,iteration,energy\n";
  for (const auto &outer : trace.outer)
    for (const auto &st : outer.inner.stages)
      for (std::size_t k = 0; k < st.energies.size(); ++k)
        out << cell(label) << ',' << format_real(outer.n) << ',' << format_real(st.M) << ',' << k
            << ',' << format_real(st.energies[k]) << '\n';
}

void write_estimates_csv(std::ostream &out, const std::vector<LabelledReports> &groups)
{
  out << "point,estimate_id,n,M,k,lhs,rhs,slack,rhs_tight,tol_rel,tol_abs,hard,verdict,note\n";
  for (const auto &g : groups)
    for (const auto &r : g.reports)
      out << cell(g.label) << ',' << to_string(r.id) << ',' << param_or_empty(r, "n") << ','
          << param_or_empty(r, "M") << ',' << param_or_empty(r, "k") << ',' << format_real(r.lhs)
          << ',' << format_real(r.rhs) << ',' << format_real(r.slack()) << ','
          << (r.rhs_tight ? format_real(*r.rhs_tight) : "") << ',' << format_real(r.tol.rel) << ','
          << format_real(r.tol.abs) << ',' << (r.hard ? 1 : 0) << ',' << to_string(r.verdict)
          << ',' << cell(r.note) << '\n';
}

void write_divergence_csv(std::ostream &out, const DivergenceReport &rep)
{
  out << "n,cutoff,w11,log_h1,weighted_gradient,l2_sq,chain_rhs\n";
  for (const auto &row : rep.rows)
    out << format_real(row.n) << ',' << format_real(row.cutoff) << ',' << format_real(row.w11)
        << ',' << format_real(row.log_h1) << ',' << format_real(row.weighted_gradient) << ','
        << format_real(row.l2_sq) << ',' << format_real(row.chain_rhs) << '\n';
}

void write_certify_csv(std::ostream &out, const std::vector<CertifyReport> &reports)
{
  out << "integrand,passed,samples,seed,lower_margin,upper_margin,gradient_margin,"
         "convexity_margin,zero_value,max_gradient_error\n";
  for (const auto &r : reports)
    out << cell(r.label) << ',' << (r.passed ? 1 : 0) << ',' << r.samples << ',' << r.seed << ','
        << format_real(r.lower_margin) << ',' << format_real(r.upper_margin) << ','
        << format_real(r.gradient_margin) << ',' << format_real(r.convexity_margin) << ','
        << format_real(r.zero_value) << ',' << format_real(r.max_gradient_error) << '\n';
}

nlohmann::ordered_json to_json(const EstimateReport &r)
{
  nlohmann::ordered_json j;
  j["lhs"]   = real(r.lhs);
  j["rhs"]   = real(r.rhs);
  j["slack"] = real(r.slack());
  if (r.rhs_tight)
    j["rhs_tight"] = real(*r.rhs_tight);
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto &[k, v] : r.params)
    params[k] = real(v);
  j["params"]  = params;
  j["tol"]     = {{"rel", r.tol.rel}, {"abs", r.tol.abs}};
  j["hard"]    = r.hard;
  j["verdict"] = std::string(to_string(r.verdict));
  if (!r.note.empty())
    j["note"] = r.note;
  return j;
}

nlohmann::ordered_json estimates_json(const std::vector<EstimateReport> &reports)
{
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (EstimateId id : all_estimates())
    {
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      for (const auto &r : reports)
        if (r.id == id)
          list.push_back(to_json(r));
      if (!list.empty())
        j[std::string(to_string(id))] = list;
    }
  return j;
}

nlohmann::ordered_json trace_json(const SolveTrace &trace)
{
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const auto &outer : trace.outer)
    {
      nlohmann::ordered_json inner = nlohmann::ordered_json::array();
      for (const auto &st : outer.inner.stages)
        {
          nlohmann::ordered_json s;
          s["M"]            = real(st.M);
          s["iterations"]   = st.iterations;
          s["residual_inf"] = real(st.residual_inf);
          s["energy"]       = real(st.energy);
          s["converged"]    = st.converged;
          if (!st.failure.empty())
            s["failure"] = st.failure;
          inner.push_back(s);
        }
      nlohmann::ordered_json o;
      o["n"]      = real(outer.n);
      o["stages"] = inner;
      o["m_fixpoint_index"] = outer.inner.fixpoint_index
                                ? nlohmann::ordered_json(*outer.inner.fixpoint_index)
                                : nlohmann::ordered_json(nullptr);
      o["schedule_converged"] = outer.inner.schedule_converged;
      stages.push_back(o);
    }
  nlohmann::ordered_json j;
  j["outer"] = stages;
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (double h : trace.stabilization_history)
    hist.push_back(real(h));
  j["stabilization_history"] = hist;
  j["all_converged"]         = trace.all_converged();
  return j;
}

nlohmann::ordered_json to_json(const DivergenceReport &rep)
{
  nlohmann::ordered_json j;
  j["N"]      = rep.N;
  j["rho"]    = rep.rho;
  j["n_max"]  = rep.n_max;
  j["capped"] = rep.capped;
  j["log_h1_limit"] = rep.limit;
  j["checks"] = {{"log_h1_monotone", rep.log_h1_monotone},
                 {"log_h1_bounded", rep.log_h1_bounded},
                 {"w11_increasing", rep.w11_increasing},
                 {"chain_holds", rep.chain_holds},
                 {"passed", rep.passed()}};
  j["limit_gap"]      = real(rep.limit_gap);
  j["w11_ratio"]      = real(rep.w11_ratio);
  j["identity_error"] = real(rep.identity_error);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto &row : rep.rows)
    rows.push_back({{"n", row.n},
                    {"cutoff", real(row.cutoff)},
                    {"w11", real(row.w11)},
                    {"log_h1", real(row.log_h1)},
                    {"weighted_gradient", real(row.weighted_gradient)},
                    {"l2_sq", real(row.l2_sq)},
                    {"chain_rhs", real(row.chain_rhs)}});
  j["rows"] = rows;
  return j;
}

nlohmann::ordered_json to_json(const CertifyReport &rep)
{
  nlohmann::ordered_json j;
  j["integrand"]          = rep.label;
  j["passed"]             = rep.passed;
  j["samples"]            = rep.samples;
  j["seed"]               = rep.seed;
  j["lower_margin"]       = real(rep.lower_margin);
  j["upper_margin"]       = real(rep.upper_margin);
  j["gradient_margin"]    = real(rep.gradient_margin);
  j["convexity_margin"]   = real(rep.convexity_margin);
  j["zero_value"]         = real(rep.zero_value);
  j["max_gradient_error"] = real(rep.max_gradient_error);
  nlohmann::ordered_json v = nlohmann::ordered_json::array();
  for (const auto &x : rep.violations)
    v.push_back({{"check", x.check},
                 {"x", {x.x[0], x.x[1]}},
                 {"xi", {x.xi[0], x.xi[1]}},
                 {"margin", real(x.margin)}});
  j["violations"] = v;
  return j;
}

std::string dump(const nlohmann::ordered_json &doc)
{
  return doc.dump(2) + "\n";
}

} // namespace ncmin
