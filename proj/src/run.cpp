#include "ncmin/run.hpp"

#include "ncmin/counterexample.hpp"
#include "ncmin/report.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace ncmin
{

namespace
{

namespace fs = std::filesystem;

class Writer
{
public:
  explicit Writer(const OutputConfig &out)
    : dir_(out.dir)
    , csv_(out.csv)
    , json_(out.json)
  {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
      throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void text(const std::string &name, const std::string &content) const
  {
    const fs::path path = dir_ / name;
    std::ofstream  out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out)
      throw IoError("cannot write '" + path.string() + "'");
  }

  void csv(const std::string &name, const std::string &content) const
  {
    if (csv_)
      text(name, content);
  }

  void json(const std::string &name, const nlohmann::ordered_json &doc) const
  {
    if (json_)
      text(name, dump(doc));
  }

private:
  fs::path dir_;
  bool     csv_;
  bool     json_;
};

nlohmann::ordered_json header(const RunConfig &config)
{
  nlohmann::ordered_json j;
  j["version"]    = 1;
  j["subcommand"] = std::string(to_string(config.subcommand));
  j["seed"]       = config.seed;
  return j;
}

ExitCode combine(bool converged, bool passed)
{
  if (!converged)
    return ExitCode::not_converged;
  return passed ? ExitCode::ok : ExitCode::audit_failure;
}

ExitCode run_single(const RunConfig &config, const Writer &w, std::ostream &log, bool audit)
{
  const SweepPoint point{"base", config.problem};
  const auto       outcome = solve_point(point, config, audit);

  std::ostringstream fields, stages, energies;
  write_fields_csv(fields, outcome.result);
  write_stages_csv(stages, point.label, outcome.result.trace);
  write_energies_csv(energies, point.label, outcome.result.trace);
  w.csv("solution.csv", fields.str());
  w.csv("stages.csv", stages.str());
  w.csv("energies.csv", energies.str());

  const ExitCode code = combine(outcome.converged, outcome.passed);
  auto doc = header(config);
  doc["exit_status"] = static_cast<int>(code);
  doc["converged"]   = outcome.converged;
  doc["trace"]       = trace_json(outcome.result.trace);
  if (audit)
    {
      std::ostringstream est;
      write_estimates_csv(est, {{point.label, outcome.reports}});
      w.csv("estimates.csv", est.str());
      doc["all_hard_pass"] = outcome.passed;
      doc["estimates"]     = estimates_json(outcome.reports);
    }
  w.json("report.json", doc);
  log << to_string(config.subcommand) << ": converged=" << outcome.converged
      << (audit ? std::string(" audits=") + (outcome.passed ? "pass" : "fail") : "")
      << " exit=" << static_cast<int>(code) << '\n';
  return code;
}

ExitCode run_counterexample(const RunConfig &config, const Writer &w, std::ostream &log)
{
  const auto &c   = config.counterexample;
  const auto  rep = divergence_report(c.N, c.rho, c.n_max);
  std::ostringstream table;
  write_divergence_csv(table, rep);
  w.csv("counterexample.csv", table.str());
  const ExitCode code = rep.passed() ? ExitCode::ok : ExitCode::audit_failure;
  auto doc = header(config);
  doc["exit_status"]    = static_cast<int>(code);
  doc["counterexample"] = to_json(rep);
  w.json("report.json", doc);
  log << "counterexample: N=" << c.N << " rho=" << c.rho << " rows=" << rep.rows.size()
      << " passed=" << rep.passed() << '\n';
  return code;
}

ExitCode run_certify(const RunConfig &config, const Writer &w, std::ostream &log)
{
  std::vector<CertifyReport> reports;
  bool                       ok = true;
  for (const auto &id : config.certify.integrands)
    {
      const ParamMap params =
        id == config.problem.integrand.id ? config.problem.integrand.params : ParamMap{};
      reports.push_back(certify(make_integrand(id, params), config.certify.samples, config.seed,
                                config.problem.domain.dimension));
      ok = ok && reports.back().passed;
      log << "certify " << id << ": " << (reports.back().passed ? "pass" : "fail") << '\n';
    }
  std::ostringstream table;
  write_certify_csv(table, reports);
  w.csv("certify.csv", table.str());
  const ExitCode code = ok ? ExitCode::ok : ExitCode::audit_failure;
  auto doc = header(config);
  doc["exit_status"] = static_cast<int>(code);
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto &r : reports)
    list.push_back(to_json(r));
  doc["certify"] = list;
  w.json("report.json", doc);
  return code;
}

ExitCode run_sweep(const RunConfig &config, const Writer &w, std::ostream &log)
{
  const auto points = sweep_points(config);
  std::vector<std::optional<PointOutcome>> outcomes(points.size());
  std::vector<CertifyReport> certs(points.size());
  std::vector<std::string>   errors(points.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++)
      {
        try
          {
            const auto &pc = points[i].problem;
            certs[i]    = certify(make_integrand(pc.integrand.id, pc.integrand.params),
                                  config.certify.samples, config.seed, pc.domain.dimension);
            outcomes[i] = solve_point(points[i], config, true);
          }
        catch (const std::exception &e)
          {
            errors[i] = e.what();
          }
      }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(config.jobs, points.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < jobs; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error("sweep point " + points[i].label + ": " + errors[i]);

  // single-writer merge in point order
  bool converged = true, passed = true;
  std::ostringstream matrix, stages, energies, est;
  matrix << "point,integrand,coefficient,datum,B,certified,converged,passed,failures,warnings";
  for (EstimateId id : all_estimates())
    matrix << ',' << to_string(id);
  matrix << '\n';
  std::vector<LabelledReports> groups;
  nlohmann::ordered_json       list = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < points.size(); ++i)
    {
      const auto &p = points[i].problem;
      const auto &o = *outcomes[i];
      converged = converged && o.converged;
      passed    = passed && o.passed && certs[i].passed;

      std::size_t failures = 0, warnings = 0;
      for (const auto &r : o.reports)
        {
          failures += r.verdict == Verdict::fail;
          warnings += r.verdict == Verdict::warn;
        }
      const auto B = p.coefficient.params.find("B");
      matrix << o.label << ',' << p.integrand.id << ',' << p.coefficient.id << ','
             << p.datum.id << ','
             << (B == p.coefficient.params.end() ? "" : format_real(B->second)) << ','
             << (certs[i].passed ? 1 : 0) << ',' << (o.converged ? 1 : 0) << ','
             << (o.passed ? 1 : 0) << ',' << failures << ',' << warnings;
      for (EstimateId id : all_estimates())
        {
          std::string v = "none";
          for (const auto &r : o.reports)
            if (r.id == id)
              {
                if (r.verdict == Verdict::fail)
                  v = "fail";
                else if (r.verdict == Verdict::warn && v != "fail")
                  v = "warn";
                else if (r.verdict == Verdict::pass && v == "none")
                  v = "pass";
                else if (r.verdict == Verdict::inapplicable && v == "none")
                  v = "inapplicable";
              }
          matrix << ',' << v;
        }
      matrix << '\n';
      write_stages_csv(stages, o.label, o.result.trace, i == 0);
      write_energies_csv(energies, o.label, o.result.trace, i == 0);
      groups.push_back({o.label, o.reports});

      nlohmann::ordered_json pj;
      pj["point"]       = o.label;
      pj["integrand"]   = p.integrand.id;
      pj["coefficient"] = p.coefficient.id;
      pj["datum"]       = p.datum.id;
      pj["B"]           = B == p.coefficient.params.end() ? nlohmann::ordered_json(nullptr)
                                                          : nlohmann::ordered_json(B->second);
      pj["certify"]     = to_json(certs[i]);
      pj["converged"]   = o.converged;
      pj["all_hard_pass"] = o.passed;
      pj["trace"]       = trace_json(o.result.trace);
      pj["estimates"]   = estimates_json(o.reports);
      list.push_back(pj);
      log << "sweep " << o.label << ": converged=" << o.converged
          << " audits=" << (o.passed ? "pass" : "fail") << '\n';
    }
  write_estimates_csv(est, groups);
  w.csv("sweep_matrix.csv", matrix.str());
  w.csv("stages.csv", stages.str());
  w.csv("energies.csv", energies.str());
  w.csv("estimates.csv", est.str());

  const ExitCode code = combine(converged, passed);
  auto doc = header(config);
  doc["exit_status"] = static_cast<int>(code);
  doc["points"]      = list;
  w.json("report.json", doc);
  return code;
}

} // namespace

std::vector<SweepPoint> sweep_points(const RunConfig &config)
{
  const auto &base = config.problem;
  const auto &s    = config.sweep;
  auto or_base = [](const std::vector<std::string> &list, const std::string &fallback) {
    return list.empty() ? std::vector<std::string>{fallback} : list;
  };
  const auto integrands   = or_base(s.integrands, base.integrand.id);
  const auto coefficients = or_base(s.coefficients, base.coefficient.id);
  const auto data         = or_base(s.data, base.datum.id);
  const std::vector<std::optional<double>> Bs = [&] {
    std::vector<std::optional<double>> v;
    for (double B : s.B)
      v.emplace_back(B);
    if (v.empty())
      v.emplace_back(std::nullopt);
    return v;
  }();

  // a component keeps the base parameters only when its id is unchanged
  auto component = [](const std::string &family, const std::string &id,
                      const ComponentConfig &base_c) {
    return ComponentConfig{id, id == base_c.id ? base_c.params : resolve_params(family, id)};
  };

  std::vector<SweepPoint> out;
  for (const auto &i : integrands)
    for (const auto &c : coefficients)
      for (const auto &d : data)
        for (const auto &B : Bs)
          {
            SweepPoint p{"", base};
            p.problem.integrand   = component("integrand", i, base.integrand);
            p.problem.coefficient = component("coefficient", c, base.coefficient);
            p.problem.datum       = component("datum", d, base.datum);
            std::string label = i + "/" + c + "/" + d;
            if (B)
              {
                p.problem.coefficient.params["B"] = *B;
                label += "/B=" + format_real(*B);
              }
            p.label = label;
            out.push_back(std::move(p));
          }
  return out;
}

PointOutcome solve_point(const SweepPoint &point, const RunConfig &config, bool audit)
{
  const ProblemSpec spec = build_spec(point.problem);
  PointOutcome      out{point.label, solve_outer(spec), {}, false, true};
  out.converged = out.result.trace.all_converged();
  if (audit)
    {
      out.reports = audit_run(out.result, spec, config.seed, config.audit.minimality_samples,
                              config.audit.coercivity_fields);
      out.passed  = all_hard_pass(out.reports);
    }
  return out;
}

ExitCode run(const RunConfig &config, std::ostream &log)
{
  try
    {
      const Writer w(config.output);
      w.text("config.echo.yaml", echo_config(config));
      switch (config.subcommand)
        {
        case Subcommand::solve:
          return run_single(config, w, log, false);
        case Subcommand::audit:
          return run_single(config, w, log, true);
        case Subcommand::counterexample:
          return run_counterexample(config, w, log);
        case Subcommand::certify:
          return run_certify(config, w, log);
        case Subcommand::sweep:
          return run_sweep(config, w, log);
        }
    }
  catch (const IoError &e)
    {
      log << "error: " << e.what() << '\n';
      return ExitCode::io_error;
    }
  return ExitCode::config_error;
}

} // namespace ncmin
