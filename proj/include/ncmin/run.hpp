#pragma once

// Orchestration of the subcommands and the artifacts they write.

#include "ncmin/auditor.hpp"
#include "ncmin/config.hpp"

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncmin
{

enum class ExitCode : int
{
  ok            = 0,
  audit_failure = 1, // a hard estimate or counterexample check failed
  not_converged = 2, // some solver stage did not reach the tolerance
  config_error  = 3,
  io_error      = 4
};

class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// One point of a sweep: a complete problem and a readable label.
struct SweepPoint
{
  std::string   label;
  ProblemConfig problem;
};

/// Cartesian product integrand x coefficient x datum x B, in that nesting
/// order; empty lists keep the base problem's value.
std::vector<SweepPoint> sweep_points(const RunConfig &config);

struct PointOutcome
{
  std::string                 label;
  SolveResult                 result;
  std::vector<EstimateReport> reports; // empty unless audited
  bool                        converged = false;
  bool                        passed    = false; // all hard audits pass
};

PointOutcome solve_point(const SweepPoint &point, const RunConfig &config, bool audit);

/// Runs the configured subcommand and writes its artifacts to
/// config.output.dir. Progress lines go to `log`.
ExitCode run(const RunConfig &config, std::ostream &log);

} // namespace ncmin
