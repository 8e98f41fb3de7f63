#pragma once

// Run configuration: a sectioned YAML document, validated at parse time.
// The reference schema lives in schema/config_v1.yaml.

#include "ncmin/functional.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ncmin
{

enum class Subcommand
{
  solve,
  audit,
  counterexample,
  sweep,
  certify
};

std::string_view to_string(Subcommand s);
std::optional<Subcommand> subcommand_from_string(std::string_view s);

struct DomainConfig
{
  int         dimension = 1;
  double      a = 0.0, b = 1.0;     // interval
  std::size_t cells = 128;
  std::size_t x_cells = 32, y_cells = 32; // rectangle (0,lx) x (0,ly)
  double      lx = 1.0, ly = 1.0;

  bool operator==(const DomainConfig &) const = default;
};

struct ComponentConfig
{
  std::string id;
  ParamMap    params; // complete: defaults are filled in at parse time

  bool operator==(const ComponentConfig &) const = default;
};

struct ProblemConfig
{
  DomainConfig    domain;
  ComponentConfig integrand{"quadratic", {}};
  ComponentConfig coefficient{"constant", {}};
  ComponentConfig datum{"constant", {}};
  std::optional<std::vector<double>> m_schedule; // empty: automatic
  std::optional<std::vector<double>> n_schedule;
  double      solver_tol = 1e-8;
  std::size_t max_iter   = 50000;

  bool operator==(const ProblemConfig &) const = default;
};

struct AuditConfig
{
  std::size_t minimality_samples = 50;
  std::size_t coercivity_fields  = 200;

  bool operator==(const AuditConfig &) const = default;
};

struct CounterexampleConfig
{
  int    N     = 3;
  double rho   = 0.25;
  double n_max = 12.0;

  bool operator==(const CounterexampleConfig &) const = default;
};

struct CertifyConfig
{
  std::size_t              samples = 2000;
  std::vector<std::string> integrands{"quadratic", "anisotropic", "logaug"};

  bool operator==(const CertifyConfig &) const = default;
};

/// Cartesian product of the lists; an empty list keeps the problem's value.
/// B overrides the coefficient parameter of the same name.
struct SweepConfig
{
  std::vector<std::string> integrands;
  std::vector<std::string> coefficients;
  std::vector<std::string> data;
  std::vector<double>      B;

  bool operator==(const SweepConfig &) const = default;
};

struct OutputConfig
{
  std::string dir  = "out";
  bool        csv  = true;
  bool        json = true;

  bool operator==(const OutputConfig &) const = default;
};

struct RunConfig
{
  int                  version    = 1;
  Subcommand           subcommand = Subcommand::solve;
  ProblemConfig        problem;
  AuditConfig          audit;
  CounterexampleConfig counterexample;
  CertifyConfig        certify;
  SweepConfig          sweep;
  OutputConfig         output;
  std::uint64_t        seed = 1234567;
  std::size_t          jobs = 1;

  bool operator==(const RunConfig &) const = default;
};

/// Parse or validation failure; `line` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(const std::string &what, int line = 0);
  int line() const { return line_; }

private:
  int line_;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path &path);

/// The complete configuration, defaults included; parse_config(echo) == config.
std::string echo_config(const RunConfig &config);

GridPtr     build_grid(const DomainConfig &domain);
ProblemSpec build_spec(const ProblemConfig &problem);

} // namespace ncmin
