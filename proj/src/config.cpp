#include "ncmin/config.hpp"

#include "ncmin/counterexample.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ncmin
{

namespace
{

constexpr std::pair<Subcommand, std::string_view> subcommand_names[]{
  {Subcommand::solve, "solve"},
  {Subcommand::audit, "audit"},
  {Subcommand::counterexample, "counterexample"},
  {Subcommand::sweep, "sweep"},
  {Subcommand::certify, "certify"},
};

int line_of(const YAML::Node &n)
{
  return n.Mark().is_null() ? 0 : n.Mark().line + 1;
}

std::string join(const std::vector<std::string> &items)
{
  std::string out;
  for (const auto &s : items)
    out += (out.empty() ? "" : ", ") + s;
  return out;
}

// A mapping whose keys are consumed one by one; leftovers are unknown keys.
class Section
{
public:
  Section(YAML::Node node, std::string path, int parent_line = 0)
    : node_(std::move(node))
    , path_(std::move(path))
    , line_(node_ && !node_.IsNull() ? line_of(node_) : parent_line)
  {
    if (node_ && !node_.IsNull() && !node_.IsMap())
      throw ConfigError("'" + path_ + "' must be a mapping", line_);
  }

  bool has(const std::string &key) const { return node_ && node_.IsMap() && node_[key]; }

  YAML::Node raw(const std::string &key)
  {
    known_.push_back(key);
    if (!has(key))
      return YAML::Node();
    return node_[key];
  }

  template <class T>
  T get(const std::string &key, T fallback)
  {
    const YAML::Node n = raw(key);
    if (!n || n.IsNull())
      return fallback;
    return convert<T>(n, key);
  }

  template <class T>
  T convert(const YAML::Node &n, const std::string &key) const
  {
    const std::string where = path_.empty() ? key : path_ + "." + key;
    if (!n.IsScalar())
      throw ConfigError("'" + where + "' must be a scalar", line_of(n));
    try
      {
        if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>)
          {
            const std::string text = n.Scalar();
            if (!text.empty() && text[0] == '-')
              throw ConfigError("'" + where + "' must be nonnegative", line_of(n));
          }
        return n.as<T>();
      }
    catch (const YAML::BadConversion &)
      {
        throw ConfigError("'" + where + "' has the wrong type (value '" + n.Scalar() + "')",
                          line_of(n));
      }
  }

  template <class T>
  std::vector<T> list(const std::string &key, std::vector<T> fallback)
  {
    const YAML::Node n = raw(key);
    if (!n || n.IsNull())
      return fallback;
    const std::string where = path_.empty() ? key : path_ + "." + key;
    if (!n.IsSequence())
      throw ConfigError("'" + where + "' must be a list", line_of(n));
    std::vector<T> out;
    for (const auto &item : n)
      out.push_back(convert<T>(item, key));
    return out;
  }

  void finish() const
  {
    if (!node_ || !node_.IsMap())
      return;
    for (const auto &kv : node_)
      {
        const std::string key = kv.first.Scalar();
        if (std::find(known_.begin(), known_.end(), key) == known_.end())
          throw ConfigError("unknown key '" + key + "' in " +
                              (path_.empty() ? std::string("the document") : "'" + path_ + "'") +
                              " (known: " + join(known_) + ")",
                            line_of(kv.first));
      }
  }

  const std::string &path() const { return path_; }
  int line() const { return line_; }

private:
  YAML::Node               node_;
  std::string              path_;
  int                      line_;
  std::vector<std::string> known_;
};

ComponentConfig parse_component(Section &parent, const std::string &key, const std::string &family,
                                const ComponentConfig &fallback)
{
  const YAML::Node n = parent.raw(key);
  const std::string where = parent.path().empty() ? key : parent.path() + "." + key;
  ComponentConfig out{fallback.id, {}};
  int line = n ? line_of(n) : parent.line();
  ParamMap given;
  if (n && n.IsScalar())
    out.id = n.Scalar();
  else if (n && !n.IsNull())
    {
      Section s(n, where);
      out.id = s.get<std::string>("id", fallback.id);
      const YAML::Node p = s.raw("params");
      if (p && !p.IsNull())
        {
          if (!p.IsMap())
            throw ConfigError("'" + where + ".params' must be a mapping", line_of(p));
          for (const auto &kv : p)
            {
              const std::string key = kv.first.Scalar();
              given[key] = s.convert<double>(kv.second, "params." + key);
              try
                {
                  resolve_params(family, out.id, {{key, given[key]}});
                }
              catch (const std::invalid_argument &e)
                {
                  throw ConfigError("'" + where + "': " + e.what(), line_of(kv.first));
                }
            }
        }
      s.finish();
    }
  else
    given = fallback.params;
  try
    {
      out.params = resolve_params(family, out.id, given);
    }
  catch (const std::invalid_argument &e)
    {
      throw ConfigError("'" + where + "': " + e.what(), line);
    }
  return out;
}

std::optional<std::vector<double>> parse_schedule(Section &s, const std::string &key)
{
  const YAML::Node n = s.raw(key);
  if (!n || n.IsNull() || (n.IsScalar() && n.Scalar() == "auto"))
    return std::nullopt;
  if (!n.IsSequence())
    throw ConfigError("'" + s.path() + "." + key + "' must be a list or 'auto'", line_of(n));
  std::vector<double> out;
  for (const auto &item : n)
    out.push_back(s.convert<double>(item, key));
  if (out.empty())
    throw ConfigError("'" + s.path() + "." + key + "' must not be empty", line_of(n));
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!(out[i] > 0.0) || (i > 0 && !(out[i] > out[i - 1])))
      throw ConfigError("'" + s.path() + "." + key + "' must be positive and strictly increasing",
                        line_of(n));
  return out;
}

void check_ids(const std::vector<std::string> &ids, const std::vector<std::string> &known,
               const std::string &where, int line)
{
  for (const auto &id : ids)
    if (std::find(known.begin(), known.end(), id) == known.end())
      throw ConfigError("'" + where + "': unknown id '" + id + "' (known: " + join(known) + ")",
                        line);
}

} // namespace

ConfigError::ConfigError(const std::string &what, int line)
  : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
  , line_(line)
{
}

std::string_view to_string(Subcommand s)
{
  for (const auto &[k, name] : subcommand_names)
    if (k == s)
      return name;
  return "unknown";
}

std::optional<Subcommand> subcommand_from_string(std::string_view s)
{
  for (const auto &[k, name] : subcommand_names)
    if (name == s)
      return k;
  return std::nullopt;
}

RunConfig parse_config(std::string_view text)
{
  YAML::Node root;
  try
    {
      root = YAML::Load(std::string(text));
    }
  catch (const YAML::ParserException &e)
    {
      throw ConfigError("malformed document: " + e.msg, e.mark.line + 1);
    }
  if (root.IsNull())
    root = YAML::Node(YAML::NodeType::Map);

  RunConfig cfg;
  Section   top(root, "");

  cfg.version = top.get<int>("version", 1);
  if (cfg.version != 1)
    throw ConfigError("unsupported config version " + std::to_string(cfg.version), top.line());

  {
    const YAML::Node n = top.raw("subcommand");
    if (n && !n.IsNull())
      {
        const auto s = subcommand_from_string(n.Scalar());
        if (!s)
          throw ConfigError("unknown subcommand '" + n.Scalar() +
                              "' (known: solve, audit, counterexample, sweep, certify)",
                            line_of(n));
        cfg.subcommand = *s;
      }
  }
  cfg.seed = top.get<std::uint64_t>("seed", cfg.seed);
  cfg.jobs = top.get<std::size_t>("jobs", cfg.jobs);
  if (cfg.jobs == 0)
    throw ConfigError("'jobs' must be at least 1", top.line());

  // problem
  {
    Section p(top.raw("problem"), "problem", top.line());
    auto   &pc = cfg.problem;
    {
      Section d(p.raw("domain"), "problem.domain", p.line());
      const std::string kind = d.get<std::string>("kind", "interval");
      if (kind == "interval")
        {
          pc.domain.dimension = 1;
          pc.domain.a     = d.get<double>("a", pc.domain.a);
          pc.domain.b     = d.get<double>("b", pc.domain.b);
          pc.domain.cells = d.get<std::size_t>("cells", pc.domain.cells);
          if (!(pc.domain.a < pc.domain.b) || pc.domain.cells == 0)
            throw ConfigError("'problem.domain' needs a < b and cells >= 1", d.line());
        }
      else if (kind == "rectangle")
        {
          pc.domain.dimension = 2;
          pc.domain.x_cells = d.get<std::size_t>("x_cells", pc.domain.x_cells);
          pc.domain.y_cells = d.get<std::size_t>("y_cells", pc.domain.y_cells);
          pc.domain.lx      = d.get<double>("lx", pc.domain.lx);
          pc.domain.ly      = d.get<double>("ly", pc.domain.ly);
          if (pc.domain.x_cells == 0 || pc.domain.y_cells == 0 || !(pc.domain.lx > 0.0) ||
              !(pc.domain.ly > 0.0))
            throw ConfigError("'problem.domain' needs positive cell counts and side lengths",
                              d.line());
        }
      else
        throw ConfigError("'problem.domain.kind' must be interval or rectangle", d.line());
      d.finish();
    }
    pc.integrand   = parse_component(p, "integrand", "integrand", pc.integrand);
    pc.coefficient = parse_component(p, "coefficient", "coefficient", pc.coefficient);
    pc.datum       = parse_component(p, "datum", "datum", pc.datum);
    {
      Section s(p.raw("schedules"), "problem.schedules", p.line());
      pc.m_schedule = parse_schedule(s, "m");
      pc.n_schedule = parse_schedule(s, "n");
      s.finish();
    }
    {
      Section s(p.raw("solver"), "problem.solver", p.line());
      pc.solver_tol = s.get<double>("tol", pc.solver_tol);
      pc.max_iter   = s.get<std::size_t>("max_iter", pc.max_iter);
      if (!(pc.solver_tol > 0.0) || pc.max_iter == 0)
        throw ConfigError("'problem.solver' needs tol > 0 and max_iter >= 1", s.line());
      s.finish();
    }
    p.finish();
    try
      {
        build_spec(pc);
      }
    catch (const std::exception &e)
      {
        throw ConfigError(std::string("'problem': ") + e.what(), p.line());
      }
  }

  {
    Section a(top.raw("audit"), "audit", top.line());
    cfg.audit.minimality_samples = a.get<std::size_t>("minimality_samples", cfg.audit.minimality_samples);
    cfg.audit.coercivity_fields  = a.get<std::size_t>("coercivity_fields", cfg.audit.coercivity_fields);
    if (cfg.audit.minimality_samples == 0)
      throw ConfigError("'audit.minimality_samples' must be at least 1", a.line());
    a.finish();
  }

  {
    Section c(top.raw("counterexample"), "counterexample", top.line());
    auto   &cc = cfg.counterexample;
    cc.N     = c.get<int>("N", cc.N);
    cc.rho   = c.get<double>("rho", cc.rho);
    cc.n_max = c.get<double>("n_max", cc.n_max);
    try
      {
        make_profile(cc.N, cc.rho, 0.0);
      }
    catch (const std::invalid_argument &e)
      {
        throw ConfigError(std::string("'counterexample': ") + e.what(), c.line());
      }
    if (!(cc.n_max >= 0.0 && cc.n_max <= max_level))
      throw ConfigError("'counterexample.n_max' must lie in [0, 350]", c.line());
    c.finish();
  }

  {
    Section c(top.raw("certify"), "certify", top.line());
    cfg.certify.samples    = c.get<std::size_t>("samples", cfg.certify.samples);
    cfg.certify.integrands = c.list<std::string>("integrands", cfg.certify.integrands);
    if (cfg.certify.samples == 0)
      throw ConfigError("'certify.samples' must be at least 1", c.line());
    check_ids(cfg.certify.integrands, integrand_ids(), "certify.integrands", c.line());
    c.finish();
  }

  {
    Section s(top.raw("sweep"), "sweep", top.line());
    auto   &sc = cfg.sweep;
    sc.integrands   = s.list<std::string>("integrands", {});
    sc.coefficients = s.list<std::string>("coefficients", {});
    sc.data         = s.list<std::string>("data", {});
    sc.B            = s.list<double>("B", {});
    check_ids(sc.integrands, integrand_ids(), "sweep.integrands", s.line());
    check_ids(sc.coefficients, coefficient_ids(), "sweep.coefficients", s.line());
    check_ids(sc.data, datum_ids(), "sweep.data", s.line());
    for (double B : sc.B)
      if (!(B >= 0.0))
        throw ConfigError("'sweep.B' values must be nonnegative", s.line());
    s.finish();
  }

  {
    Section o(top.raw("output"), "output", top.line());
    cfg.output.dir  = o.get<std::string>("dir", cfg.output.dir);
    cfg.output.csv  = o.get<bool>("csv", cfg.output.csv);
    cfg.output.json = o.get<bool>("json", cfg.output.json);
    o.finish();
  }

  top.finish();
  return cfg;
}

RunConfig load_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string echo_config(const RunConfig &cfg)
{
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto component = [&](const char *key, const ComponentConfig &c) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << c.id;
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    for (const auto &[k, v] : c.params)
      out << YAML::Key << k << YAML::Value << v;
    out << YAML::EndMap << YAML::EndMap;
  };
  auto schedule = [&](const char *key, const std::optional<std::vector<double>> &s) {
    out << YAML::Key << key << YAML::Value;
    if (!s)
      out << "auto";
    else
      out << YAML::Flow << *s;
  };

  const auto &pc = cfg.problem;
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << cfg.version;
  out << YAML::Key << "subcommand" << YAML::Value << std::string(to_string(cfg.subcommand));
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "jobs" << YAML::Value << cfg.jobs;

  out << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "domain" << YAML::Value << YAML::BeginMap;
  if (pc.domain.dimension == 1)
    {
      out << YAML::Key << "kind" << YAML::Value << "interval";
      out << YAML::Key << "a" << YAML::Value << pc.domain.a;
      out << YAML::Key << "b" << YAML::Value << pc.domain.b;
      out << YAML::Key << "cells" << YAML::Value << pc.domain.cells;
    }
  else
    {
      out << YAML::Key << "kind" << YAML::Value << "rectangle";
      out << YAML::Key << "x_cells" << YAML::Value << pc.domain.x_cells;
      out << YAML::Key << "y_cells" << YAML::Value << pc.domain.y_cells;
      out << YAML::Key << "lx" << YAML::Value << pc.domain.lx;
      out << YAML::Key << "ly" << YAML::Value << pc.domain.ly;
    }
  out << YAML::EndMap;
  component("integrand", pc.integrand);
  component("coefficient", pc.coefficient);
  component("datum", pc.datum);
  out << YAML::Key << "schedules" << YAML::Value << YAML::BeginMap;
  schedule("m", pc.m_schedule);
  schedule("n", pc.n_schedule);
  out << YAML::EndMap;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tol" << YAML::Value << pc.solver_tol;
  out << YAML::Key << "max_iter" << YAML::Value << pc.max_iter;
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::Key << "audit" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "minimality_samples" << YAML::Value << cfg.audit.minimality_samples;
  out << YAML::Key << "coercivity_fields" << YAML::Value << cfg.audit.coercivity_fields;
  out << YAML::EndMap;

  out << YAML::Key << "counterexample" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "N" << YAML::Value << cfg.counterexample.N;
  out << YAML::Key << "rho" << YAML::Value << cfg.counterexample.rho;
  out << YAML::Key << "n_max" << YAML::Value << cfg.counterexample.n_max;
  out << YAML::EndMap;

  out << YAML::Key << "certify" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "samples" << YAML::Value << cfg.certify.samples;
  out << YAML::Key << "integrands" << YAML::Value << YAML::Flow << cfg.certify.integrands;
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "integrands" << YAML::Value << YAML::Flow << cfg.sweep.integrands;
  out << YAML::Key << "coefficients" << YAML::Value << YAML::Flow << cfg.sweep.coefficients;
  out << YAML::Key << "data" << YAML::Value << YAML::Flow << cfg.sweep.data;
  out << YAML::Key << "B" << YAML::Value << YAML::Flow << cfg.sweep.B;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << cfg.output.dir;
  out << YAML::Key << "csv" << YAML::Value << cfg.output.csv;
  out << YAML::Key << "json" << YAML::Value << cfg.output.json;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

GridPtr build_grid(const DomainConfig &d)
{
  if (d.dimension == 1)
    return build_interval_grid(d.a, d.b, d.cells);
  return build_rect_grid(d.x_cells, d.y_cells, d.lx, d.ly);
}

ProblemSpec build_spec(const ProblemConfig &p)
{
  const GridPtr grid = build_grid(p.domain);
  return ProblemSpec(grid, make_integrand(p.integrand.id, p.integrand.params),
                     make_coefficient(p.coefficient.id, p.coefficient.params),
                     make_datum(grid, p.datum.id, p.datum.params),
                     ProblemSpec::Schedules{p.m_schedule, p.n_schedule}, p.solver_tol, p.max_iter);
}

} // namespace ncmin
