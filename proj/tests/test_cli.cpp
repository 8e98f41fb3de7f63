#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using json   = nlohmann::json;

namespace
{

struct Scratch
{
  fs::path dir;

  explicit Scratch(const std::string &name)
    : dir(fs::temp_directory_path() / ("ncmin_cli_" + name))
  {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write(const std::string &name, const std::string &text) const
  {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

// Exit status of `ncmin <args>`; stdout and stderr go to `log`.
int ncmin(const std::string &args, const fs::path &log)
{
  const std::string cmd = std::string(NCMIN_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int         raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path &p)
{
  std::ifstream     in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Row = std::map<std::string, std::string>;

std::vector<Row> read_csv(const fs::path &p)
{
  std::ifstream            in(p);
  std::string              line;
  std::vector<std::string> header;
  std::vector<Row>         rows;
  auto split = [](const std::string &s) {
    std::vector<std::string> out;
    std::stringstream        ss(s);
    std::string              cell;
    while (std::getline(ss, cell, ','))
      out.push_back(cell);
    if (!s.empty() && s.back() == ',')
      out.emplace_back();
    return out;
  };
  if (std::getline(in, line))
    header = split(line);
  while (std::getline(in, line))
    {
      const auto cells = split(line);
      Row        r;
      for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i)
        r[header[i]] = cells[i];
      rows.push_back(std::move(r));
    }
  return rows;
}

// nodal values of the last outer stage, in node order
std::vector<std::pair<double, double>> final_stage(const fs::path &solution_csv)
{
  const auto rows = read_csv(solution_csv);
  std::string last;
  for (const auto &r : rows)
    last = r.at("stage");
  std::vector<std::pair<double, double>> out;
  for (const auto &r : rows)
    if (r.at("stage") == last)
      out.emplace_back(std::stod(r.at("x")), std::stod(r.at("value")));
  return out;
}

bool any_failure(const json &estimates)
{
  for (const auto &[id, list] : estimates.items())
    for (const auto &e : list)
      if (e.at("verdict") == "fail")
        return true;
  return false;
}

const char *oracle_config = R"(
problem:
  domain: {kind: interval, a: 0, b: 1, cells: 256}
  integrand: {id: quadratic, params: {alpha: 1, beta: 1}}
  coefficient: zero
  datum: {id: constant, params: {value: 1}}
  solver: {tol: 1.0e-11}
)";

} // namespace

TEST_CASE("zero datum solve writes a zero field")
{
  Scratch s("zero");
  const auto cfg = s.write("z.yaml", "problem:\n  domain: {kind: interval, cells: 32}\n"
                                     "  datum: {id: constant, params: {value: 0}}\n");
  REQUIRE(ncmin("audit -c " + cfg.string() + " -o " + (s.dir / "out").string(), s.dir / "log") == 0);
  const auto field = final_stage(s.dir / "out" / "solution.csv");
  CHECK(field.size() == 33);
  for (const auto &[x, v] : field)
    CHECK(v == 0.0);
  const json rep = json::parse(slurp(s.dir / "out" / "report.json"));
  CHECK_FALSE(any_failure(rep.at("estimates")));
  CHECK(rep.at("exit_status") == 0);
  CHECK(fs::exists(s.dir / "out" / "config.echo.yaml"));
}

TEST_CASE("quadratic oracle through the written CSV")
{
  Scratch s("oracle");
  const auto cfg = s.write("q.yaml", oracle_config);
  REQUIRE(ncmin("solve -c " + cfg.string() + " -o " + (s.dir / "out").string(), s.dir / "log") == 0);
  const auto field  = final_stage(s.dir / "out" / "solution.csv");
  const auto direct = oracle::p1_quadratic_solution(256);
  REQUIRE(field.size() == direct.size());
  double to_direct = 0.0, to_exact = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i)
    {
      to_direct = std::max(to_direct, std::abs(field[i].second - direct[i]));
      to_exact  = std::max(to_exact, std::abs(field[i].second - oracle::bvp_solution(field[i].first)));
    }
  CHECK(to_direct < 1e-8);
  CHECK(to_exact < 1e-6);
}

TEST_CASE("counterexample table")
{
  Scratch s("counter");
  const auto cfg = s.write("c.yaml", "subcommand: counterexample\n");
  CHECK(ncmin("counterexample -c " + cfg.string() + " -o " + (s.dir / "out").string(), s.dir / "log") == 0);
  const auto rows = read_csv(s.dir / "out" / "counterexample.csv");
  REQUIRE(rows.size() == 13);
  for (std::size_t i = 0; i < rows.size(); ++i)
    {
      CHECK(std::stod(rows[i].at("n")) == static_cast<double>(i));
      CHECK(std::stod(rows[i].at("w11")) <= std::stod(rows[i].at("chain_rhs")));
    }
  CHECK(std::stod(rows[12].at("w11")) ==
        doctest::Approx(oracle::radial_w11(3, 0.25, 12.0)).epsilon(1e-6));
}

TEST_CASE("identical seeds give identical artifacts")
{
  Scratch s("determinism");
  const auto cfg = s.write("d.yaml", "problem:\n  domain: {kind: interval, cells: 48}\n"
                                     "  coefficient: step\n  datum: power\n"
                                     "audit: {minimality_samples: 20, coercivity_fields: 20}\n"
                                     "seed: 8\n");
  REQUIRE(ncmin("audit -c " + cfg.string() + " -o " + (s.dir / "a").string(), s.dir / "log") == 0);
  REQUIRE(ncmin("audit -c " + cfg.string() + " -o " + (s.dir / "b").string(), s.dir / "log") == 0);
  for (const char *f : {"report.json", "estimates.csv", "solution.csv", "stages.csv", "energies.csv"})
    CHECK(slurp(s.dir / "a" / f) == slurp(s.dir / "b" / f));

  REQUIRE(ncmin("audit -c " + cfg.string() + " --seed 9 -o " + (s.dir / "c").string(), s.dir / "log") == 0);
  const json c = json::parse(slurp(s.dir / "c" / "report.json"));
  CHECK(c.at("seed") == 9);
}

TEST_CASE("exit status contract")
{
  Scratch s("exit");
  SUBCASE("passing audit")
  {
    const auto cfg = s.write("ok.yaml", "problem:\n  domain: {kind: interval, cells: 32}\n  datum: sine\n"
                                        "audit: {minimality_samples: 10, coercivity_fields: 10}\n");
    const int  code = ncmin("audit -c " + cfg.string() + " -o " + (s.dir / "out").string(), s.dir / "log");
    const json rep  = json::parse(slurp(s.dir / "out" / "report.json"));
    CHECK(code == rep.at("exit_status"));
    CHECK((code == 0) == (!any_failure(rep.at("estimates")) && rep.at("converged").get<bool>()));
    CHECK(code == 0);
  }
  SUBCASE("iteration cap")
  {
    const auto cfg = s.write("cap.yaml", "problem:\n  domain: {kind: interval, cells: 32}\n"
                                         "  datum: {id: sine, params: {amplitude: 5}}\n"
                                         "  solver: {max_iter: 1}\n");
    CHECK(ncmin("solve -c " + cfg.string() + " -o " + (s.dir / "out").string(), s.dir / "log") == 2);
    const json rep = json::parse(slurp(s.dir / "out" / "report.json"));
    CHECK_FALSE(rep.at("converged").get<bool>());
  }
  SUBCASE("config error names the line")
  {
    const auto cfg = s.write("bad.yaml", "seed: 1\nproblem:\n  domian: {}\n");
    CHECK(ncmin("solve -c " + cfg.string() + " -o " + (s.dir / "out").string(), s.dir / "log") == 3);
    CHECK(slurp(s.dir / "log").find("line 3") != std::string::npos);
  }
  SUBCASE("missing config file")
  {
    CHECK(ncmin("solve -c " + (s.dir / "absent.yaml").string(), s.dir / "log") == 4);
  }
  SUBCASE("unwritable output directory")
  {
    const auto blocker = s.write("file", "x");
    CHECK(ncmin("certify -o " + (blocker / "sub").string(), s.dir / "log") == 4);
  }
  SUBCASE("usage error")
  {
    CHECK(ncmin("solve --frobnicate", s.dir / "log") == 3);
    CHECK(ncmin("", s.dir / "log") == 3);
  }
}

TEST_CASE("echo is a fixed point")
{
  Scratch s("echo");
  const auto cfg = s.write("e.yaml", oracle_config);
  REQUIRE(ncmin("solve --echo -c " + cfg.string(), s.dir / "first.yaml") == 0);
  REQUIRE(ncmin("solve --echo -c " + (s.dir / "first.yaml").string(), s.dir / "second.yaml") == 0);
  CHECK(slurp(s.dir / "first.yaml") == slurp(s.dir / "second.yaml"));
  CHECK(slurp(s.dir / "first.yaml").find("cells: 256") != std::string::npos);
}

TEST_CASE("sweep of size one matches a single audit")
{
  Scratch s("single");
  const std::string body = "problem:\n  domain: {kind: interval, cells: 40}\n  datum: step\n"
                           "audit: {minimality_samples: 10, coercivity_fields: 10}\n";
  const auto cfg = s.write("one.yaml", body + "sweep:\n  integrands: [quadratic]\n");
  REQUIRE(ncmin("audit -c " + cfg.string() + " -o " + (s.dir / "a").string(), s.dir / "log") == 0);
  REQUIRE(ncmin("sweep -c " + cfg.string() + " -o " + (s.dir / "s").string(), s.dir / "log") == 0);
  const json a  = json::parse(slurp(s.dir / "a" / "report.json"));
  const json sw = json::parse(slurp(s.dir / "s" / "report.json"));
  REQUIRE(sw.at("points").size() == 1);
  CHECK(sw.at("points")[0].at("estimates") == a.at("estimates"));
  CHECK(sw.at("points")[0].at("trace") == a.at("trace"));
  CHECK(read_csv(s.dir / "s" / "sweep_matrix.csv").size() == 1);
}

TEST_CASE("B sweep widens the gradient bound")
{
  Scratch s("bsweep");
  const auto cfg = s.write("b.yaml", "problem:\n  domain: {kind: interval, cells: 64}\n  datum: sine\n"
                                     "audit: {minimality_samples: 10, coercivity_fields: 10}\n"
                                     "sweep:\n  B: [0, 1, 10]\n");
  REQUIRE(ncmin("sweep -c " + cfg.string() + " -j 2 -o " + (s.dir / "out").string(), s.dir / "log") == 0);
  const json rep = json::parse(slurp(s.dir / "out" / "report.json"));
  REQUIRE(rep.at("points").size() == 3);
  std::vector<double> lhs, rhs, slack;
  for (const auto &p : rep.at("points"))
    {
      // final outer stage, main inequality (not the Hoelder step)
      const json *last = nullptr;
      for (const auto &e : p.at("estimates").at("TERZASTIMA"))
        if (!e.at("params").contains("holder_step"))
          last = &e;
      REQUIRE(last != nullptr);
      lhs.push_back(last->at("lhs"));
      rhs.push_back(last->at("rhs"));
      slack.push_back(last->at("slack"));
    }
  CHECK(rhs[0] < rhs[1]);
  CHECK(rhs[1] < rhs[2]);
  CHECK(slack[0] < slack[1]);
  CHECK(slack[1] < slack[2]);
  for (std::size_t i = 0; i < 3; ++i)
    {
      CHECK(std::isfinite(lhs[i]));
      CHECK(lhs[i] <= rhs[i]);
    }
  const auto matrix = read_csv(s.dir / "out" / "sweep_matrix.csv");
  REQUIRE(matrix.size() == 3);
  CHECK(matrix[0].at("B") == "0");
  CHECK(matrix[2].at("B") == "10");
}
