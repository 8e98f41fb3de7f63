#include "ncmin/auditor.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ncmin;

namespace
{

DiscreteField tent(const GridPtr &g, double c)
{
  return interpolate(g, [c](const Point &x) { return c * (1.0 - std::abs(2.0 * x[0] - 1.0)); });
}

ProblemSpec constant_problem(const GridPtr &g, double B, double value)
{
  return ProblemSpec(g, make_integrand("quadratic"), make_coefficient("constant", {{"B", B}}),
                     make_datum(g, "constant", {{"value", value}}), {}, 1e-10);
}

const SolveResult &power_run()
{
  static const auto g = build_interval_grid(0, 1, 96);
  static const ProblemSpec spec(g, make_integrand("logaug"), make_coefficient("step"),
                                make_datum(g, "power"), {}, 1e-9);
  static const SolveResult res = solve_outer(spec);
  return res;
}

const ProblemSpec &power_spec()
{
  static const auto g = power_run().u.grid_ptr();
  static const ProblemSpec spec(g, make_integrand("logaug"), make_coefficient("step"),
                                make_datum(g, "power"), {}, 1e-9);
  return spec;
}

} // namespace

TEST_CASE("verdict arithmetic")
{
  CHECK(holds(1.0, 1.0, {0.0, 0.0}));
  CHECK_FALSE(holds(1.0 + 1e-9, 1.0, {0.0, 0.0}));
  CHECK(holds(1.0 + 1e-9, 1.0, {1e-8, 0.0}));
  CHECK(holds(1e-13, 0.0, {}));
  EstimateReport r;
  r.lhs  = 2.0;
  r.rhs  = 1.0;
  r.hard = false;
  CHECK(recompute_verdict(r) == Verdict::warn);
  r.hard = true;
  CHECK(recompute_verdict(r) == Verdict::fail);
  CHECK_FALSE(consistent(r));
  r.verdict = Verdict::inapplicable;
  CHECK(consistent(r));
  CHECK(r.slack() == -1.0);
}

TEST_CASE("estimate names round trip")
{
  CHECK(all_estimates().size() == 11);
  for (EstimateId id : all_estimates())
    CHECK(estimate_from_string(to_string(id)) == id);
  CHECK_FALSE(estimate_from_string("NOT_AN_ESTIMATE").has_value());
  CHECK(to_string(Verdict::inapplicable) == "inapplicable");
}

TEST_CASE("estimates of a tent field against closed forms")
{
  auto         g = build_interval_grid(0, 1, 2048);
  const double c = 1.5, B = 2.0, a = 0.8;
  auto         spec = constant_problem(g, B, a);
  auto         v    = tent(g, c);

  const auto prima = audit_primastima(v, spec, spec.datum());
  CHECK(prima.lhs == doctest::Approx(4.0 * c * c / (1.0 + B * c)).epsilon(1e-9));
  CHECK(prima.rhs == doctest::Approx(0.5 * a * a).epsilon(1e-14));

  const auto second = audit_secondastima(v, spec, spec.datum());
  CHECK(second.lhs == doctest::Approx(c * c / 3.0).epsilon(1e-12));
  CHECK(second.rhs == doctest::Approx(4.0 * a * a).epsilon(1e-14));

  const auto third = audit_terzastima(v, spec, spec.datum());
  CHECK(third.lhs == doctest::Approx(2.0 * c).epsilon(1e-12));
  CHECK(third.rhs == doctest::Approx(std::sqrt(a * a / 2.0) * (1.0 + 2.0 * B * a)).epsilon(1e-14));

  // T_k of the tent has slope 2c on a set of measure k/c; k = 3/4 cuts at nodes
  const double k  = 0.75;
  const auto   tk = audit_tk(v, spec, k, spec.datum());
  CHECK(tk.lhs == doctest::Approx(4.0 * c * k).epsilon(1e-12));
  CHECK(tk.rhs == doctest::Approx((1.0 + B * k) * (1.0 + B * k) / 2.0 * a * a).epsilon(1e-14));

  const auto linf = audit_linf(v, spec.datum());
  CHECK(linf.lhs == doctest::Approx(c));
  CHECK(linf.rhs == a);
  CHECK(linf.verdict == Verdict::warn);
  CHECK_FALSE(linf.hard);
}

TEST_CASE("tail and full-field estimates agree at level zero")
{
  const auto &res  = power_run();
  const auto &spec = power_spec();
  for (const auto &stage : res.trace.outer)
    {
      const Datum fn = make_Jn_datum(spec.datum(), stage.n);
      const auto  gk = audit_gk(stage.inner.field, spec, fn, 0.0);
      const auto  s2 = audit_secondastima(stage.inner.field, spec, fn);
      CHECK(gk.lhs == doctest::Approx(s2.lhs).epsilon(1e-12));
      CHECK(gk.rhs == doctest::Approx(s2.rhs).epsilon(1e-12));
      CHECK(*gk.rhs_tight == doctest::Approx(*s2.rhs_tight).epsilon(1e-12));

      // above the sup the truncation is the identity
      const double top = norm(stage.inner.field, Norm::Linf);
      const auto   tk  = audit_tk(stage.inner.field, spec, 2.0 * top, fn);
      const double h1  = norm(stage.inner.field, Norm::H1_semi);
      CHECK(tk.lhs == doctest::Approx(h1 * h1).epsilon(1e-14));
    }
}

TEST_CASE("coercivity chain for v = x")
{
  auto g = build_interval_grid(0, 1, 4096);
  auto v = nodal_interpolant(g, [](const Point &x) { return x[0]; });
  const auto r = audit_coercivity_chain(v);
  CHECK(r.lhs == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.rhs == doctest::Approx(0.25 + 7.0 / 6.0).epsilon(1e-9));
  CHECK(r.verdict == Verdict::pass);

  for (const auto &grid : {build_interval_grid(-1, 2, 50), build_rect_grid(9, 7, 2, 1)})
    {
      const auto p = coercivity_property(grid, 100, 77);
      CHECK(p.verdict == Verdict::pass);
      CHECK(p.params.at("failures") == 0.0);
      CHECK(p.params.at("fields") == 100.0);
    }
}

TEST_CASE("Hoelder step holds for arbitrary fields")
{
  auto g = build_rect_grid(7, 7, 1, 1);
  ProblemSpec spec(g, make_integrand("anisotropic"), make_coefficient("bump"), make_datum(g, "sine"));
  std::mt19937_64                  rng(3);
  std::normal_distribution<double> d(0.0, 5.0);
  for (int rep = 0; rep < 20; ++rep)
    {
      std::vector<double> vals(g->num_nodes(), 0.0);
      for (std::size_t i = 0; i < vals.size(); ++i)
        {
          const double x = d(rng);
          if (!g->on_boundary(i))
            vals[i] = x;
        }
      const auto r = audit_holder_step(DiscreteField(g, vals), spec);
      CHECK(r.verdict == Verdict::pass);
      CHECK(r.params.at("holder_step") == 1.0);
      CHECK(r.id == EstimateId::TERZASTIMA);
    }
}

TEST_CASE("minimality detects a non-minimizer")
{
  auto g    = build_interval_grid(0, 1, 64);
  auto spec = constant_problem(g, 1.0, 1.0);
  const auto bad = audit_minimality(tent(g, 10.0), spec, 5);
  CHECK(bad.verdict == Verdict::fail);
  CHECK(bad.params.at("failures") > 0.0);

  auto u   = solve_outer(spec).u;
  auto ok  = audit_minimality(u, spec, 5);
  CHECK(ok.verdict == Verdict::pass);
  CHECK(ok.params.at("comparisons") == 50.0);
  CHECK(ok.lhs == eval_J(spec, u));
}

TEST_CASE("test-class comparison needs a positive coefficient floor")
{
  auto g = build_interval_grid(0, 1, 64);
  ProblemSpec zero(g, make_integrand("quadratic"), make_coefficient("zero"), make_datum(g, "sine"));
  CHECK(audit_testclass(DiscreteField::zero(g), zero).verdict == Verdict::inapplicable);
  ProblemSpec bump(g, make_integrand("quadratic"), make_coefficient("bump"), make_datum(g, "sine"));
  CHECK(audit_testclass(DiscreteField::zero(g), bump).verdict == Verdict::inapplicable);

  auto spec = constant_problem(g, 1.0, 2.0);
  auto u    = solve_outer(spec).u;
  auto r    = audit_testclass(u, spec);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.params.at("candidates") == 3.0);
  CHECK(std::isfinite(r.params.at("log_h1_max")));
}

TEST_CASE("full audit of a run with unbounded data")
{
  const auto &res  = power_run();
  const auto &spec = power_spec();
  REQUIRE(res.trace.all_converged());
  const auto reports = audit_run(res, spec, 99, 50, 50);
  CHECK(all_hard_pass(reports));
  for (const auto &r : reports)
    {
      INFO(to_string(r.id));
      CHECK(consistent(r));
      if (r.rhs_tight)
        CHECK(*r.rhs_tight <= r.rhs * (1.0 + 1e-14));
    }
  std::size_t linf = 0, strong = 0, weak = 0;
  for (const auto &r : reports)
    {
      linf += r.id == EstimateId::LINF_BOUND;
      if (r.id == EstimateId::STRONG_L2_STAB)
        {
          ++strong;
          CHECK(r.verdict == Verdict::pass);
          CHECK(r.lhs < 1.0);
        }
      if (r.id == EstimateId::WEAK_GRAD_STAB)
        {
          ++weak;
          CHECK(r.verdict == Verdict::pass);
        }
    }
  CHECK(linf == res.trace.outer.size());
  CHECK(strong == 1);
  CHECK(weak == 1);

  const auto again = audit_run(res, spec, 99, 50, 50);
  REQUIRE(again.size() == reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i)
    {
      CHECK(again[i].lhs == reports[i].lhs);
      CHECK(again[i].rhs == reports[i].rhs);
    }
}

TEST_CASE("stabilization with too few stages is inapplicable")
{
  auto g = build_interval_grid(0, 1, 32);
  ProblemSpec spec(g, make_integrand("quadratic"), make_coefficient("constant"), make_datum(g, "power"),
                   {std::nullopt, std::vector<double>{1.0, 2.0}}, 1e-9);
  const auto res  = solve_outer(spec);
  const auto stab = audit_stabilization(res.trace, spec);
  CHECK(stab.strong.verdict == Verdict::inapplicable);
  CHECK(stab.weak.verdict == Verdict::inapplicable);

  SolveTrace fake;
  fake.stabilization_history = {1.0, 0.5, 0.6};
  const auto grown = audit_stabilization(fake, spec);
  CHECK(grown.strong.lhs == doctest::Approx(1.2));
  CHECK(grown.strong.verdict == Verdict::fail);
}

TEST_CASE("bounded data: stages beyond sup f must coincide")
{
  auto g = build_interval_grid(0, 1, 32);
  auto spec_for = [&](std::vector<double> n) {
    return ProblemSpec(g, make_integrand("quadratic"), make_coefficient("constant", {{"B", 2.0}}),
                       make_datum(g, "constant", {{"value", 2.0}}), {std::nullopt, std::move(n)}, 1e-10);
  };

  // n = 1 differs from n = 2 but lies below the bound, so it is not judged
  const auto past = spec_for({1.0, 2.0, 4.0, 8.0});
  const auto res  = solve_outer(past);
  REQUIRE(res.trace.all_converged());
  CHECK(res.trace.stabilization_history.front() > 1e-3);
  const auto stab = audit_stabilization(res.trace, past);
  CHECK(stab.strong.verdict == Verdict::pass);
  CHECK(stab.weak.verdict == Verdict::pass);
  CHECK(stab.strong.lhs <= 100.0 * 1e-10);
  CHECK(stab.strong.params.at("datum_bound") == 2.0);

  const auto short_spec = spec_for({1.0, 2.0});
  const auto early      = audit_stabilization(solve_outer(short_spec).trace, short_spec);
  CHECK(early.strong.verdict == Verdict::inapplicable);
  CHECK(early.weak.verdict == Verdict::inapplicable);
}
