#include "ncmin/auditor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ncmin
{

namespace
{

constexpr std::array<std::pair<EstimateId, std::string_view>, 11> estimate_names{{
  {EstimateId::LINF_BOUND, "LINF_BOUND"},
  {EstimateId::PRIMASTIMA, "PRIMASTIMA"},
  {EstimateId::TK_BOUND, "TK_BOUND"},
  {EstimateId::SECONDASTIMA, "SECONDASTIMA"},
  {EstimateId::TERZASTIMA, "TERZASTIMA"},
  {EstimateId::GK_BOUND, "GK_BOUND"},
  {EstimateId::COERCIVITY_CHAIN, "COERCIVITY_CHAIN"},
  {EstimateId::TESTCLASS, "TESTCLASS"},
  {EstimateId::WEAK_GRAD_STAB, "WEAK_GRAD_STAB"},
  {EstimateId::STRONG_L2_STAB, "STRONG_L2_STAB"},
  {EstimateId::MINIMALITY, "MINIMALITY"},
}};

// Comparison checks J(u) <= J(v) allow 1e-9 (1 + |J(v)|).
constexpr double comparison_tol = 1e-9;

EstimateReport make_report(EstimateId id, double lhs, double rhs, Tolerance tol = {},
                           bool hard = true)
{
  EstimateReport r;
  r.id   = id;
  r.lhs  = lhs;
  r.rhs  = rhs;
  r.tol  = tol;
  r.hard = hard;
  r.verdict = recompute_verdict(r);
  return r;
}

// int |grad v|^2 / (1 + b|v|)^2 in the b = 1 variant, int (1 + |v|)^2
std::pair<double, double> unit_weight_terms(const NodalFunction &v)
{
  const Grid &g  = v.grid();
  const auto  vq = qpoint_values(v);
  double      weighted = 0.0, square = 0.0;
  for (std::size_t e = 0; e < g.num_elements(); ++e)
    {
      const Vec2   grad = v.gradient(e);
      const double gg   = dot(grad, grad);
      for (std::size_t q = 0; q < g.qpoints_per_element(); ++q)
        {
          const std::size_t qi = g.qindex(e, q);
          const double      d  = 1.0 + std::abs(vq[qi]);
          weighted += g.qweight(qi) * gg / (d * d);
          square += g.qweight(qi) * d * d;
        }
    }
  return {weighted, square};
}

struct Box
{
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
};

Box bounding_box(const Grid &g)
{
  Box b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
        {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    for (int c = 0; c < 2; ++c)
      {
        b.lo[c] = std::min(b.lo[c], g.node(i)[c]);
        b.hi[c] = std::max(b.hi[c], g.node(i)[c]);
      }
  return b;
}

// Smooth zero-trace field: a few random sine modes on the bounding box.
DiscreteField random_smooth_field(const GridPtr &grid, std::mt19937_64 &rng, double scale)
{
  const Box  box = bounding_box(*grid);
  const int  dim = grid->dimension();
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_int_distribution<int>     mode(1, 6);
  struct Term
  {
    double a;
    int    kx, ky;
  };
  std::vector<Term> terms(4);
  for (auto &t : terms)
    t = {scale * amp(rng), mode(rng), dim == 2 ? mode(rng) : 0};
  return interpolate(grid, [&](const Point &x) {
    const double sx = (x[0] - box.lo[0]) / (box.hi[0] - box.lo[0]);
    const double sy = dim == 2 ? (x[1] - box.lo[1]) / (box.hi[1] - box.lo[1]) : 0.0;
    double       s  = 0.0;
    for (const auto &t : terms)
      s += t.a * std::sin(std::numbers::pi * t.kx * sx) *
           (dim == 2 ? std::sin(std::numbers::pi * t.ky * sy) : 1.0);
    return s;
  });
}

// Nodewise noise on interior nodes.
DiscreteField random_rough_field(const GridPtr &grid, std::mt19937_64 &rng, double scale)
{
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<double>                    vals(grid->num_nodes(), 0.0);
  for (std::size_t i = 0; i < vals.size(); ++i)
    {
      const double r = amp(rng);
      if (!grid->on_boundary(i))
        vals[i] = scale * r;
    }
  return DiscreteField(grid, std::move(vals));
}

// Worst comparison J(u) vs J(v) over candidates; rhs is the binding J(v).
struct ComparisonTally
{
  double      ju        = 0.0;
  double      binding   = std::numeric_limits<double>::infinity();
  double      min_value = std::numeric_limits<double>::infinity();
  double      worst_slack = std::numeric_limits<double>::infinity();
  std::size_t count     = 0;
  std::size_t failures  = 0;

  void add(double jv)
  {
    ++count;
    const double allowance = comparison_tol * (1.0 + std::abs(jv));
    if (jv + allowance < binding + comparison_tol * (1.0 + std::abs(binding)))
      binding = jv;
    min_value   = std::min(min_value, jv);
    worst_slack = std::min(worst_slack, jv - ju);
    if (ju > jv + allowance)
      ++failures;
  }

  EstimateReport report(EstimateId id) const
  {
    EstimateReport r = make_report(id, ju, binding,
                                   {0.0, comparison_tol * (1.0 + std::abs(binding))});
    r.params["comparisons"] = static_cast<double>(count);
    r.params["failures"]    = static_cast<double>(failures);
    r.params["worst_slack"] = worst_slack;
    r.params["min_J"]       = min_value;
    return r;
  }
};

// max ratio d_{i+1} / d_i over the last three differences, saturated
// differences counting as zero
std::optional<double> decay_ratio(const std::vector<double> &diffs, double floor)
{
  if (diffs.size() < 2)
    return std::nullopt;
  const std::size_t first = diffs.size() >= 3 ? diffs.size() - 3 : 0;
  double            worst = 0.0;
  for (std::size_t i = first; i + 1 < diffs.size(); ++i)
    {
      const double a = diffs[i], b = diffs[i + 1];
      if (b <= floor)
        continue;
      if (a <= floor)
        return std::numeric_limits<double>::infinity();
      worst = std::max(worst, b / a);
    }
  return worst;
}

} // namespace

std::string_view to_string(EstimateId id)
{
  for (const auto &[k, name] : estimate_names)
    if (k == id)
      return name;
  return "UNKNOWN";
}

std::optional<EstimateId> estimate_from_string(std::string_view name)
{
  for (const auto &[k, n] : estimate_names)
    if (n == name)
      return k;
  return std::nullopt;
}

const std::vector<EstimateId> &all_estimates()
{
  static const std::vector<EstimateId> ids = [] {
    std::vector<EstimateId> v;
    for (const auto &[k, n] : estimate_names)
      v.push_back(k);
    return v;
  }();
  return ids;
}

std::string_view to_string(Verdict v)
{
  switch (v)
    {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::warn:
      return "warn";
    case Verdict::inapplicable:
      return "inapplicable";
    }
  return "unknown";
}

bool holds(double lhs, double rhs, const Tolerance &tol)
{
  return lhs <= rhs * (1.0 + tol.rel) + tol.abs;
}

Verdict recompute_verdict(const EstimateReport &r)
{
  if (r.verdict == Verdict::inapplicable)
    return Verdict::inapplicable;
  if (holds(r.lhs, r.rhs, r.tol))
    return Verdict::pass;
  return r.hard ? Verdict::fail : Verdict::warn;
}

bool consistent(const EstimateReport &r)
{
  return recompute_verdict(r) == r.verdict;
}

std::vector<double> level_sweep(const DiscreteField &u)
{
  const double m = norm(u, Norm::Linf);
  return {0.0, 0.25 * m, 0.5 * m, m, 2.0 * m, 4.0 * m};
}

EstimateReport audit_linf(const DiscreteField &u, const Datum &g)
{
  if (!g.linf_bound())
    {
      EstimateReport r = make_report(EstimateId::LINF_BOUND, norm(u, Norm::Linf),
                                     std::numeric_limits<double>::infinity(), {1e-6, 0.0}, false);
      r.verdict = Verdict::inapplicable;
      r.note    = "datum has no known sup bound";
      return r;
    }
  // the bound actually attained by the samples can be below the declared one
  double sampled = 0.0;
  for (double f : g.qp_values())
    sampled = std::max(sampled, std::abs(f));
  EstimateReport r = make_report(EstimateId::LINF_BOUND, norm(u, Norm::Linf), *g.linf_bound(),
                                 {1e-6, 0.0}, false);
  r.params["sampled_sup"] = sampled;
  return r;
}

EstimateReport audit_primastima(const DiscreteField &u, const ProblemSpec &spec, const Datum &f_used)
{
  const double alpha = spec.integrand().alpha;
  const double lhs   = alpha * weighted_grad_l2(u, spec.b_qp());
  EstimateReport r   = make_report(EstimateId::PRIMASTIMA, lhs, 0.5 * spec.datum().l2_norm_sq());
  r.rhs_tight        = 0.5 * f_used.l2_norm_sq();
  return r;
}

EstimateReport audit_tk(const DiscreteField &u, const ProblemSpec &spec, double k,
                        const Datum &f_used)
{
  const double alpha = spec.integrand().alpha;
  const double B     = spec.coefficient().upper_bound();
  const double h1    = norm(truncate(u, k), Norm::H1_semi);
  const double scale = (1.0 + B * k) * (1.0 + B * k) / (2.0 * alpha);
  EstimateReport r   = make_report(EstimateId::TK_BOUND, h1 * h1, scale * spec.datum().l2_norm_sq());
  r.rhs_tight        = scale * f_used.l2_norm_sq();
  r.params["k"]      = k;
  return r;
}

EstimateReport audit_secondastima(const DiscreteField &u, const ProblemSpec &spec,
                                  const Datum &f_used)
{
  const double l2 = norm(u, Norm::L2);
  EstimateReport r = make_report(EstimateId::SECONDASTIMA, l2 * l2, 4.0 * spec.datum().l2_norm_sq());
  r.rhs_tight      = 4.0 * f_used.l2_norm_sq();
  return r;
}

EstimateReport audit_terzastima(const DiscreteField &u, const ProblemSpec &spec, const Datum &f_used)
{
  const Grid  &g     = u.grid();
  const double alpha = spec.integrand().alpha;
  const double B     = spec.coefficient().upper_bound();
  const double root_measure = std::sqrt(g.measure());
  auto bound = [&](double f2) {
    return std::sqrt(f2 / (2.0 * alpha)) * (root_measure + 2.0 * B * std::sqrt(f2));
  };

  const double w11 = norm(u, Norm::W11_semi);
  EstimateReport r = make_report(EstimateId::TERZASTIMA, w11, bound(spec.datum().l2_norm_sq()));
  r.rhs_tight      = bound(f_used.l2_norm_sq());

  return r;
}

EstimateReport audit_holder_step(const DiscreteField &u, const ProblemSpec &spec)
{
  const Grid  &g  = u.grid();
  const auto   bq = spec.b_qp();
  const auto   vq = qpoint_values(u);
  const double weighted = weighted_grad_l2(u, bq);
  const double square   = integrate(g, [&](std::size_t qi) {
    const double d = 1.0 + bq[qi] * std::abs(vq[qi]);
    return d * d;
  });
  EstimateReport r = make_report(EstimateId::TERZASTIMA, norm(u, Norm::W11_semi),
                                 std::sqrt(weighted) * std::sqrt(square), {1e-10, 1e-14});
  r.params["holder_step"] = 1.0;
  return r;
}

EstimateReport audit_gk(const DiscreteField &u, const ProblemSpec &spec, const Datum &f_used,
                        double k)
{
  const Grid  &g   = u.grid();
  const auto   vq  = qpoint_values(u);
  const auto   fq  = spec.datum().qp_values();
  const auto   fnq = f_used.qp_values();
  const double l2  = norm(tail(u, k), Norm::L2);
  double       region = 0.0, region_tight = 0.0;
  for (std::size_t qi = 0; qi < g.num_qpoints(); ++qi)
    if (std::abs(vq[qi]) >= k)
      {
        region += g.qweight(qi) * fq[qi] * fq[qi];
        region_tight += g.qweight(qi) * fnq[qi] * fnq[qi];
      }
  EstimateReport r = make_report(EstimateId::GK_BOUND, l2 * l2, 4.0 * region);
  r.rhs_tight      = 4.0 * region_tight;
  r.params["k"]    = k;
  return r;
}

EstimateReport audit_coercivity_chain(const NodalFunction &v)
{
  const auto [weighted, square] = unit_weight_terms(v);
  return make_report(EstimateId::COERCIVITY_CHAIN, norm(v, Norm::W11_semi),
                     0.5 * weighted + 0.5 * square, {1e-12, 1e-14});
}

EstimateReport coercivity_property(const GridPtr &grid, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64                        rng(seed);
  std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
  std::optional<EstimateReport>          worst;
  std::size_t                            failures = 0;
  for (std::size_t i = 0; i < count; ++i)
    {
      const double scale = std::pow(10.0, log_scale(rng));
      const auto   v = i % 2 == 0 ? random_smooth_field(grid, rng, scale)
                                  : random_rough_field(grid, rng, scale);
      auto r = audit_coercivity_chain(v);
      if (r.verdict != Verdict::pass)
        ++failures;
      if (!worst || r.slack() / (1.0 + r.rhs) < worst->slack() / (1.0 + worst->rhs))
        worst = std::move(r);
    }
  EstimateReport r = worst ? *worst : audit_coercivity_chain(DiscreteField::zero(grid));
  r.params["fields"]   = static_cast<double>(count);
  r.params["failures"] = static_cast<double>(failures);
  r.note               = "worst of random fields";
  return r;
}

EstimateReport audit_testclass(const DiscreteField &u, const ProblemSpec &spec)
{
  const double A = spec.coefficient().lower_bound();
  if (!(A > 0.0))
    {
      EstimateReport r;
      r.id      = EstimateId::TESTCLASS;
      r.verdict = Verdict::inapplicable;
      r.note    = "coefficient lower bound is zero";
      return r;
    }

  const GridPtr &grid = spec.grid_ptr();
  const Box      box  = bounding_box(*grid);
  Point          centre{0.5 * (box.lo[0] + box.hi[0]), 0.5 * (box.lo[1] + box.hi[1])};
  const double   width = 0.05 * std::max(box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]);
  const double   height = 50.0 * std::max(1.0, norm(u, Norm::Linf));
  const auto     spike = interpolate(grid, [&](const Point &x) {
    const double dx = x[0] - centre[0], dy = x[1] - centre[1];
    return height * std::exp(-(dx * dx + dy * dy) / (width * width));
  });
  const std::vector<DiscreteField> family{u, 2.0 * u, spike};

  ComparisonTally tally;
  tally.ju = eval_J(spec, u);
  double log_h1_max = 0.0, trunc_h1_max = 0.0, l2_max = 0.0;
  double drift = 0.0; // |J(w) - J(T_{top/2} w)|, largest over the family
  for (const auto &w : family)
    {
      l2_max = std::max(l2_max, norm(w, Norm::L2));
      std::vector<double> logs(w.values().size());
      for (std::size_t i = 0; i < logs.size(); ++i)
        logs[i] = std::log1p(A * std::abs(w.values()[i]));
      log_h1_max = std::max(log_h1_max, norm(DiscreteField(grid, std::move(logs)), Norm::H1_semi));

      const double top = norm(w, Norm::Linf);
      if (!(top > 0.0))
        {
          tally.add(eval_J(spec, w));
          continue;
        }
      // increasing levels top/256 .. top; the last one is w itself
      double previous = 0.0;
      for (int j = 8; j >= 0; --j)
        {
          const auto   tw = truncate(w, std::ldexp(top, -j));
          const double jt = eval_J(spec, tw);
          trunc_h1_max    = std::max(trunc_h1_max, norm(tw, Norm::H1_semi));
          tally.add(jt);
          if (j == 0)
            drift = std::max(drift, std::abs(jt - previous));
          previous = jt;
        }
    }
  EstimateReport r = tally.report(EstimateId::TESTCLASS);
  r.params["A"]            = A;
  r.params["candidates"]   = static_cast<double>(family.size());
  r.params["log_h1_max"]   = log_h1_max;
  r.params["trunc_h1_max"] = trunc_h1_max;
  r.params["l2_max"]       = l2_max;
  r.params["saturation_drift"] = drift;
  if (!std::isfinite(log_h1_max) || !std::isfinite(trunc_h1_max) || !std::isfinite(l2_max))
    {
      r.lhs     = std::numeric_limits<double>::infinity();
      r.verdict = recompute_verdict(r);
      r.note    = "membership surrogate not finite";
    }
  return r;
}

EstimateReport audit_minimality(const DiscreteField &u, const ProblemSpec &spec,
                                std::uint64_t seed, std::size_t count)
{
  const GridPtr &grid = spec.grid_ptr();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double top = std::max(norm(u, Norm::Linf), 1e-3);

  ComparisonTally tally;
  tally.ju = eval_J(spec, u);
  tally.add(eval_J(spec, DiscreteField::zero(grid)));
  for (std::size_t i = 1; i < count; ++i)
    {
      switch (i % 5)
        {
        case 0: // scaling
          tally.add(eval_J(spec, (2.0 * unit(rng)) * u));
          break;
        case 1: // truncate
          tally.add(eval_J(spec, truncate(u, top * unit(rng))));
          break;
        case 2: // smooth perturbation
          tally.add(eval_J(spec, u + random_smooth_field(grid, rng, top * std::pow(10.0, -4.0 * unit(rng)))));
          break;
        case 3: // rough perturbation
          tally.add(eval_J(spec, u + random_rough_field(grid, rng, top * std::pow(10.0, -4.0 * unit(rng)))));
          break;
        default: // unrelated smooth field
          tally.add(eval_J(spec, random_smooth_field(grid, rng, 4.0 * top * unit(rng))));
          break;
        }
    }
  EstimateReport r = tally.report(EstimateId::MINIMALITY);
  r.params["seed"] = static_cast<double>(seed);
  return r;
}

std::vector<double> weak_pairings(const DiscreteField &u, const ProblemSpec &spec)
{
  const Grid &g  = u.grid();
  const auto  bq = spec.b_qp();
  const auto  vq = qpoint_values(u);
  std::vector<double> out(10, 0.0);
  for (std::size_t e = 0; e < g.num_elements(); ++e)
    {
      const Vec2 grad = u.gradient(e);
      for (std::size_t q = 0; q < g.qpoints_per_element(); ++q)
        {
          const std::size_t qi = g.qindex(e, q);
          const Point      &x  = g.qpoint(qi);
          const double      w  = g.qweight(qi) / (1.0 + bq[qi] * std::abs(vq[qi]));
          for (int m = 0; m < 10; ++m)
            {
              const double phi0 = std::exp(-0.5 * m * x[0]);
              const double phi1 = std::exp(-0.5 * m * x[1]);
              out[m] += w * (phi0 * grad[0] + phi1 * grad[1]);
            }
        }
    }
  return out;
}

StabilizationReports audit_stabilization(const SolveTrace &trace, const ProblemSpec &spec)
{
  const double floor = 100.0 * spec.solver_tol();
  const auto  &hist  = trace.stabilization_history;

  std::vector<std::vector<double>> pairings;
  for (const auto &stage : trace.outer)
    pairings.push_back(weak_pairings(stage.inner.field, spec));
  auto pairing_diffs = [&](std::size_t m) {
    std::vector<double> diffs;
    for (std::size_t k = 0; k + 1 < pairings.size(); ++k)
      diffs.push_back(std::abs(pairings[k + 1][m] - pairings[k][m]));
    return diffs;
  };

  auto base = [&](EstimateId id) {
    EstimateReport r;
    r.id  = id;
    r.rhs = 1.0;
    r.tol = {0.0, 0.0};
    r.params["stages"] = static_cast<double>(trace.outer.size());
    r.params["floor"]  = floor;
    return r;
  };
  StabilizationReports out{base(EstimateId::STRONG_L2_STAB), base(EstimateId::WEAK_GRAD_STAB)};
  out.weak.params["fields"] = 10.0;
  if (!hist.empty())
    out.strong.params["last_difference"] = hist.back();

  if (const auto bound = spec.datum().linf_bound())
    {
      // f_n = f once n >= sup|f|: those stages must coincide up to the floor
      std::vector<std::size_t> settled;
      for (std::size_t k = 0; k + 1 < trace.outer.size(); ++k)
        if (trace.outer[k].n >= *bound)
          settled.push_back(k);
      for (auto *r : {&out.strong, &out.weak})
        {
          r->rhs = floor;
          r->params["datum_bound"] = *bound;
          if (settled.empty())
            {
              r->verdict = Verdict::inapplicable;
              r->note    = "schedule does not pass the datum bound";
            }
        }
      if (settled.empty())
        return out;
      for (std::size_t k : settled)
        {
          out.strong.lhs = std::max(out.strong.lhs, hist[k]);
          for (std::size_t m = 0; m < 10; ++m)
            out.weak.lhs = std::max(out.weak.lhs, pairing_diffs(m)[k]);
        }
      for (auto *r : {&out.strong, &out.weak})
        {
          r->verdict = recompute_verdict(*r);
          r->note    = "stages beyond the datum bound";
        }
      return out;
    }

  auto finish = [&](EstimateReport &r, std::optional<double> ratio) {
    r.lhs = ratio.value_or(0.0);
    if (!ratio)
      {
        r.verdict = Verdict::inapplicable;
        r.note    = "fewer than three outer stages";
      }
    else
      r.verdict = recompute_verdict(r);
  };
  finish(out.strong, decay_ratio(hist, floor));
  std::optional<double> worst;
  for (std::size_t m = 0; m < 10 && pairings.size() >= 3; ++m)
    if (const auto ratio = decay_ratio(pairing_diffs(m), floor))
      worst = std::max(worst.value_or(0.0), *ratio);
  finish(out.weak, worst);
  return out;
}

std::vector<EstimateReport> audit_stage(const DiscreteField &u, const ProblemSpec &spec,
                                        const Datum &f_used)
{
  std::vector<EstimateReport> out;
  out.push_back(audit_linf(u, f_used));
  out.push_back(audit_primastima(u, spec, f_used));
  for (double k : level_sweep(u))
    out.push_back(audit_tk(u, spec, k, f_used));
  out.push_back(audit_secondastima(u, spec, f_used));
  out.push_back(audit_terzastima(u, spec, f_used));
  out.push_back(audit_holder_step(u, spec));
  for (double k : level_sweep(u))
    out.push_back(audit_gk(u, spec, f_used, k));
  return out;
}

std::vector<EstimateReport> audit_run(const SolveResult &result, const ProblemSpec &spec,
                                      std::uint64_t seed, std::size_t minimality_samples,
                                      std::size_t coercivity_fields)
{
  std::vector<EstimateReport> out;
  for (const auto &stage : result.trace.outer)
    {
      const Datum f_used = make_Jn_datum(spec.datum(), stage.n);
      const auto &inner  = stage.inner;
      const double M     = inner.stages.empty() ? 0.0 : inner.stages.back().M;
      for (auto &r : audit_stage(inner.field, spec, f_used))
        {
          r.params["n"] = stage.n;
          r.params["M"] = M;
          out.push_back(std::move(r));
        }
    }

  const auto &u = result.u;
  auto chain = audit_coercivity_chain(u);
  chain.note = "computed minimizer";
  out.push_back(std::move(chain));
  out.push_back(coercivity_property(spec.grid_ptr(), coercivity_fields, seed ^ 0x9e3779b97f4a7c15ULL));
  out.push_back(audit_testclass(u, spec));
  out.push_back(audit_minimality(u, spec, seed, minimality_samples));
  auto stab = audit_stabilization(result.trace, spec);
  out.push_back(std::move(stab.strong));
  out.push_back(std::move(stab.weak));
  return out;
}

bool all_hard_pass(const std::vector<EstimateReport> &reports)
{
  return std::none_of(reports.begin(), reports.end(),
                      [](const EstimateReport &r) { return r.verdict == Verdict::fail; });
}

} // namespace ncmin
