#include "ncmin/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace ncmin
{

namespace
{

double max_abs(std::span<const double> v)
{
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

// Newton metric of the discrete J_M restricted to interior nodes. Terms
// coupling grad v with the weight derivative can make it indefinite; in that
// case the convex part (integrand Hessian, weight curvature, mass) is used,
// which is positive definite for convex j.
class NewtonMetric
{
public:
  explicit NewtonMetric(const Grid &grid)
    : grid_(grid)
    , interior_(grid.num_nodes(), -1)
  {
    int k = 0;
    for (std::size_t i = 0; i < grid.num_nodes(); ++i)
      if (!grid.on_boundary(i))
        interior_[i] = k++;
    size_ = k;
  }

  // d = -H(v)^{-1} g on interior nodes, zero on the boundary
  bool direction(const ProblemSpec &spec, std::span<const double> v, double M,
                 std::span<const double> g, std::vector<double> &d)
  {
    d.assign(v.size(), 0.0);
    if (size_ == 0)
      return true;
    if (!factor(spec, v, M, true) && !factor(spec, v, M, false))
      return false;
    Eigen::VectorXd rhs(size_);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (interior_[i] >= 0)
        rhs[interior_[i]] = -g[i];
    const Eigen::VectorXd sol = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success)
      return false;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (interior_[i] >= 0)
        d[i] = sol[interior_[i]];
    return true;
  }

private:
  bool factor(const ProblemSpec &spec, std::span<const double> v, double M, bool full)
  {
    assemble(spec, v, M, full);
    if (!analyzed_)
      {
        solver_.analyzePattern(matrix_);
        analyzed_ = true;
      }
    solver_.factorize(matrix_);
    if (solver_.info() != Eigen::Success)
      return false;
    return (solver_.vectorD().array() > 0.0).all();
  }

  void assemble(const ProblemSpec &spec, std::span<const double> v, double M, bool full)
  {
    const Grid       &g  = grid_;
    const auto        bq = spec.b_qp();
    const Integrand  &in = spec.integrand();
    const double      fallback = in.alpha + in.beta;
    const std::size_t nq = g.qpoints_per_element();
    const int         nv = g.vertices_per_element();

    triplets_.clear();
    for (std::size_t e = 0; e < g.num_elements(); ++e)
      {
        const auto idx = g.element(e);
        Vec2       grad{0.0, 0.0};
        for (int a = 0; a < nv; ++a)
          {
            const Vec2 &dphi = g.basis_gradient(e, a);
            grad[0] += v[idx[a]] * dphi[0];
            grad[1] += v[idx[a]] * dphi[1];
          }
        for (std::size_t q = 0; q < nq; ++q)
          {
            const std::size_t qi = g.qindex(e, q);
            const Point      &x  = g.qpoint(qi);
            const double      w  = g.qweight(qi);
            double            vq = 0.0;
            for (int a = 0; a < nv; ++a)
              vq += g.barycentric(q, a) * v[idx[a]];
            const double av = std::abs(vq);
            const double s  = av <= M ? (vq > 0.0 ? 1.0 : (vq < 0.0 ? -1.0 : 0.0)) : 0.0;
            const double b  = bq[qi];
            const double D  = 1.0 + b * std::min(av, M);
            const double W  = 1.0 / (D * D);
            const double dW = -2.0 * b * s * W / D;
            const double d2W = 6.0 * b * b * s * s * W * W;

            const Integrand::Hessian H =
              in.hessian ? in.hessian(x, grad) : Integrand::Hessian{fallback, 0.0, 0.0, fallback};
            const double jv = (full || d2W != 0.0) ? in.density(x, grad) : 0.0;
            const Vec2   jx = full ? in.gradient(x, grad) : Vec2{0.0, 0.0};

            for (int a = 0; a < nv; ++a)
              {
                const int ia = interior_[idx[a]];
                if (ia < 0)
                  continue;
                const Vec2  &pa = g.basis_gradient(e, a);
                const double la = g.barycentric(q, a);
                for (int c = 0; c < nv; ++c)
                  {
                    const int ic = interior_[idx[c]];
                    if (ic < 0)
                      continue;
                    const Vec2  &pc = g.basis_gradient(e, c);
                    const double lc = g.barycentric(q, c);
                    const Vec2   Hpc{H[0] * pc[0] + H[1] * pc[1], H[2] * pc[0] + H[3] * pc[1]};
                    double       val = dot(pa, Hpc) * W + (jv * d2W + 1.0) * la * lc;
                    if (full)
                      val += (dot(jx, pa) * lc + dot(jx, pc) * la) * dW;
                    triplets_.emplace_back(ia, ic, w * val);
                  }
              }
          }
      }
    matrix_.resize(size_, size_);
    matrix_.setFromTriplets(triplets_.begin(), triplets_.end());
  }

  const Grid                                         &grid_;
  std::vector<int>                                    interior_;
  int                                                 size_ = 0;
  std::vector<Eigen::Triplet<double>>                 triplets_;
  Eigen::SparseMatrix<double>                         matrix_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>  solver_;
  bool                                                analyzed_ = false;
};

} // namespace

InnerResult minimize_inner(const ProblemSpec &spec, double M, const DiscreteField &start,
                           const Datum &datum, const DescentOptions &opts)
{
  if (!(M > 0.0))
    throw std::invalid_argument("minimize_inner: M must be positive");
  if (start.grid_ptr() != spec.grid_ptr() || datum.grid_ptr() != spec.grid_ptr())
    throw std::invalid_argument("minimize_inner: start field or datum on a different grid");

  StageRecord rec;
  rec.M = M;
  rec.n = datum.linf_bound().value_or(std::numeric_limits<double>::infinity());

  std::vector<double> v(start.values().begin(), start.values().end());
  std::vector<double> grad(v.size()), dir, trial(v.size());
  NewtonMetric        metric(spec.grid());

  double energy = detail::energy(spec, v, M, datum);
  rec.energies.push_back(energy);
  double step = opts.initial_step;

  for (;;)
    {
      detail::energy_gradient(spec, v, M, datum, grad);
      rec.residual_inf = max_abs(grad);
      if (rec.residual_inf <= spec.solver_tol())
        {
          rec.converged = true;
          break;
        }
      if (rec.iterations >= spec.max_iter())
        {
          rec.failure = "iteration cap reached";
          break;
        }
      if (!metric.direction(spec, v, M, grad, dir))
        {
          rec.failure = "metric factorization failed";
          break;
        }
      double slope = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i)
        slope += grad[i] * dir[i];
      if (!(slope < 0.0))
        {
          rec.failure = "no descent direction";
          break;
        }

      bool        accepted = false;
      std::size_t tries    = 0;
      double      next     = energy;
      for (; tries <= opts.max_backtracks; ++tries)
        {
          for (std::size_t i = 0; i < v.size(); ++i)
            trial[i] = v[i] + step * dir[i];
          next = detail::energy(spec, trial, M, datum);
          const double surplus = energy + opts.armijo * step * slope - next;
          if (surplus >= 0.0 && next < energy)
            {
              accepted               = true;
              rec.min_armijo_surplus = std::min(rec.min_armijo_surplus, surplus);
              break;
            }
          step *= opts.backtrack;
        }
      if (!accepted)
        {
          // Near the minimizer the energy decrease of a Newton step can sink
          // below the rounding level of the quadrature sum. Accept the full
          // step when the energy stays within that level and both the
          // directional derivative and the residual shrink.
          for (std::size_t i = 0; i < v.size(); ++i)
            trial[i] = v[i] + dir[i];
          next = detail::energy(spec, trial, M, datum);
          detail::energy_gradient(spec, trial, M, datum, grad);
          double trial_slope = 0.0;
          for (std::size_t i = 0; i < v.size(); ++i)
            trial_slope += grad[i] * dir[i];
          const double noise = opts.roundoff_factor * std::numeric_limits<double>::epsilon() *
                               (1.0 + std::abs(energy));
          if (next <= energy + noise && std::abs(trial_slope) <= 0.8 * std::abs(slope) &&
              max_abs(grad) < rec.residual_inf)
            {
              accepted = true;
              step     = 1.0;
              ++rec.roundoff_steps;
            }
        }
      if (!accepted)
        {
          rec.failure = "line search failed";
          break;
        }

      v.swap(trial);
      energy = next;
      rec.energies.push_back(energy);
      ++rec.iterations;
      step = tries == 0 ? std::min(2.0 * step, opts.max_step) : step;
    }

  rec.energy = energy;
  DiscreteField out(spec.grid_ptr(), std::move(v));
  rec.field = out;
  return {std::move(out), std::move(rec)};
}

InnerResult minimize_inner(const ProblemSpec &spec, double M, const DiscreteField &start)
{
  return minimize_inner(spec, M, start, spec.datum());
}

MScheduleResult solve_M_schedule(const ProblemSpec &spec, const Datum &datum,
                                 const DiscreteField &start, double n_level,
                                 const DescentOptions &opts)
{
  if (!datum.linf_bound())
    throw std::invalid_argument("solve_M_schedule: datum must be bounded");

  const auto      levels = spec.m_levels(n_level);
  MScheduleResult res{start, {}, std::nullopt, false};
  DiscreteField   current = start;
  for (double M : levels)
    {
      auto inner = minimize_inner(spec, M, current, datum, opts);
      inner.record.n = n_level;
      current        = std::move(inner.field);
      res.stages.push_back(std::move(inner.record));
    }
  res.field = current;

  const double tol = 10.0 * spec.solver_tol();
  for (std::size_t i = 0; i < res.stages.size() && !res.fixpoint_index; ++i)
    {
      const DiscreteField &wi = *res.stages[i].field;
      if (!(norm(wi, Norm::Linf) < res.stages[i].M))
        continue;
      bool reproduced = true;
      for (std::size_t k = i + 1; k < res.stages.size() && reproduced; ++k)
        reproduced = norm(*res.stages[k].field - wi, Norm::Linf) <= tol;
      if (reproduced)
        res.fixpoint_index = i;
    }

  bool all = true;
  for (const auto &s : res.stages)
    all = all && s.converged;
  res.schedule_converged = all && res.fixpoint_index.has_value();
  return res;
}

MScheduleResult solve_M_schedule(const ProblemSpec &spec, const Datum &datum)
{
  if (!datum.linf_bound())
    throw std::invalid_argument("solve_M_schedule: datum must be bounded");
  return solve_M_schedule(spec, datum, DiscreteField::zero(spec.grid_ptr()), *datum.linf_bound());
}

bool SolveTrace::all_converged() const
{
  for (const auto &o : outer)
    if (!o.inner.schedule_converged)
      return false;
  return true;
}

SolveResult solve_outer(const ProblemSpec &spec, const DescentOptions &opts)
{
  SolveTrace    trace;
  DiscreteField current = DiscreteField::zero(spec.grid_ptr());
  for (double n : spec.n_levels())
    {
      const Datum fn    = make_Jn_datum(spec.datum(), n);
      auto        inner = solve_M_schedule(spec, fn, current, n, opts);
      if (!trace.outer.empty())
        trace.stabilization_history.push_back(norm(inner.field - current, Norm::L2));
      current = inner.field;
      trace.outer.push_back({n, std::move(inner)});
    }
  return {std::move(current), std::move(trace)};
}

namespace
{
// P1 function `coarse` sampled at the nodes of `fine`.
NodalFunction transfer(const NodalFunction &coarse, const GridPtr &fine)
{
  std::vector<double> v(fine->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = coarse.evaluate(fine->node(i));
  return NodalFunction(fine, std::move(v));
}

double rate(double e0, double e1, double h0, double h1)
{
  return std::log(e0 / e1) / std::log(h0 / h1);
}
} // namespace

RefinementReport refinement_study(const std::function<ProblemSpec(std::size_t)> &make_spec,
                                  const std::vector<std::size_t>               &cell_counts,
                                  const std::optional<PointFunction>           &exact)
{
  if (cell_counts.size() < 2)
    throw std::invalid_argument("refinement_study: need at least two grids");

  RefinementReport           rep;
  std::vector<DiscreteField> sols;
  for (std::size_t cells : cell_counts)
    {
      const ProblemSpec spec = make_spec(cells);
      auto              res  = solve_outer(spec);
      rep.all_converged      = rep.all_converged && res.trace.all_converged();
      rep.cells.push_back(cells);
      rep.mesh_sizes.push_back(spec.grid().mesh_size());
      if (exact)
        {
          const Grid &g  = spec.grid();
          const auto  uq = qpoint_values(res.u);
          const double e2 = integrate(g, [&](std::size_t qi) {
            const double d = uq[qi] - (*exact)(g.qpoint(qi));
            return d * d;
          });
          rep.errors.push_back(std::sqrt(e2));
        }
      sols.push_back(std::move(res.u));
    }

  for (std::size_t k = 0; k + 1 < sols.size(); ++k)
    {
      const NodalFunction coarse = transfer(sols[k], sols[k + 1].grid_ptr());
      std::vector<double> diff(coarse.size());
      for (std::size_t i = 0; i < diff.size(); ++i)
        diff[i] = sols[k + 1][i] - coarse[i];
      rep.distances.push_back(norm(NodalFunction(sols[k + 1].grid_ptr(), std::move(diff)), Norm::L2));
    }
  for (std::size_t k = 0; k + 1 < rep.distances.size(); ++k)
    rep.distance_orders.push_back(
      rate(rep.distances[k], rep.distances[k + 1], rep.mesh_sizes[k], rep.mesh_sizes[k + 1]));
  for (std::size_t k = 0; k + 1 < rep.errors.size(); ++k)
    rep.error_orders.push_back(
      rate(rep.errors[k], rep.errors[k + 1], rep.mesh_sizes[k], rep.mesh_sizes[k + 1]));
  return rep;
}

} // namespace ncmin
