#pragma once

#include "ncmin/functional.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ncmin
{

/// Line-search parameters of the inner descent.
struct DescentOptions
{
  double      armijo         = 1e-4;
  double      backtrack      = 0.5;
  std::size_t max_backtracks = 60;
  double      initial_step   = 1.0;
  double      max_step       = 1.0;
  /// Energy changes below roundoff_factor * eps * (1 + |E|) count as noise.
  double      roundoff_factor = 1e4;
};

/// One minimization of J_M at fixed (n, M).
struct StageRecord
{
  double      n          = 0.0;
  double      M          = 0.0;
  std::size_t iterations = 0;
  double      residual_inf = 0.0;
  double      energy       = 0.0;
  bool        converged    = false;
  std::string failure;                 // empty when converged
  std::vector<double> energies;        // energies[0] is the start energy
  /// Smallest Armijo surplus  E_k + c t g.d - E_{k+1}  over accepted steps
  /// (nonnegative by construction; +inf when no step was taken).
  double min_armijo_surplus = std::numeric_limits<double>::infinity();
  /// Full Newton steps accepted on residual decrease because the energy
  /// change was below rounding level.
  std::size_t roundoff_steps = 0;
  std::optional<DiscreteField> field;
};

struct InnerResult
{
  DiscreteField field;
  StageRecord   record;
};

/// Minimize the discrete J_M from `start` by descent with Armijo
/// backtracking along Newton directions of the discrete energy (the convex
/// part of the Hessian when the full one is indefinite). Accepted steps lower
/// J_M, except full steps taken when the decrease is below rounding level
/// (counted in roundoff_steps), which must reduce the residual instead.
InnerResult minimize_inner(const ProblemSpec &spec, double M, const DiscreteField &start,
                           const Datum &datum, const DescentOptions &opts = {});
InnerResult minimize_inner(const ProblemSpec &spec, double M, const DiscreteField &start);

struct MScheduleResult
{
  DiscreteField              field;
  std::vector<StageRecord>   stages;
  /// First stage whose output satisfies T_M(w) = w and is reproduced (within
  /// 10 * solver_tol in max norm) by every later stage.
  std::optional<std::size_t> fixpoint_index;
  bool                       schedule_converged = false;
};

/// Run minimize_inner over the M levels, warm starting each stage from the
/// previous one. `n_level` selects the default M levels (up to 2n). The datum
/// must carry a finite sup bound.
MScheduleResult solve_M_schedule(const ProblemSpec &spec, const Datum &datum,
                                 const DiscreteField &start, double n_level,
                                 const DescentOptions &opts = {});
MScheduleResult solve_M_schedule(const ProblemSpec &spec, const Datum &datum);

struct OuterStage
{
  double          n = 0.0;
  MScheduleResult inner;
};

struct SolveTrace
{
  std::vector<OuterStage> outer;
  /// || u_{n_{k+1}} - u_{n_k} ||_L2, one entry per consecutive pair of stages.
  std::vector<double> stabilization_history;

  bool all_converged() const;
};

struct SolveResult
{
  DiscreteField u;
  SolveTrace    trace;
};

/// Outer loop over the data truncation levels n: f_n = T_n(f), solve the
/// M schedule warm started from the previous u_n, record stabilization.
SolveResult solve_outer(const ProblemSpec &spec, const DescentOptions &opts = {});


struct RefinementReport
{
  std::vector<std::size_t> cells;
  std::vector<double>      mesh_sizes;
  /// L2 distance between consecutive solutions, measured on the finer grid.
  std::vector<double> distances;
  std::vector<double> distance_orders;
  /// L2 error against a reference solution when one is supplied.
  std::vector<double> errors;
  std::vector<double> error_orders;
  bool                all_converged = true;
};

/// Solve the same continuous problem on each grid of the sequence.
RefinementReport refinement_study(const std::function<ProblemSpec(std::size_t)> &make_spec,
                                  const std::vector<std::size_t>               &cell_counts,
                                  const std::optional<PointFunction>           &exact = std::nullopt);

} // namespace ncmin
