#pragma once

// Integrands, coefficient and datum fields, the discrete energies J, J_M and
// their exact nodal gradient.

#include "ncmin/grid.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ncmin
{

using ParamMap = std::map<std::string, double>;

/// `given` completed with the documented defaults of a built-in; family is
/// "integrand", "coefficient" or "datum". Unknown ids or keys throw
/// std::invalid_argument naming the known ones.
ParamMap resolve_params(std::string_view family, std::string_view id, const ParamMap &given = {});

/// Density j(x, xi) with its xi-gradient and claimed structural constants
///   alpha |xi|^2 <= j(x, xi) <= beta |xi|^2,   |j_xi(x, xi)| <= gamma |xi|.
/// In 1D the second component of xi is always zero. The xi-Hessian is
/// optional and only used to build the solver's Newton metric.
struct Integrand
{
  using Hessian = std::array<double, 4>; // row-major 2x2

  std::string label;
  double      alpha = 1.0;
  double      beta  = 1.0;
  double      gamma = 2.0;
  std::function<double(const Point &, const Vec2 &)> density;
  std::function<Vec2(const Point &, const Vec2 &)>   gradient;
  std::function<Hessian(const Point &, const Vec2 &)> hessian;
};

/// Built-in integrands:
///   quadratic    a(x)|xi|^2, alpha <= a <= beta          (params: alpha, beta)
///   anisotropic  xi^T A(x) xi, spec(A) in [lmin, lmax]   (params: lmin, lmax)
///   logaug       |xi|^2 + 1/2 log(1 + |xi|^2)
Integrand make_integrand(std::string_view id, const ParamMap &params = {});
const std::vector<std::string> &integrand_ids();


/// Coefficient b(x) with certified bounds 0 <= lower <= b <= upper.
class CoefficientField
{
public:
  CoefficientField(std::string label, PointFunction fn, double lower, double upper);

  double operator()(const Point &x) const { return fn_(x); }
  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }
  const std::string &label() const { return label_; }

  /// Values at the grid's quadrature points; throws std::domain_error if a
  /// sample falls outside [lower, upper].
  std::vector<double> sample(const Grid &grid) const;

private:
  std::string   label_;
  PointFunction fn_;
  double        lower_;
  double        upper_;
};

/// Built-in coefficients (every one takes the scale parameter B):
///   constant  b = B
///   step      b = ratio*B left of `split`, B right of it
///   bump      b = B exp(-|x - c|^2 / width^2), centred in the domain
///   zero      b = 0
CoefficientField make_coefficient(std::string_view id, const ParamMap &params = {});
const std::vector<std::string> &coefficient_ids();


/// Right-hand side f, sampled at the quadrature points of one grid.
class Datum
{
public:
  Datum(GridPtr grid, std::string label, PointFunction fn, std::optional<double> linf_bound);

  double operator()(const Point &x) const { return fn_(x); }
  const std::string &label() const { return label_; }
  const GridPtr &grid_ptr() const { return grid_; }
  std::span<const double> qp_values() const { return qp_values_; }
  double l2_norm_sq() const { return l2_norm_sq_; }
  /// Known sup bound; empty for unbounded data.
  std::optional<double> linf_bound() const { return linf_bound_; }

  /// Datum T_n(f): sampled values clipped to [-n, n].
  Datum truncated(double n) const;

private:
  GridPtr               grid_;
  std::string           label_;
  PointFunction         fn_;
  std::vector<double>   qp_values_;
  double                l2_norm_sq_ = 0.0;
  std::optional<double> linf_bound_;
};

/// Built-in data:
///   constant  f = value
///   sine      f = amplitude prod_i sin(pi x_i / L_i)
///   power     f = |x - x0|^(-s)   (unbounded for s > 0; x0 = origin)
///   step      f = left for x_1 < split, right otherwise
Datum make_datum(const GridPtr &grid, std::string_view id, const ParamMap &params = {});
const std::vector<std::string> &datum_ids();

/// f_n = T_n(f). Throws std::invalid_argument for n <= 0.
Datum make_Jn_datum(const Datum &f, double n);


/// Everything that defines one instance of the minimization problem.
/// Empty schedules select the defaults (see m_levels / n_levels).
class ProblemSpec
{
public:
  struct Schedules
  {
    std::optional<std::vector<double>> m;
    std::optional<std::vector<double>> n;
  };

  ProblemSpec(GridPtr grid, Integrand integrand, CoefficientField b, Datum f,
              Schedules schedules = {}, double solver_tol = 1e-8, std::size_t max_iter = 50000);

  const Grid &grid() const { return *grid_; }
  const GridPtr &grid_ptr() const { return grid_; }
  const Integrand &integrand() const { return integrand_; }
  const CoefficientField &coefficient() const { return b_; }
  std::span<const double> b_qp() const { return b_qp_; }
  const Datum &datum() const { return f_; }
  const Schedules &schedules() const { return schedules_; }
  double solver_tol() const { return solver_tol_; }
  std::size_t max_iter() const { return max_iter_; }

  /// M levels used for an inner schedule whose datum truncation level is n:
  /// the explicit schedule if given, otherwise 1, 2, 4, ... up to 2n.
  std::vector<double> m_levels(double n) const;

  /// Outer truncation levels: explicit schedule, or powers of two up to the
  /// datum bound for bounded f, or (1, 2, 4, 8, 16).
  std::vector<double> n_levels() const;

  /// Copy with a different installed datum (same grid).
  ProblemSpec with_datum(Datum f) const;

private:
  GridPtr             grid_;
  Integrand           integrand_;
  CoefficientField    b_;
  std::vector<double> b_qp_;
  Datum               f_;
  Schedules           schedules_;
  double              solver_tol_;
  std::size_t         max_iter_;
};

inline constexpr double no_truncation = std::numeric_limits<double>::infinity();

double eval_J(const ProblemSpec &spec, const DiscreteField &v);

/// J_M with the installed datum. Throws std::invalid_argument for M <= 0.
double eval_JM(const ProblemSpec &spec, const DiscreteField &v, double M);
double eval_JM(const ProblemSpec &spec, const DiscreteField &v, double M, const Datum &datum);

/// Exact gradient of the discrete J_M with respect to nodal values;
/// boundary entries are zero.
std::vector<double> residual(const ProblemSpec &spec, const DiscreteField &v, double M);
std::vector<double> residual(const ProblemSpec &spec, const DiscreteField &v, double M,
                             const Datum &datum);

namespace detail
{
// Raw-vector forms used by the solver; M may be no_truncation.
double energy(const ProblemSpec &spec, std::span<const double> v, double M, const Datum &datum);
void   energy_gradient(const ProblemSpec &spec, std::span<const double> v, double M,
                       const Datum &datum, std::span<double> out);
} // namespace detail


struct CertifyViolation
{
  std::string check;  // lower, upper, gradient, zero, convexity, consistency
  Point       x{};
  Vec2        xi{};
  double      margin = 0.0;
};

struct CertifyReport
{
  std::string label;
  bool        passed  = true;
  std::size_t samples = 0;
  std::uint64_t seed  = 0;
  // worst (smallest) margins; negative means violated
  double lower_margin       = std::numeric_limits<double>::infinity();
  double upper_margin       = std::numeric_limits<double>::infinity();
  double gradient_margin    = std::numeric_limits<double>::infinity();
  double convexity_margin   = std::numeric_limits<double>::infinity();
  double zero_value         = 0.0;
  double max_gradient_error = 0.0; // j_xi against central differences of j
  std::vector<CertifyViolation> violations; // first few only
};

/// Randomized check of the growth bounds, j(x,0) = 0, midpoint convexity and
/// consistency of j_xi with j. Deterministic for a given seed.
CertifyReport certify(const Integrand &integrand, std::size_t samples, std::uint64_t seed,
                      int dimension = 2);

} // namespace ncmin
