#pragma once

// Radial sequence v_n = exp(T_n(|x|^-rho - 1)) - 1 on the unit ball of R^N:
// bounded energy for int |grad v|^2/(1+|v|)^2 while int |grad v| diverges.

#include <cstddef>
#include <vector>

namespace ncmin
{

struct RadialProfile
{
  int    N   = 3;
  double rho = 0.25;
  double n   = 0.0;

  /// Radius where r^-rho - 1 = n.
  double cutoff() const;
};

/// Throws std::invalid_argument unless N > 2, 0 < rho < (N-2)/2 and
/// 0 <= n <= max_level.
RadialProfile make_profile(int N, double rho, double n);

/// Largest n for which e^{2n} and all table quantities stay finite.
inline constexpr double max_level = 350.0;

/// Surface measure of the unit sphere in R^N.
double sphere_measure(int N);

/// exp(T_n(r^-rho - 1)) - 1; throws for r <= 0 or r > 1.
double vn_value(const RadialProfile &p, double r);

struct RadialQuadrature
{
  std::size_t panels      = 64; // Gauss-Legendre panels, 8 points each
  double      rel_tol     = 1e-8;
  std::size_t max_doublings = 14;
};

/// int_{B_1} |grad v_n| by composite Gauss-Legendre on (r_n, 1), panels
/// graded towards r_n; doubled until two successive values agree to rel_tol.
/// quad_points (>= 100) sets the initial number of points.
double w11_seminorm(const RadialProfile &p, std::size_t quad_points = 512);

/// int |grad log(1 + v_n)|^2 in closed form.
double log_h1_seminorm(const RadialProfile &p);

/// Limit of log_h1_seminorm as n grows.
double log_h1_limit(int N, double rho);

struct CoerciveValue
{
  double weighted_gradient = 0.0; // int |grad v|^2 / (1 + |v|)^2
  double l2_sq             = 0.0; // int |v|^2
};

/// Both terms of the coercive functional by radial quadrature.
CoerciveValue coercive_functional_value(const RadialProfile &p, const RadialQuadrature &q = {});

/// int (1 + |v_n|)^2, the right-hand part of the coercivity chain.
double one_plus_square(const RadialProfile &p, const RadialQuadrature &q = {});

struct DivergenceRow
{
  double n         = 0.0;
  double cutoff    = 1.0;
  double w11       = 0.0;
  double log_h1    = 0.0;
  double weighted_gradient = 0.0;
  double l2_sq     = 0.0;
  double chain_rhs = 0.0; // 1/2 weighted_gradient + 1/2 int (1+v)^2
};

struct DivergenceReport
{
  int    N     = 3;
  double rho   = 0.25;
  double n_max = 12.0;
  bool   capped = false; // n_max was lowered to max_level
  double limit = 0.0;
  std::vector<DivergenceRow> rows;

  bool   log_h1_monotone  = true;
  bool   log_h1_bounded   = true;
  double limit_gap        = 0.0; // limit - log_h1 at the last row
  bool   w11_increasing   = true;
  double w11_ratio        = 0.0; // w11(n_max) / w11(1)
  bool   chain_holds      = true;
  double identity_error   = 0.0; // worst relative gap between the two log-H1 paths

  /// Divergence evidence: bounded log-H1, growing W11, chain at every row.
  bool passed() const { return log_h1_bounded && log_h1_monotone && w11_increasing && chain_holds; }
};

/// Rows n = 0, 1, ..., n_max. Throws std::invalid_argument for an
/// inadmissible (N, rho) or negative n_max.
DivergenceReport divergence_report(int N, double rho, double n_max);

} // namespace ncmin
