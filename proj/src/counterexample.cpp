#include "ncmin/counterexample.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ncmin
{

namespace
{

// Composite 8-point Gauss-Legendre on (a, b), 0 < a, with panels of equal
// width in log r.
template <class F>
double graded_rule(F &&f, double a, double b, std::size_t panels)
{
  using rule     = boost::math::quadrature::gauss<double, 8>;
  const double q = std::pow(b / a, 1.0 / static_cast<double>(panels));
  double       left = a, sum = 0.0;
  for (std::size_t i = 0; i < panels; ++i)
    {
      const double right = i + 1 == panels ? b : left * q;
      sum += rule::integrate(f, left, right);
      left = right;
    }
  return sum;
}

// The profile varies on a log r scale of 1/(rho (1 + n)) near the cutoff,
// and log(1/r_n) = log(1 + n)/rho: start with a few panels per such scale.
std::size_t start_panels(const RadialProfile &p, std::size_t base)
{
  const double need = 2.0 * (1.0 + p.n) * std::log1p(p.n);
  return std::max(base, static_cast<std::size_t>(std::ceil(need)));
}

template <class F>
double refine_until_stable(F &&f, double a, double b, std::size_t panels, const RadialQuadrature &opt)
{
  if (!(b > a))
    return 0.0;
  double previous = graded_rule(f, a, b, panels);
  for (std::size_t d = 0; d < opt.max_doublings; ++d)
    {
      panels *= 2;
      const double current = graded_rule(f, a, b, panels);
      if (!std::isfinite(current))
        return current;
      if (std::abs(current - previous) <= opt.rel_tol * std::abs(current))
        return current;
      previous = current;
    }
  return previous;
}

// shell integrands: z = r^-rho - 1 on (r_n, 1)
struct Shell
{
  int    N;
  double rho;

  double z(double r) const { return std::pow(r, -rho) - 1.0; }
  double jacobian(double r) const { return std::pow(r, N - 1); }
  double derivative(double r) const { return rho * std::pow(r, -rho - 1.0) * std::exp(z(r)); }
};

} // namespace

double RadialProfile::cutoff() const
{
  return std::pow(1.0 + n, -1.0 / rho);
}

RadialProfile make_profile(int N, double rho, double n)
{
  if (N <= 2)
    throw std::invalid_argument("radial profile: dimension N must exceed 2");
  const double top = 0.5 * (N - 2);
  if (!(rho > 0.0 && rho < top))
    {
      std::ostringstream os;
      os << "radial profile: rho must lie in (0, " << top << ") for N = " << N << ", got " << rho;
      throw std::invalid_argument(os.str());
    }
  if (!(n >= 0.0 && n <= max_level))
    {
      std::ostringstream os;
      os << "radial profile: level n must lie in [0, " << max_level << "], got " << n;
      throw std::invalid_argument(os.str());
    }
  return {N, rho, n};
}

double sphere_measure(int N)
{
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

double vn_value(const RadialProfile &p, double r)
{
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("vn_value: radius must lie in (0, 1]");
  const double z = std::pow(r, -p.rho) - 1.0;
  return std::expm1(std::min(z, p.n));
}

double w11_seminorm(const RadialProfile &p, std::size_t quad_points)
{
  if (quad_points < 100)
    throw std::invalid_argument("w11_seminorm: at least 100 quadrature points required");
  if (p.n == 0.0)
    return 0.0;
  const Shell  s{p.N, p.rho};
  const auto   f = [&](double r) { return s.derivative(r) * s.jacobian(r); };
  RadialQuadrature opt;
  return sphere_measure(p.N) * refine_until_stable(f, p.cutoff(), 1.0, start_panels(p, (quad_points + 7) / 8), opt);
}

double log_h1_seminorm(const RadialProfile &p)
{
  const double e = p.N - 2 - 2 * p.rho;
  return sphere_measure(p.N) * p.rho * p.rho * (1.0 - std::pow(p.cutoff(), e)) / e;
}

double log_h1_limit(int N, double rho)
{
  return sphere_measure(N) * rho * rho / (N - 2 - 2 * rho);
}

CoerciveValue coercive_functional_value(const RadialProfile &p, const RadialQuadrature &q)
{
  if (p.n == 0.0)
    return {};
  const Shell  s{p.N, p.rho};
  const double rn    = p.cutoff();
  const double omega = sphere_measure(p.N);
  const auto   weighted = [&](double r) {
    // ratio first: both factors overflow separately near the top level
    const double ratio = s.derivative(r) / (1.0 + std::expm1(s.z(r)));
    return ratio * ratio * s.jacobian(r);
  };
  const auto square = [&](double r) {
    const double v = std::expm1(s.z(r));
    return v * v * s.jacobian(r);
  };
  const double plateau = std::expm1(p.n);
  CoerciveValue out;
  out.weighted_gradient = omega * refine_until_stable(weighted, rn, 1.0, start_panels(p, q.panels), q);
  out.l2_sq = omega * (plateau * plateau * std::pow(rn, p.N) / p.N +
                       refine_until_stable(square, rn, 1.0, start_panels(p, q.panels), q));
  return out;
}

double one_plus_square(const RadialProfile &p, const RadialQuadrature &q)
{
  const Shell  s{p.N, p.rho};
  const double rn    = p.cutoff();
  const auto   shell = [&](double r) {
    const double e = std::exp(s.z(r));
    return e * e * s.jacobian(r);
  };
  const double top = std::exp(p.n);
  return sphere_measure(p.N) *
         (top * top * std::pow(rn, p.N) / p.N + refine_until_stable(shell, rn, 1.0, start_panels(p, q.panels), q));
}

DivergenceReport divergence_report(int N, double rho, double n_max)
{
  make_profile(N, rho, 0.0);
  if (!(n_max >= 0.0))
    throw std::invalid_argument("divergence_report: n_max must be nonnegative");

  DivergenceReport rep;
  rep.N      = N;
  rep.rho    = rho;
  rep.capped = n_max > max_level;
  rep.n_max  = std::min(n_max, max_level);
  rep.limit  = log_h1_limit(N, rho);

  for (double n = 0.0; n <= rep.n_max; n += 1.0)
    {
      const auto p = make_profile(N, rho, n);
      DivergenceRow row;
      row.n      = n;
      row.cutoff = p.cutoff();
      row.w11    = w11_seminorm(p);
      row.log_h1 = log_h1_seminorm(p);
      const auto cv = coercive_functional_value(p);
      row.weighted_gradient = cv.weighted_gradient;
      row.l2_sq     = cv.l2_sq;
      row.chain_rhs = 0.5 * cv.weighted_gradient + 0.5 * one_plus_square(p);

      if (!rep.rows.empty())
        {
          const auto &prev = rep.rows.back();
          rep.log_h1_monotone = rep.log_h1_monotone && row.log_h1 >= prev.log_h1;
          if (n >= 2.0)
            rep.w11_increasing = rep.w11_increasing && row.w11 > prev.w11;
        }
      rep.log_h1_bounded = rep.log_h1_bounded && row.log_h1 <= rep.limit;
      rep.chain_holds    = rep.chain_holds && row.w11 <= row.chain_rhs;
      if (row.log_h1 > 0.0)
        rep.identity_error =
          std::max(rep.identity_error, std::abs(row.weighted_gradient - row.log_h1) / row.log_h1);
      rep.rows.push_back(row);
    }
  if (!rep.rows.empty())
    rep.limit_gap = rep.limit - rep.rows.back().log_h1;
  if (rep.rows.size() > 1 && rep.rows[1].w11 > 0.0)
    rep.w11_ratio = rep.rows.back().w11 / rep.rows[1].w11;
  return rep;
}

} // namespace ncmin
