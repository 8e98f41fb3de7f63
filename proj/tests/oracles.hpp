#pragma once

// Reference values computed without the library: closed forms, a direct
// linear solve of the quadratic problem, and a radial integral in a
// different variable.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle
{

// u solving -2u'' + u = 1 on (0,1), u(0) = u(1) = 0.
inline double bvp_solution(double x)
{
  const double c = 1.0 / (2.0 * std::sqrt(2.0));
  return 1.0 - std::cosh((x - 0.5) / std::sqrt(2.0)) / std::cosh(c);
}

// int_0^1 u
inline double bvp_integral()
{
  const double c = 1.0 / (2.0 * std::sqrt(2.0));
  return 1.0 - 2.0 * std::sqrt(2.0) * std::tanh(c);
}

// J(u) = -1/2 int u for the quadratic problem at its minimizer.
inline double bvp_energy()
{
  return -0.5 * bvp_integral();
}

// int_0^1 u^2
inline double bvp_l2_sq()
{
  const double a = 1.0 / std::sqrt(2.0), c = 1.0 / (2.0 * std::sqrt(2.0));
  const double ch = std::cosh(c);
  // int (1 - cosh(a(x-1/2))/ch)^2 = 1 - 2 (2/a) sinh(c)/ch + (1/ch^2)(1/2 + sinh(2c)/(2a))
  return 1.0 - 4.0 / a * std::sinh(c) / ch + (0.5 + std::sinh(2.0 * c) / (2.0 * a)) / (ch * ch);
}

// Thomas algorithm for a tridiagonal system (sub, diag, super, rhs).
inline std::vector<double> thomas(std::vector<double> a, std::vector<double> b,
                                  std::vector<double> c, std::vector<double> d)
{
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i)
    {
      const double m = a[i] / b[i - 1];
      b[i] -= m * c[i - 1];
      d[i] -= m * d[i - 1];
    }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

// P1 system on (0,1) with `cells` equal cells for
//   energy  s int |v'|^2 + 1/2 int v^2 - c int v,
// i.e. 2s K v + M v = c F with consistent mass (exact for degree 2).
// Returns all nodal values including the zero boundary values.
inline std::vector<double> p1_quadratic_solution(std::size_t cells, double s = 1.0, double c = 1.0)
{
  const double      h = 1.0 / static_cast<double>(cells);
  const std::size_t n = cells - 1;
  std::vector<double> a(n), b(n), up(n), d(n);
  for (std::size_t i = 0; i < n; ++i)
    {
      b[i]  = 2.0 * s * 2.0 / h + 4.0 * h / 6.0;
      a[i]  = i > 0 ? -2.0 * s / h + h / 6.0 : 0.0;
      up[i] = i + 1 < n ? -2.0 * s / h + h / 6.0 : 0.0;
      d[i]  = c * h;
    }
  const auto inner = thomas(a, b, up, d);
  std::vector<double> out(cells + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    out[i + 1] = inner[i];
  return out;
}

// Gradient of that energy at nodal values v (interior entries; boundary 0).
inline std::vector<double> p1_quadratic_gradient(const std::vector<double> &v, double s,
                                                 const std::vector<double> &load)
{
  const std::size_t cells = v.size() - 1;
  const double      h     = 1.0 / static_cast<double>(cells);
  std::vector<double> g(v.size(), 0.0);
  for (std::size_t i = 1; i < cells; ++i)
    g[i] = 2.0 * s * (2.0 * v[i] - v[i - 1] - v[i + 1]) / h +
           h / 6.0 * (v[i - 1] + 4.0 * v[i] + v[i + 1]) - load[i];
  return g;
}

// Surface measure of the unit sphere: 4 pi (N = 3), 2 pi^2 (N = 4).
inline double sphere(int N)
{
  return N == 3 ? 4.0 * std::numbers::pi : 2.0 * std::numbers::pi * std::numbers::pi;
}

// int_{B_1} |grad v_n| after the substitution s = r^-rho - 1:
//   omega int_0^n e^s (1+s)^{-(N-1)/rho} ds, composite trapezoid.
inline double radial_w11(int N, double rho, double n, std::size_t steps = 400000)
{
  if (n <= 0.0)
    return 0.0;
  const double h = n / static_cast<double>(steps);
  auto f = [&](double s) { return std::exp(s) * std::pow(1.0 + s, -(N - 1) / rho); };
  double sum = 0.5 * (f(0.0) + f(n));
  for (std::size_t i = 1; i < steps; ++i)
    sum += f(h * static_cast<double>(i));
  return sphere(N) * h * sum;
}

// int |grad log(1 + v_n)|^2 in the variable s = r^-rho - 1, composite trapezoid.
inline double radial_log_h1(int N, double rho, double n, std::size_t steps = 400000)
{
  if (n <= 0.0)
    return 0.0;
  // |d/dr log(1+v)| = rho r^{-rho-1}; with r = (1+s)^{-1/rho},
  // rho^2 r^{-2rho-2} r^{N-1} |dr/ds| = rho (1+s)^{(2rho+2-N+1)/rho - 1/rho - 1}
  const double e = (2.0 * rho + 2.0 - N) / rho - 1.0;
  auto f = [&](double s) { return rho * std::pow(1.0 + s, e); };
  const double h = n / static_cast<double>(steps);
  double sum = 0.5 * (f(0.0) + f(n));
  for (std::size_t i = 1; i < steps; ++i)
    sum += f(h * static_cast<double>(i));
  return sphere(N) * h * sum;
}

} // namespace oracle
