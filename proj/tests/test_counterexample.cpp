#include "oracles.hpp"

#include "ncmin/counterexample.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace ncmin;

TEST_CASE("admissible profiles")
{
  CHECK_NOTHROW(make_profile(3, 0.25, 0.0));
  CHECK_NOTHROW(make_profile(4, 0.9, 10.0));
  CHECK_THROWS_AS(make_profile(3, 0.6, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_profile(3, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_profile(2, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_profile(3, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_profile(3, 0.25, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_profile(3, 0.25, max_level + 1.0), std::invalid_argument);
  CHECK_THROWS_AS(divergence_report(3, 0.7, 4.0), std::invalid_argument);
}

TEST_CASE("profile values")
{
  const auto p = make_profile(3, 0.25, 2.0);
  CHECK(p.cutoff() == doctest::Approx(std::pow(3.0, -4.0)));
  CHECK(vn_value(p, 1.0) == doctest::Approx(0.0));
  CHECK(vn_value(p, 0.5 * p.cutoff()) == doctest::Approx(std::exp(2.0) - 1.0));
  CHECK(vn_value(p, 0.5) == doctest::Approx(std::exp(std::pow(0.5, -0.25) - 1.0) - 1.0));
  CHECK_THROWS(vn_value(p, 0.0));
  CHECK_THROWS(vn_value(p, 1.5));
  CHECK(sphere_measure(3) == doctest::Approx(oracle::sphere(3)));
  CHECK(sphere_measure(4) == doctest::Approx(oracle::sphere(4)));
  CHECK(make_profile(3, 0.25, 0.0).cutoff() == doctest::Approx(1.0));
}

TEST_CASE("seminorms against an independent radial integral")
{
  for (int N : {3, 4})
    {
      const double rho = N == 3 ? 0.25 : 0.6;
      for (double n : {0.0, 0.5, 1.0, 2.0, 3.0})
        {
          const auto p = make_profile(N, rho, n);
          INFO("N=", N, " n=", n);
          const double w_ref = oracle::radial_w11(N, rho, n);
          const double l_ref = oracle::radial_log_h1(N, rho, n);
          if (n == 0.0)
            {
              CHECK(w11_seminorm(p) == 0.0);
              CHECK(log_h1_seminorm(p) == 0.0);
              continue;
            }
          CHECK(w11_seminorm(p) == doctest::Approx(w_ref).epsilon(1e-7));
          CHECK(log_h1_seminorm(p) == doctest::Approx(l_ref).epsilon(1e-7));
        }
    }
  CHECK_THROWS_AS(w11_seminorm(make_profile(3, 0.25, 1.0), 50), std::invalid_argument);
}

TEST_CASE("log-H1 limit")
{
  const double far = oracle::radial_log_h1(3, 0.25, 2000.0, 4000000);
  CHECK(log_h1_limit(3, 0.25) == doctest::Approx(far).epsilon(1e-6));
  for (double n : {1.0, 4.0, 16.0})
    CHECK(log_h1_seminorm(make_profile(3, 0.25, n)) < log_h1_limit(3, 0.25));
}

TEST_CASE("divergence table")
{
  const auto rep = divergence_report(3, 0.25, 12.0);
  REQUIRE(rep.rows.size() == 13);
  CHECK_FALSE(rep.capped);
  CHECK(rep.log_h1_monotone);
  CHECK(rep.log_h1_bounded);
  CHECK(rep.w11_increasing);
  CHECK(rep.chain_holds);
  CHECK(rep.passed());
  CHECK(rep.identity_error < 1e-9);
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    {
      const auto &row = rep.rows[i];
      CHECK(row.n == static_cast<double>(i));
      CHECK(row.w11 <= row.chain_rhs * (1.0 + 1e-12));
      if (i > 0)
        {
          CHECK(row.w11 > rep.rows[i - 1].w11);
          CHECK(row.log_h1 >= rep.rows[i - 1].log_h1);
        }
    }
  CHECK(rep.w11_ratio == doctest::Approx(rep.rows.back().w11 / rep.rows[1].w11));
  CHECK(rep.limit_gap == doctest::Approx(rep.limit - rep.rows.back().log_h1));
  CHECK(rep.rows[12].w11 == doctest::Approx(oracle::radial_w11(3, 0.25, 12.0)).epsilon(1e-6));

  const auto fast = divergence_report(4, 0.9, 8.0);
  CHECK(fast.passed());
  CHECK(fast.w11_ratio > 5.0);

  const auto capped = divergence_report(3, 0.25, 400.0);
  CHECK(capped.capped);
  CHECK(capped.n_max == max_level);
}

TEST_CASE("coercive functional stays bounded")
{
  double prev = 0.0;
  for (double n : {1.0, 4.0, 8.0, 12.0})
    {
      const auto v = coercive_functional_value(make_profile(3, 0.25, n));
      CHECK(v.weighted_gradient >= prev);
      CHECK(v.weighted_gradient <= log_h1_limit(3, 0.25) * (1.0 + 1e-9));
      CHECK(v.l2_sq > 0.0);
      prev = v.weighted_gradient;
    }
}
