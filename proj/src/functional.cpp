#include "ncmin/functional.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace ncmin
{

namespace
{

[[noreturn]] void unknown_id(std::string_view what, std::string_view id,
                             const std::vector<std::string> &known)
{
  std::ostringstream os;
  os << "unknown " << what << " '" << id << "' (known:";
  for (const auto &k : known)
    os << ' ' << k;
  os << ')';
  throw std::invalid_argument(os.str());
}

struct Box
{
  Point lo{0.0, 0.0}, hi{0.0, 0.0};
};

Box bounding_box(const Grid &g)
{
  Box b{g.node(0), g.node(0)};
  for (const Point &p : g.nodes())
    for (int c = 0; c < 2; ++c)
      {
        b.lo[c] = std::min(b.lo[c], p[c]);
        b.hi[c] = std::max(b.hi[c], p[c]);
      }
  return b;
}

} // namespace

// ---------------------------------------------------------------- parameters

namespace
{
using Defaults = std::vector<std::pair<std::string, double>>;

const std::map<std::pair<std::string, std::string>, Defaults> &default_table()
{
  static const std::map<std::pair<std::string, std::string>, Defaults> table{
    {{"integrand", "quadratic"}, {{"alpha", 1.0}, {"beta", 1.0}}},
    {{"integrand", "anisotropic"}, {{"lmin", 0.5}, {"lmax", 2.0}}},
    {{"integrand", "logaug"}, {}},
    {{"coefficient", "constant"}, {{"B", 1.0}}},
    {{"coefficient", "step"}, {{"B", 2.0}, {"ratio", 0.25}, {"split", 0.5}}},
    {{"coefficient", "bump"}, {{"B", 5.0}, {"width", 0.25}, {"cx", 0.5}, {"cy", 0.5}}},
    {{"coefficient", "zero"}, {{"B", 0.0}}},
    {{"datum", "constant"}, {{"value", 1.0}}},
    {{"datum", "sine"}, {{"amplitude", 1.0}}},
    {{"datum", "power"}, {{"s", 0.4}, {"x0", 0.0}, {"y0", 0.0}, {"scale", 1.0}}},
    {{"datum", "step"}, {{"left", 1.0}, {"right", -1.0}, {"split", 0.5}}},
  };
  return table;
}

const std::vector<std::string> &ids_of(std::string_view family)
{
  if (family == "integrand")
    return integrand_ids();
  if (family == "coefficient")
    return coefficient_ids();
  if (family == "datum")
    return datum_ids();
  throw std::invalid_argument("unknown parameter family '" + std::string(family) + "'");
}
} // namespace

ParamMap resolve_params(std::string_view family, std::string_view id, const ParamMap &given)
{
  const auto &table = default_table();
  const auto  it    = table.find({std::string(family), std::string(id)});
  if (it == table.end())
    unknown_id(family, id, ids_of(family));
  ParamMap out;
  for (const auto &[key, value] : it->second)
    out[key] = value;
  for (const auto &[key, value] : given)
    {
      if (!out.count(key))
        {
          std::string known;
          for (const auto &[k, v] : it->second)
            known += (known.empty() ? "" : ", ") + k;
          throw std::invalid_argument(std::string(id) + ": unknown parameter '" + key +
                                      "' (known: " + (known.empty() ? "none" : known) + ")");
        }
      out[key] = value;
    }
  // an upper growth constant defaults to the lower one
  if (family == "integrand" && id == "quadratic" && !given.count("beta"))
    out["beta"] = out["alpha"];
  return out;
}

// ---------------------------------------------------------------- integrands

const std::vector<std::string> &integrand_ids()
{
  static const std::vector<std::string> ids{"quadratic", "anisotropic", "logaug"};
  return ids;
}

Integrand make_integrand(std::string_view id, const ParamMap &params)
{
  Integrand in;
  in.label = std::string(id);

  if (id == "quadratic")
    {
      const ParamMap p = resolve_params("integrand", "quadratic", params);
      const double lo = p.at("alpha"), hi = p.at("beta");
      if (!(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("quadratic: need 0 < alpha <= beta");
      const double mid = 0.5 * (lo + hi), amp = 0.5 * (hi - lo);
      auto a = [mid, amp](const Point &x) {
        return mid + amp * std::cos(2.0 * std::numbers::pi * x[0]) * std::cos(2.0 * std::numbers::pi * x[1]);
      };
      in.alpha    = lo;
      in.beta     = hi;
      in.gamma    = 2.0 * hi;
      in.density  = [a](const Point &x, const Vec2 &xi) { return a(x) * dot(xi, xi); };
      in.gradient = [a](const Point &x, const Vec2 &xi) {
        const double s = 2.0 * a(x);
        return Vec2{s * xi[0], s * xi[1]};
      };
      in.hessian = [a](const Point &x, const Vec2 &) {
        const double s = 2.0 * a(x);
        return Integrand::Hessian{s, 0.0, 0.0, s};
      };
      return in;
    }

  if (id == "anisotropic")
    {
      const ParamMap p = resolve_params("integrand", "anisotropic", params);
      const double lmin = p.at("lmin"), lmax = p.at("lmax");
      if (!(lmin > 0.0) || !(lmax >= lmin))
        throw std::invalid_argument("anisotropic: need 0 < lmin <= lmax");
      // A(x) = R(theta) diag(lmin, lmax) R(theta)^T with theta = pi (x + y)
      auto matrix = [lmin, lmax](const Point &x) {
        const double th = std::numbers::pi * (x[0] + x[1]);
        const double c = std::cos(th), s = std::sin(th);
        const double a11 = lmin * c * c + lmax * s * s;
        const double a22 = lmin * s * s + lmax * c * c;
        const double a12 = (lmin - lmax) * c * s;
        return Integrand::Hessian{a11, a12, a12, a22};
      };
      auto apply = [matrix](const Point &x, const Vec2 &xi) {
        const auto A = matrix(x);
        return Vec2{A[0] * xi[0] + A[1] * xi[1], A[2] * xi[0] + A[3] * xi[1]};
      };
      in.alpha    = lmin;
      in.beta     = lmax;
      in.gamma    = 2.0 * lmax;
      in.density  = [apply](const Point &x, const Vec2 &xi) { return dot(xi, apply(x, xi)); };
      in.gradient = [apply](const Point &x, const Vec2 &xi) {
        const Vec2 ax = apply(x, xi);
        return Vec2{2.0 * ax[0], 2.0 * ax[1]};
      };
      in.hessian = [matrix](const Point &x, const Vec2 &) {
        auto A = matrix(x);
        for (double &c : A)
          c *= 2.0;
        return A;
      };
      return in;
    }

  if (id == "logaug")
    {
      resolve_params("integrand", "logaug", params);
      in.alpha    = 1.0;
      in.beta     = 1.5;
      in.gamma    = 3.0;
      in.density  = [](const Point &, const Vec2 &xi) {
        const double t = dot(xi, xi);
        return t + 0.5 * std::log1p(t);
      };
      in.gradient = [](const Point &, const Vec2 &xi) {
        const double s = 2.0 + 1.0 / (1.0 + dot(xi, xi));
        return Vec2{s * xi[0], s * xi[1]};
      };
      in.hessian = [](const Point &, const Vec2 &xi) {
        const double r = 1.0 / (1.0 + dot(xi, xi));
        const double s = 2.0 + r, c = -2.0 * r * r;
        return Integrand::Hessian{s + c * xi[0] * xi[0], c * xi[0] * xi[1], c * xi[0] * xi[1],
                                  s + c * xi[1] * xi[1]};
      };
      return in;
    }

  unknown_id("integrand", id, integrand_ids());
}

// -------------------------------------------------------------- coefficients

CoefficientField::CoefficientField(std::string label, PointFunction fn, double lower, double upper)
  : label_(std::move(label))
  , fn_(std::move(fn))
  , lower_(lower)
  , upper_(upper)
{
  if (!(lower_ >= 0.0) || !(upper_ >= lower_) || !std::isfinite(upper_))
    throw std::invalid_argument("coefficient: need 0 <= lower <= upper < inf");
}

std::vector<double> CoefficientField::sample(const Grid &grid) const
{
  std::vector<double> out(grid.num_qpoints());
  for (std::size_t qi = 0; qi < out.size(); ++qi)
    {
      out[qi] = fn_(grid.qpoint(qi));
      if (!(out[qi] >= lower_ && out[qi] <= upper_))
        throw std::domain_error("coefficient '" + label_ + "' leaves its certified bounds");
    }
  return out;
}

const std::vector<std::string> &coefficient_ids()
{
  static const std::vector<std::string> ids{"constant", "step", "bump", "zero"};
  return ids;
}

CoefficientField make_coefficient(std::string_view id, const ParamMap &params)
{
  if (id == "constant")
    {
      const ParamMap p = resolve_params("coefficient", "constant", params);
      const double B = p.at("B");
      if (!(B >= 0.0))
        throw std::invalid_argument("constant: need B >= 0");
      return CoefficientField("constant", [B](const Point &) { return B; }, B, B);
    }
  if (id == "step")
    {
      const ParamMap p = resolve_params("coefficient", "step", params);
      const double B = p.at("B"), ratio = p.at("ratio");
      const double split = p.at("split");
      if (!(B >= 0.0) || !(ratio >= 0.0 && ratio <= 1.0))
        throw std::invalid_argument("step: need B >= 0 and 0 <= ratio <= 1");
      const double left = ratio * B;
      return CoefficientField(
        "step", [=](const Point &x) { return x[0] < split ? left : B; }, left, B);
    }
  if (id == "bump")
    {
      const ParamMap p = resolve_params("coefficient", "bump", params);
      const double B = p.at("B"), w = p.at("width");
      const double cx = p.at("cx"), cy = p.at("cy");
      if (!(B >= 0.0) || !(w > 0.0))
        throw std::invalid_argument("bump: need B >= 0 and width > 0");
      // the bump never reaches exactly zero, but 0 is the certified lower bound
      return CoefficientField(
        "bump",
        [=](const Point &x) {
          const double r2 = (x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy);
          return B * std::exp(-r2 / (w * w));
        },
        0.0, B);
    }
  if (id == "zero")
    {
      resolve_params("coefficient", "zero", params);
      return CoefficientField("zero", [](const Point &) { return 0.0; }, 0.0, 0.0);
    }
  unknown_id("coefficient", id, coefficient_ids());
}

// --------------------------------------------------------------------- data

Datum::Datum(GridPtr grid, std::string label, PointFunction fn, std::optional<double> linf_bound)
  : grid_(std::move(grid))
  , label_(std::move(label))
  , fn_(std::move(fn))
  , linf_bound_(linf_bound)
{
  if (!grid_)
    throw std::invalid_argument("datum: null grid");
  qp_values_.resize(grid_->num_qpoints());
  for (std::size_t qi = 0; qi < qp_values_.size(); ++qi)
    {
      qp_values_[qi] = fn_(grid_->qpoint(qi));
      if (!std::isfinite(qp_values_[qi]))
        throw std::domain_error("datum '" + label_ + "' is not finite at a quadrature point");
    }
  l2_norm_sq_ = integrate(*grid_, [&](std::size_t qi) { return qp_values_[qi] * qp_values_[qi]; });
  if (!std::isfinite(l2_norm_sq_))
    throw std::domain_error("datum '" + label_ + "' has no finite L2 norm");
}

Datum Datum::truncated(double n) const
{
  if (!(n > 0.0))
    throw std::invalid_argument("datum truncation level must be positive");
  auto inner = fn_;
  const std::optional<double> bound = linf_bound_ ? std::min(n, *linf_bound_) : n;
  std::ostringstream          os;
  os << "T_" << n << "(" << label_ << ")";
  return Datum(grid_, os.str(), [inner, n](const Point &x) { return truncate_value(inner(x), n); },
               bound);
}

Datum make_Jn_datum(const Datum &f, double n)
{
  return f.truncated(n);
}

const std::vector<std::string> &datum_ids()
{
  static const std::vector<std::string> ids{"constant", "sine", "power", "step"};
  return ids;
}

Datum make_datum(const GridPtr &grid, std::string_view id, const ParamMap &params)
{
  if (id == "constant")
    {
      const ParamMap p = resolve_params("datum", "constant", params);
      const double c = p.at("value");
      return Datum(grid, "constant", [c](const Point &) { return c; }, std::abs(c));
    }
  if (id == "sine")
    {
      const ParamMap p = resolve_params("datum", "sine", params);
      const double amp = p.at("amplitude");
      const Box    box = bounding_box(*grid);
      const int    dim = grid->dimension();
      return Datum(
        grid, "sine",
        [=](const Point &x) {
          double v = amp;
          for (int c = 0; c < dim; ++c)
            v *= std::sin(std::numbers::pi * (x[c] - box.lo[c]) / (box.hi[c] - box.lo[c]));
          return v;
        },
        std::abs(amp));
    }
  if (id == "power")
    {
      const ParamMap p = resolve_params("datum", "power", params);
      const double s = p.at("s"), scale = p.at("scale");
      const double x0 = p.at("x0"), y0 = p.at("y0");
      const int    dim = grid->dimension();
      if (!(s > 0.0) || !(2.0 * s < dim))
        throw std::invalid_argument("power: need 0 < s < dimension/2 for an L2 datum");
      return Datum(
        grid, "power",
        [=](const Point &x) {
          const double r = dim == 1 ? std::abs(x[0] - x0) : std::hypot(x[0] - x0, x[1] - y0);
          return scale * std::pow(r, -s);
        },
        std::nullopt);
    }
  if (id == "step")
    {
      const ParamMap p = resolve_params("datum", "step", params);
      const double left = p.at("left"), right = p.at("right");
      const double split = p.at("split");
      return Datum(
        grid, "step", [=](const Point &x) { return x[0] < split ? left : right; },
        std::max(std::abs(left), std::abs(right)));
    }
  unknown_id("datum", id, datum_ids());
}

// ------------------------------------------------------------------- problem

namespace
{
void check_schedule(const std::optional<std::vector<double>> &s, const char *name)
{
  if (!s)
    return;
  if (s->empty())
    throw std::invalid_argument(std::string(name) + " schedule is empty");
  for (std::size_t i = 0; i < s->size(); ++i)
    {
      if (!((*s)[i] > 0.0) || !std::isfinite((*s)[i]))
        throw std::invalid_argument(std::string(name) + " schedule entries must be positive");
      if (i > 0 && !((*s)[i] > (*s)[i - 1]))
        throw std::invalid_argument(std::string(name) + " schedule must be strictly increasing");
    }
}
} // namespace

ProblemSpec::ProblemSpec(GridPtr grid, Integrand integrand, CoefficientField b, Datum f,
                         Schedules schedules, double solver_tol, std::size_t max_iter)
  : grid_(std::move(grid))
  , integrand_(std::move(integrand))
  , b_(std::move(b))
  , f_(std::move(f))
  , schedules_(std::move(schedules))
  , solver_tol_(solver_tol)
  , max_iter_(max_iter)
{
  if (!grid_)
    throw std::invalid_argument("problem: null grid");
  if (f_.grid_ptr() != grid_)
    throw std::invalid_argument("problem: datum sampled on a different grid");
  if (!(solver_tol_ > 0.0))
    throw std::invalid_argument("problem: solver tolerance must be positive");
  if (max_iter_ == 0)
    throw std::invalid_argument("problem: max_iter must be positive");
  if (!(integrand_.alpha > 0.0) || !(integrand_.beta >= integrand_.alpha) || !(integrand_.gamma > 0.0))
    throw std::invalid_argument("problem: integrand constants must satisfy 0 < alpha <= beta, gamma > 0");
  check_schedule(schedules_.m, "m");
  check_schedule(schedules_.n, "n");
  b_qp_ = b_.sample(*grid_);
}

std::vector<double> ProblemSpec::m_levels(double n) const
{
  if (schedules_.m)
    return *schedules_.m;
  std::vector<double> out{1.0};
  while (out.back() < 2.0 * n)
    out.push_back(2.0 * out.back());
  return out;
}

std::vector<double> ProblemSpec::n_levels() const
{
  if (schedules_.n)
    return *schedules_.n;
  if (const auto bound = f_.linf_bound())
    {
      std::vector<double> out{1.0};
      while (out.back() < *bound)
        out.push_back(2.0 * out.back());
      return out;
    }
  return {1.0, 2.0, 4.0, 8.0, 16.0};
}

ProblemSpec ProblemSpec::with_datum(Datum f) const
{
  ProblemSpec copy = *this;
  if (f.grid_ptr() != grid_)
    throw std::invalid_argument("problem: datum sampled on a different grid");
  copy.f_ = std::move(f);
  return copy;
}

// ------------------------------------------------------------------- energies

namespace detail
{

double energy(const ProblemSpec &spec, std::span<const double> v, double M, const Datum &datum)
{
  const Grid       &g   = spec.grid();
  const auto        bq  = spec.b_qp();
  const auto        fq  = datum.qp_values();
  const auto       &j   = spec.integrand().density;
  const std::size_t nq  = g.qpoints_per_element();
  const int         nv  = g.vertices_per_element();
  double            sum = 0.0;

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
          double            vq = 0.0;
          for (int a = 0; a < nv; ++a)
            vq += g.barycentric(q, a) * v[idx[a]];
          const double t     = std::min(std::abs(vq), M);
          const double denom = 1.0 + bq[qi] * t;
          sum += g.qweight(qi) *
                 (j(g.qpoint(qi), grad) / (denom * denom) + 0.5 * vq * vq - fq[qi] * vq);
        }
    }
  return sum;
}

void energy_gradient(const ProblemSpec &spec, std::span<const double> v, double M,
                     const Datum &datum, std::span<double> out)
{
  const Grid       &g  = spec.grid();
  const auto        bq = spec.b_qp();
  const auto        fq = datum.qp_values();
  const auto       &j  = spec.integrand().density;
  const auto       &dj = spec.integrand().gradient;
  const std::size_t nq = g.qpoints_per_element();
  const int         nv = g.vertices_per_element();

  std::fill(out.begin(), out.end(), 0.0);
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
          const double t  = std::min(av, M);
          // d|T_M(v)|/dv: sign(v) up to and including |v| = M, zero beyond
          const double dt    = av <= M ? (vq > 0.0 ? 1.0 : (vq < 0.0 ? -1.0 : 0.0)) : 0.0;
          const double denom = 1.0 + bq[qi] * t;
          const double inv2  = 1.0 / (denom * denom);
          const Vec2   jx    = dj(x, grad);
          // d/dv of 1/(1 + b t)^2 = -2 b dt / (1 + b t)^3
          const double dweight = dt == 0.0 ? 0.0 : -2.0 * bq[qi] * dt * inv2 / denom;
          const double pointwise = j(x, grad) * dweight + vq - fq[qi];

          for (int a = 0; a < nv; ++a)
            out[idx[a]] +=
              w * (dot(jx, g.basis_gradient(e, a)) * inv2 + pointwise * g.barycentric(q, a));
        }
    }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (g.on_boundary(i))
      out[i] = 0.0;
}

} // namespace detail

namespace
{
void check_M(double M)
{
  if (!(M > 0.0))
    throw std::invalid_argument("truncation level M must be positive");
}
void check_grid(const ProblemSpec &spec, const NodalFunction &v)
{
  if (v.grid_ptr() != spec.grid_ptr())
    throw std::invalid_argument("field is not defined on the problem grid");
}
} // namespace

double eval_J(const ProblemSpec &spec, const DiscreteField &v)
{
  check_grid(spec, v);
  return detail::energy(spec, v.values(), no_truncation, spec.datum());
}

double eval_JM(const ProblemSpec &spec, const DiscreteField &v, double M)
{
  return eval_JM(spec, v, M, spec.datum());
}

double eval_JM(const ProblemSpec &spec, const DiscreteField &v, double M, const Datum &datum)
{
  check_M(M);
  check_grid(spec, v);
  return detail::energy(spec, v.values(), M, datum);
}

std::vector<double> residual(const ProblemSpec &spec, const DiscreteField &v, double M)
{
  return residual(spec, v, M, spec.datum());
}

std::vector<double> residual(const ProblemSpec &spec, const DiscreteField &v, double M,
                             const Datum &datum)
{
  check_M(M);
  check_grid(spec, v);
  std::vector<double> out(v.size());
  detail::energy_gradient(spec, v.values(), M, datum, out);
  return out;
}

// ------------------------------------------------------------------ certify

CertifyReport certify(const Integrand &integrand, std::size_t samples, std::uint64_t seed,
                      int dimension)
{
  if (samples == 0)
    throw std::invalid_argument("certify: need at least one sample");
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("certify: dimension must be 1 or 2");

  constexpr double roundoff  = 1e-12;
  constexpr double fd_tol    = 1e-5;
  constexpr std::size_t keep = 8;

  CertifyReport rep;
  rep.label   = integrand.label;
  rep.samples = samples;
  rep.seed    = seed;

  std::mt19937_64                        rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double>       gauss(0.0, 1.0);

  auto random_xi = [&] {
    const double mag = std::pow(10.0, -3.0 + 6.0 * unit(rng));
    Vec2         d{gauss(rng), dimension == 2 ? gauss(rng) : 0.0};
    const double l = length(d);
    if (l == 0.0)
      return Vec2{mag, 0.0};
    return Vec2{mag * d[0] / l, mag * d[1] / l};
  };
  auto record = [&](const char *check, const Point &x, const Vec2 &xi, double margin) {
    if (margin < -roundoff)
      {
        rep.passed = false;
        if (rep.violations.size() < keep)
          rep.violations.push_back({check, x, xi, margin});
      }
  };

  for (std::size_t s = 0; s < samples; ++s)
    {
      const Point x{unit(rng), dimension == 2 ? unit(rng) : 0.0};
      const Vec2  xi = random_xi();
      const double n2 = dot(xi, xi);
      const double jv = integrand.density(x, xi);

      const double lower = (jv - integrand.alpha * n2) / n2;
      const double upper = (integrand.beta * n2 - jv) / n2;
      rep.lower_margin   = std::min(rep.lower_margin, lower);
      rep.upper_margin   = std::min(rep.upper_margin, upper);
      record("lower", x, xi, lower);
      record("upper", x, xi, upper);

      const Vec2   gx   = integrand.gradient(x, xi);
      const double grad = (integrand.gamma * std::sqrt(n2) - length(gx)) / std::sqrt(n2);
      rep.gradient_margin = std::min(rep.gradient_margin, grad);
      record("gradient", x, xi, grad);

      const double z = integrand.density(x, Vec2{0.0, 0.0});
      rep.zero_value = std::max(rep.zero_value, std::abs(z));
      if (z != 0.0)
        record("zero", x, Vec2{0.0, 0.0}, -std::abs(z));

      const Vec2   xi2 = random_xi();
      const Vec2   mid{0.5 * (xi[0] + xi2[0]), 0.5 * (xi[1] + xi2[1])};
      const double conv = (0.5 * (jv + integrand.density(x, xi2)) - integrand.density(x, mid)) /
                          (n2 + dot(xi2, xi2));
      rep.convexity_margin = std::min(rep.convexity_margin, conv);
      record("convexity", x, xi, conv);

      for (int c = 0; c < dimension; ++c)
        {
          const double h  = 1e-6 * (1.0 + std::sqrt(n2));
          Vec2         xp = xi, xm = xi;
          xp[c] += h;
          xm[c] -= h;
          const double fd  = (integrand.density(x, xp) - integrand.density(x, xm)) / (2.0 * h);
          const double err = std::abs(fd - gx[c]) / (1.0 + std::abs(gx[c]));
          rep.max_gradient_error = std::max(rep.max_gradient_error, err);
          if (err > fd_tol)
            record("consistency", x, xi, fd_tol - err);
        }
    }
  return rep;
}

} // namespace ncmin
