#include "ncmin/grid.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ncmin
{

QuadratureRule QuadratureRule::gauss2_segment()
{
  const double d = 0.5 / std::sqrt(3.0);
  QuadratureRule rule;
  rule.barycentric = {{0.5 + d, 0.5 - d, 0.0}, {0.5 - d, 0.5 + d, 0.0}};
  rule.weights     = {0.5, 0.5};
  return rule;
}

QuadratureRule QuadratureRule::edge_midpoint_triangle()
{
  QuadratureRule rule;
  rule.barycentric = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  rule.weights     = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return rule;
}

std::size_t Grid::num_interior() const
{
  return static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), char{0}));
}

void Grid::finalize()
{
  const std::size_t ne = elements_.size();
  element_measure_.assign(ne, 0.0);
  basis_gradients_.assign(ne, {});
  mesh_size_ = 0.0;

  for (std::size_t e = 0; e < ne; ++e)
    {
      const auto &el = elements_[e];
      if (dimension_ == 1)
        {
          const double h = nodes_[el[1]][0] - nodes_[el[0]][0];
          element_measure_[e]    = h;
          basis_gradients_[e][0] = {-1.0 / h, 0.0};
          basis_gradients_[e][1] = {1.0 / h, 0.0};
          mesh_size_             = std::max(mesh_size_, std::abs(h));
        }
      else
        {
          const Point &p0 = nodes_[el[0]], &p1 = nodes_[el[1]], &p2 = nodes_[el[2]];
          const double area2 =
            (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
          element_measure_[e]    = 0.5 * area2;
          basis_gradients_[e][0] = {(p1[1] - p2[1]) / area2, (p2[0] - p1[0]) / area2};
          basis_gradients_[e][1] = {(p2[1] - p0[1]) / area2, (p0[0] - p2[0]) / area2};
          basis_gradients_[e][2] = {(p0[1] - p1[1]) / area2, (p1[0] - p0[0]) / area2};
          for (int a = 0; a < 3; ++a)
            {
              const Point &u = nodes_[el[a]], &v = nodes_[el[(a + 1) % 3]];
              mesh_size_ = std::max(mesh_size_, std::hypot(u[0] - v[0], u[1] - v[1]));
            }
        }
    }

  const std::size_t nq = rule_.size();
  qpoints_.assign(ne * nq, {0.0, 0.0});
  qweights_.assign(ne * nq, 0.0);
  for (std::size_t e = 0; e < ne; ++e)
    for (std::size_t q = 0; q < nq; ++q)
      {
        Point x{0.0, 0.0};
        for (int a = 0; a <= dimension_; ++a)
          {
            const double lam = rule_.barycentric[q][a];
            x[0] += lam * nodes_[elements_[e][a]][0];
            x[1] += lam * nodes_[elements_[e][a]][1];
          }
        qpoints_[e * nq + q]  = x;
        qweights_[e * nq + q] = rule_.weights[q] * element_measure_[e];
      }

  validate();
}

void Grid::validate() const
{
  const auto fail = [](const std::string &what) { throw std::logic_error("grid: " + what); };

  if (dimension_ != 1 && dimension_ != 2)
    fail("dimension must be 1 or 2");
  if (boundary_.size() != nodes_.size())
    fail("boundary mask size mismatch");

  double total = 0.0;
  for (std::size_t e = 0; e < elements_.size(); ++e)
    {
      const auto idx = element(e);
      for (std::size_t a = 0; a < idx.size(); ++a)
        {
          if (idx[a] < 0 || static_cast<std::size_t>(idx[a]) >= nodes_.size())
            fail("element node index out of range");
          for (std::size_t b = a + 1; b < idx.size(); ++b)
            if (idx[a] == idx[b])
              fail("element with repeated node");
        }
      if (!(element_measure_[e] > 0.0))
        fail("non-positive element measure");
      total += element_measure_[e];
    }
  if (std::abs(total - measure_) > 1e-12 * measure_)
    fail("element measures do not sum to the domain measure");

  if (dimension_ == 1)
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (!(nodes_[i][0] > nodes_[i - 1][0]))
        fail("1D nodes not strictly increasing");

  const double wsum = std::accumulate(rule_.weights.begin(), rule_.weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-14)
    fail("quadrature weights do not sum to one");
  for (double w : rule_.weights)
    if (!(w > 0.0))
      fail("non-positive quadrature weight");
}

GridPtr build_interval_grid(double a, double b, std::size_t cells)
{
  if (!(a < b))
    throw std::invalid_argument("build_interval_grid: need a < b");
  if (cells == 0)
    throw std::invalid_argument("build_interval_grid: need at least one cell");

  auto g        = std::shared_ptr<Grid>(new Grid());
  g->dimension_ = 1;
  g->nodes_.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    g->nodes_[i] = {i == cells ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(cells),
                    0.0};
  g->elements_.resize(cells);
  for (std::size_t i = 0; i < cells; ++i)
    g->elements_[i] = {static_cast<int>(i), static_cast<int>(i + 1), -1};
  g->boundary_.assign(cells + 1, 0);
  g->boundary_.front() = 1;
  g->boundary_.back()  = 1;
  g->measure_          = b - a;
  g->rule_             = QuadratureRule::gauss2_segment();
  g->x0_               = a;
  g->lx_               = b - a;
  g->nx_               = cells;
  g->finalize();
  return g;
}

GridPtr build_rect_grid(std::size_t x_cells, std::size_t y_cells, double lx, double ly)
{
  if (x_cells == 0 || y_cells == 0)
    throw std::invalid_argument("build_rect_grid: cell counts must be positive");
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("build_rect_grid: side lengths must be positive");

  auto g        = std::shared_ptr<Grid>(new Grid());
  g->dimension_ = 2;
  const std::size_t nxp = x_cells + 1, nyp = y_cells + 1;
  g->nodes_.resize(nxp * nyp);
  g->boundary_.assign(nxp * nyp, 0);
  for (std::size_t j = 0; j < nyp; ++j)
    for (std::size_t i = 0; i < nxp; ++i)
      {
        const double x = i == x_cells ? lx : lx * static_cast<double>(i) / static_cast<double>(x_cells);
        const double y = j == y_cells ? ly : ly * static_cast<double>(j) / static_cast<double>(y_cells);
        g->nodes_[j * nxp + i]    = {x, y};
        g->boundary_[j * nxp + i] = (i == 0 || j == 0 || i == x_cells || j == y_cells) ? 1 : 0;
      }

  g->elements_.reserve(2 * x_cells * y_cells);
  for (std::size_t j = 0; j < y_cells; ++j)
    for (std::size_t i = 0; i < x_cells; ++i)
      {
        const int n00 = static_cast<int>(j * nxp + i);
        const int n10 = n00 + 1;
        const int n01 = static_cast<int>((j + 1) * nxp + i);
        const int n11 = n01 + 1;
        g->elements_.push_back({n00, n10, n11});
        g->elements_.push_back({n00, n11, n01});
      }
  g->measure_ = lx * ly;
  g->rule_    = QuadratureRule::edge_midpoint_triangle();
  g->lx_      = lx;
  g->ly_      = ly;
  g->nx_      = x_cells;
  g->ny_      = y_cells;
  g->finalize();
  return g;
}

std::optional<std::size_t> Grid::locate(const Point &p) const
{
  constexpr double slack = 1e-12;
  if (dimension_ == 1)
    {
      const double s = (p[0] - x0_) / lx_;
      if (s < -slack || s > 1.0 + slack)
        return std::nullopt;
      const auto i = static_cast<std::size_t>(
        std::clamp(std::floor(s * static_cast<double>(nx_)), 0.0, static_cast<double>(nx_ - 1)));
      // equispacing in floating point can put p one cell off
      if (i > 0 && p[0] < nodes_[i][0])
        return i - 1;
      if (i + 1 < nx_ && p[0] > nodes_[i + 1][0])
        return i + 1;
      return i;
    }

  const double sx = p[0] / lx_, sy = p[1] / ly_;
  if (sx < -slack || sx > 1.0 + slack || sy < -slack || sy > 1.0 + slack)
    return std::nullopt;
  const double fx = std::clamp(sx * static_cast<double>(nx_), 0.0, static_cast<double>(nx_));
  const double fy = std::clamp(sy * static_cast<double>(ny_), 0.0, static_cast<double>(ny_));
  const auto   i  = std::min(static_cast<std::size_t>(fx), nx_ - 1);
  const auto   j  = std::min(static_cast<std::size_t>(fy), ny_ - 1);
  const double s = fx - static_cast<double>(i), t = fy - static_cast<double>(j);
  return 2 * (j * nx_ + i) + (t > s ? 1 : 0);
}

NodalFunction::NodalFunction(GridPtr grid, std::vector<double> values)
  : grid_(std::move(grid))
  , values_(std::move(values))
{
  if (!grid_)
    throw std::invalid_argument("field: null grid");
  if (values_.size() != grid_->num_nodes())
    throw std::invalid_argument("field: value count does not match node count");
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::invalid_argument("field: non-finite nodal value");
}

double NodalFunction::at_qpoint(std::size_t e, std::size_t q) const
{
  const auto idx = grid_->element(e);
  double     v   = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    v += grid_->barycentric(q, static_cast<int>(a)) * values_[idx[a]];
  return v;
}

Vec2 NodalFunction::gradient(std::size_t e) const
{
  const auto idx = grid_->element(e);
  Vec2       g{0.0, 0.0};
  for (std::size_t a = 0; a < idx.size(); ++a)
    {
      const Vec2 &dphi = grid_->basis_gradient(e, static_cast<int>(a));
      g[0] += values_[idx[a]] * dphi[0];
      g[1] += values_[idx[a]] * dphi[1];
    }
  return g;
}

double NodalFunction::evaluate(const Point &p) const
{
  const auto e = grid_->locate(p);
  if (!e)
    throw std::out_of_range("evaluate: point outside the domain");
  const auto   idx = grid_->element(*e);
  const Point &p0  = grid_->node(idx[0]);
  const Vec2   d{p[0] - p0[0], p[1] - p0[1]};
  double       v = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    {
      const double lam = (a == 0 ? 1.0 : 0.0) + dot(grid_->basis_gradient(*e, static_cast<int>(a)), d);
      v += lam * values_[idx[a]];
    }
  return v;
}

DiscreteField::DiscreteField(GridPtr grid, std::vector<double> values)
  : NodalFunction(std::move(grid), std::move(values))
{
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (grid_->on_boundary(i) && values_[i] != 0.0)
      throw std::invalid_argument("field: nonzero value on a boundary node");
}

DiscreteField DiscreteField::zero(GridPtr grid)
{
  const std::size_t n = grid->num_nodes();
  return DiscreteField(std::move(grid), std::vector<double>(n, 0.0));
}

namespace
{
void require_same_grid(const NodalFunction &a, const NodalFunction &b)
{
  if (a.grid_ptr() != b.grid_ptr())
    throw std::invalid_argument("fields live on different grids");
}
} // namespace

DiscreteField operator+(const DiscreteField &a, const DiscreteField &b)
{
  require_same_grid(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a[i] + b[i];
  return DiscreteField(a.grid_ptr(), std::move(out));
}

DiscreteField operator-(const DiscreteField &a, const DiscreteField &b)
{
  require_same_grid(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a[i] - b[i];
  return DiscreteField(a.grid_ptr(), std::move(out));
}

DiscreteField operator*(double s, const DiscreteField &a)
{
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.grid().on_boundary(i) ? 0.0 : s * a[i];
  return DiscreteField(a.grid_ptr(), std::move(out));
}

DiscreteField interpolate(const GridPtr &grid, const PointFunction &fn)
{
  std::vector<double> v(grid->num_nodes(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    {
      if (grid->on_boundary(i))
        continue;
      v[i] = fn(grid->node(i));
      if (!std::isfinite(v[i]))
        throw std::invalid_argument("interpolate: non-finite value at interior node " +
                                    std::to_string(i));
    }
  return DiscreteField(grid, std::move(v));
}

NodalFunction nodal_interpolant(const GridPtr &grid, const PointFunction &fn)
{
  std::vector<double> v(grid->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = fn(grid->node(i));
  return NodalFunction(grid, std::move(v));
}

Vec2 element_gradient(const NodalFunction &v, std::size_t element_index)
{
  if (element_index >= v.grid().num_elements())
    throw std::out_of_range("element_gradient: element index out of range");
  return v.gradient(element_index);
}

std::vector<double> qpoint_values(const NodalFunction &v)
{
  const Grid         &g  = v.grid();
  const std::size_t   nq = g.qpoints_per_element();
  std::vector<double> out(g.num_qpoints());
  for (std::size_t e = 0; e < g.num_elements(); ++e)
    for (std::size_t q = 0; q < nq; ++q)
      out[e * nq + q] = v.at_qpoint(e, q);
  return out;
}

double norm(const NodalFunction &v, Norm which)
{
  const Grid &g = v.grid();
  switch (which)
    {
    case Norm::Linf:
      {
        double m = 0.0;
        for (double x : v.values())
          m = std::max(m, std::abs(x));
        return m;
      }
    case Norm::L1:
    case Norm::L2:
      {
        const auto vq = qpoint_values(v);
        if (which == Norm::L1)
          return integrate(g, [&](std::size_t qi) { return std::abs(vq[qi]); });
        return std::sqrt(integrate(g, [&](std::size_t qi) { return vq[qi] * vq[qi]; }));
      }
    case Norm::W11_semi:
    case Norm::H1_semi:
      {
        double sum = 0.0;
        for (std::size_t e = 0; e < g.num_elements(); ++e)
          {
            const double gl = length(v.gradient(e));
            sum += g.element_measure(e) * (which == Norm::W11_semi ? gl : gl * gl);
          }
        return which == Norm::W11_semi ? sum : std::sqrt(sum);
      }
    }
  throw std::invalid_argument("norm: unknown kind");
}

double weighted_grad_l2(const NodalFunction &v, std::span<const double> b_at_qpoints)
{
  const Grid &g = v.grid();
  if (b_at_qpoints.size() != g.num_qpoints())
    throw std::invalid_argument("weighted_grad_l2: coefficient not sampled on this grid");
  const std::size_t nq  = g.qpoints_per_element();
  double            sum = 0.0;
  for (std::size_t e = 0; e < g.num_elements(); ++e)
    {
      const Vec2   grad = v.gradient(e);
      const double g2   = dot(grad, grad);
      for (std::size_t q = 0; q < nq; ++q)
        {
          const std::size_t qi    = e * nq + q;
          const double      denom = 1.0 + b_at_qpoints[qi] * std::abs(v.at_qpoint(e, q));
          sum += g.qweight(qi) * g2 / (denom * denom);
        }
    }
  return sum;
}

} // namespace ncmin
