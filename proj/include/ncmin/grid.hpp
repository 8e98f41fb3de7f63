#pragma once

// Simplicial P1 meshes on intervals and rectangles, nodal fields, quadrature,
// truncation operators and the norms used by the estimate audits.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ncmin
{

using Point = std::array<double, 2>;
using Vec2  = std::array<double, 2>;

inline double dot(const Vec2 &a, const Vec2 &b) { return a[0] * b[0] + a[1] * b[1]; }
inline double length(const Vec2 &a) { return std::sqrt(dot(a, a)); }

/// Quadrature on the reference simplex, in barycentric coordinates.
/// Weights are relative: they sum to one and get scaled by the element measure.
struct QuadratureRule
{
  std::vector<std::array<double, 3>> barycentric;
  std::vector<double>                weights;

  std::size_t size() const { return weights.size(); }

  /// Two-point Gauss-Legendre on a segment (exact to degree 3).
  static QuadratureRule gauss2_segment();
  /// Edge-midpoint rule on a triangle (exact to degree 2).
  static QuadratureRule edge_midpoint_triangle();
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Immutable simplicial mesh of an interval (1D) or a rectangle (2D).
///
/// Nodes on the topological boundary are flagged; fields defined on the grid
/// keep zero values there. Per-element basis gradients and physical
/// quadrature points are precomputed at construction.
class Grid
{
public:
  int dimension() const { return dimension_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return elements_.size(); }
  std::size_t num_interior() const;
  int vertices_per_element() const { return dimension_ + 1; }

  const std::vector<Point> &nodes() const { return nodes_; }
  const Point &node(std::size_t i) const { return nodes_[i]; }
  std::span<const int> element(std::size_t e) const
  {
    return {elements_[e].data(), static_cast<std::size_t>(dimension_ + 1)};
  }
  bool on_boundary(std::size_t node) const { return boundary_[node] != 0; }

  double measure() const { return measure_; }
  double element_measure(std::size_t e) const { return element_measure_[e]; }

  /// Gradient of the local hat function `local` on element `e`.
  const Vec2 &basis_gradient(std::size_t e, int local) const
  {
    return basis_gradients_[e][static_cast<std::size_t>(local)];
  }

  const QuadratureRule &quadrature() const { return rule_; }
  std::size_t qpoints_per_element() const { return rule_.size(); }
  std::size_t num_qpoints() const { return qpoints_.size(); }
  std::size_t qindex(std::size_t e, std::size_t q) const { return e * rule_.size() + q; }
  const Point &qpoint(std::size_t qi) const { return qpoints_[qi]; }
  /// Absolute weight: relative rule weight times element measure.
  double qweight(std::size_t qi) const { return qweights_[qi]; }
  double barycentric(std::size_t q, int local) const
  {
    return rule_.barycentric[q][static_cast<std::size_t>(local)];
  }

  /// Element containing p, if any.
  std::optional<std::size_t> locate(const Point &p) const;

  /// Characteristic mesh size (largest element edge length).
  double mesh_size() const { return mesh_size_; }

  /// Throws std::logic_error if a structural invariant does not hold.
  void validate() const;

private:
  Grid() = default;

  void finalize();

  int                             dimension_ = 1;
  std::vector<Point>              nodes_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<char>               boundary_;
  double                          measure_ = 0.0;
  std::vector<double>             element_measure_;
  std::vector<std::array<Vec2, 3>> basis_gradients_;
  QuadratureRule                  rule_;
  std::vector<Point>              qpoints_;
  std::vector<double>             qweights_;
  double                          mesh_size_ = 0.0;

  // structured layout, used by locate()
  double      x0_ = 0.0, lx_ = 0.0, ly_ = 0.0;
  std::size_t nx_ = 0, ny_ = 0;

  friend GridPtr build_interval_grid(double a, double b, std::size_t cells);
  friend GridPtr build_rect_grid(std::size_t x_cells, std::size_t y_cells, double lx, double ly);
};

/// Equispaced 1D grid on (a, b) with `cells` segments.
GridPtr build_interval_grid(double a, double b, std::size_t cells);

/// Rectangle (0,lx) x (0,ly), every cell split along its rising diagonal.
GridPtr build_rect_grid(std::size_t x_cells, std::size_t y_cells, double lx, double ly);


/// Continuous piecewise-linear function given by nodal values. No boundary
/// condition is imposed; see DiscreteField for the zero-trace class.
class NodalFunction
{
public:
  NodalFunction(GridPtr grid, std::vector<double> values);

  const Grid &grid() const { return *grid_; }
  const GridPtr &grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double at_qpoint(std::size_t e, std::size_t q) const;
  Vec2 gradient(std::size_t e) const;
  /// Point evaluation; throws std::out_of_range outside the domain.
  double evaluate(const Point &p) const;

protected:
  GridPtr             grid_;
  std::vector<double> values_;
};

/// P1 field vanishing on the boundary: the discrete stand-in for H^1_0.
class DiscreteField : public NodalFunction
{
public:
  /// Throws std::invalid_argument if a boundary value is nonzero.
  DiscreteField(GridPtr grid, std::vector<double> values);

  static DiscreteField zero(GridPtr grid);
};

DiscreteField operator+(const DiscreteField &a, const DiscreteField &b);
DiscreteField operator-(const DiscreteField &a, const DiscreteField &b);
DiscreteField operator*(double s, const DiscreteField &a);

using PointFunction = std::function<double(const Point &)>;

/// Nodal interpolant with boundary values clamped to zero.
DiscreteField interpolate(const GridPtr &grid, const PointFunction &fn);

/// Nodal interpolant without boundary clamping.
NodalFunction nodal_interpolant(const GridPtr &grid, const PointFunction &fn);

inline double truncate_value(double s, double k) { return std::max(-k, std::min(s, k)); }
inline double tail_value(double s, double k) { return s - truncate_value(s, k); }

namespace detail
{
template <typename Field, typename Op>
Field map_nodal(const Field &v, Op op)
{
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double &x : out)
    x = op(x);
  return Field(v.grid_ptr(), std::move(out));
}

inline void check_level(double k)
{
  if (!(k >= 0.0))
    throw std::invalid_argument("truncation level must be nonnegative");
}
} // namespace detail

/// Nodal truncation T_k. Zero boundary values stay zero.
template <typename Field>
Field truncate(const Field &v, double k)
{
  detail::check_level(k);
  return detail::map_nodal(v, [k](double s) { return truncate_value(s, k); });
}

/// Nodal tail G_k = id - T_k.
template <typename Field>
Field tail(const Field &v, double k)
{
  detail::check_level(k);
  return detail::map_nodal(v, [k](double s) { return tail_value(s, k); });
}

/// Constant gradient of v on one element (second component is 0 in 1D).
Vec2 element_gradient(const NodalFunction &v, std::size_t element_index);

enum class Norm
{
  L1,
  L2,
  Linf,
  W11_semi,
  H1_semi
};

double norm(const NodalFunction &v, Norm which);

/// Quadrature value of  int |grad v|^2 / (1 + b |v|)^2  with b given at the
/// grid's quadrature points.
double weighted_grad_l2(const NodalFunction &v, std::span<const double> b_at_qpoints);

/// Quadrature sum  sum_q w_q g(q)  over all quadrature points.
template <typename F>
double integrate(const Grid &grid, F &&g)
{
  double sum = 0.0;
  for (std::size_t qi = 0; qi < grid.num_qpoints(); ++qi)
    sum += grid.qweight(qi) * g(qi);
  return sum;
}

/// Values of v at every quadrature point, in qindex order.
std::vector<double> qpoint_values(const NodalFunction &v);

} // namespace ncmin
