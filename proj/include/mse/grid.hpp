#ifndef MSE_GRID_HPP
#define MSE_GRID_HPP

/*
 * Uniform tensor grids on rectangular base domains, second-order stencils
 * with one-sided fallback at the boundary, boundary normal derivatives and
 * composite trapezoidal quadrature (interior and per-face boundary rules).
 */

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "mse/smallvec.hpp"

namespace mse {

struct Domain {
  Vec lower;
  Vec upper;
  int dim() const { return lower.dim(); }
};

class Grid {
 public:
  /// nodes per axis must be >= 9 on every axis.
  Grid(const Domain& dom, const std::vector<int>& nodes_per_axis);
  Grid(const Domain& dom, int nodes_all_axes);

  int dim() const { return d_; }
  int npts(int axis) const { return np_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  const Domain& domain() const { return dom_; }

  long num_nodes() const { return total_; }
  long num_interior() const { return static_cast<long>(interior_nodes_.size()); }
  long num_boundary() const { return static_cast<long>(boundary_nodes_.size()); }

  Vec coords(long node) const;
  void unflatten(long node, int* idx) const;
  long flatten(const int* idx) const;
  long shift(long node, int axis, int step) const;  // node index shifted along axis
  int axis_index(long node, int axis) const;

  bool is_boundary(long node) const { return interior_id_[node] < 0; }
  long interior_id(long node) const { return interior_id_[node]; }
  long boundary_id(long node) const { return boundary_id_[node]; }
  long node_of_interior(long iid) const { return interior_nodes_[iid]; }
  long node_of_boundary(long bid) const { return boundary_nodes_[bid]; }

  /// Face-averaged outward unit normal at a boundary node.
  const Vec& boundary_normal(long bid) const { return boundary_normals_[bid]; }
  /// Per-face trapezoid weight of a boundary node (corner weight 1/2 per face).
  double boundary_weight(long bid) const { return boundary_weights_[bid]; }
  /// Tensor trapezoid weight of any node for integrals over the domain.
  double interior_weight(long node) const { return interior_weights_[node]; }

 private:
  void build();
  Domain dom_;
  int d_ = 0;
  std::array<int, 3> np_{};
  std::array<double, 3> h_{};
  long total_ = 0;
  std::vector<long> interior_id_, boundary_id_;
  std::vector<long> interior_nodes_, boundary_nodes_;
  std::vector<Vec> boundary_normals_;
  std::vector<double> boundary_weights_;
  std::vector<double> interior_weights_;
};

/// Fields are views onto a Grid; the grid must outlive every field built on
/// it (result structs that cross scopes own their grid via shared_ptr).
template <class T>
class ScalarFieldT {
 public:
  ScalarFieldT() = default;
  explicit ScalarFieldT(const Grid& g, T init = T{}) : g_(&g), v_(g.num_nodes(), init) {}

  const Grid& grid() const { return *g_; }
  T& operator[](long node) { return v_[node]; }
  const T& operator[](long node) const { return v_[node]; }
  long size() const { return static_cast<long>(v_.size()); }
  const std::vector<T>& data() const { return v_; }
  std::vector<T>& data() { return v_; }

  static ScalarFieldT sample(const Grid& g, const std::function<T(const Vec&)>& f) {
    ScalarFieldT r(g);
    for (long i = 0; i < g.num_nodes(); ++i) r.v_[i] = f(g.coords(i));
    return r;
  }

 private:
  const Grid* g_ = nullptr;
  std::vector<T> v_;
};
using ScalarField = ScalarFieldT<double>;
using ComplexField = ScalarFieldT<std::complex<double>>;

template <class T>
class BoundaryFieldT {
 public:
  BoundaryFieldT() = default;
  explicit BoundaryFieldT(const Grid& g, T init = T{}) : g_(&g), v_(g.num_boundary(), init) {}

  const Grid& grid() const { return *g_; }
  T& operator[](long bid) { return v_[bid]; }
  const T& operator[](long bid) const { return v_[bid]; }
  long size() const { return static_cast<long>(v_.size()); }
  const std::vector<T>& data() const { return v_; }

  static BoundaryFieldT sample(const Grid& g, const std::function<T(const Vec&)>& f) {
    BoundaryFieldT r(g);
    for (long b = 0; b < g.num_boundary(); ++b) r.v_[b] = f(g.coords(g.node_of_boundary(b)));
    return r;
  }

 private:
  const Grid* g_ = nullptr;
  std::vector<T> v_;
};
using BoundaryField = BoundaryFieldT<double>;
using ComplexBoundaryField = BoundaryFieldT<std::complex<double>>;

/// Per-axis first/second derivative at a node: centered where both neighbors
/// exist, one-sided 3- or 4-point second-order stencil at the boundary.
template <class T>
T axis_d1(const ScalarFieldT<T>& f, long node, int axis);
template <class T>
T axis_d2(const ScalarFieldT<T>& f, long node, int axis);
template <class T>
T mixed_d2(const ScalarFieldT<T>& f, long node, int a, int b);  // symmetrized

template <class T>
std::vector<ScalarFieldT<T>> gradient_fd(const ScalarFieldT<T>& f);
template <class T>
std::vector<ScalarFieldT<T>> hessian_fd(const ScalarFieldT<T>& f);  // row-major d*d, symmetric
template <class T>
ScalarFieldT<T> laplacian_fd(const ScalarFieldT<T>& f);

/// One-sided second-order normal derivative at every boundary node.
template <class T>
BoundaryFieldT<T> normal_derivative(const ScalarFieldT<T>& f);

template <class T>
T integrate_interior(const ScalarFieldT<T>& f);
template <class T>
T integrate_boundary(const BoundaryFieldT<T>& f);

/// Boundary integral ∮ (∂_ν u) w dS with the outward flux taken per face
/// (one-sided along the face axis), so corner contributions are tracked per
/// incident face and the rule stays second order; the plain
/// normal_derivative field uses averaged corner normals and is O(h) there.
template <class T>
T integrate_flux(const ScalarFieldT<T>& u, const BoundaryFieldT<T>& w);

template <class T>
BoundaryFieldT<T> trace(const ScalarFieldT<T>& f);
template <class T>
void apply_dirichlet(ScalarFieldT<T>& f, const BoundaryFieldT<T>& bc);

double sup_norm(const ScalarField& f);
double sup_norm(const BoundaryField& f);
double sup_diff(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& f);  // quadrature-weighted

/// Field serialization: CSV (coordinates + value) and a compact binary
/// container; grid metadata serializes to JSON inside ExperimentRun.
void write_csv(const ScalarField& f, const std::string& path);
void write_csv(const BoundaryField& f, const std::string& path);
void write_binary(const ScalarField& f, const std::string& path);
ScalarField read_binary(const Grid& g, const std::string& path);

}  // namespace mse

#endif
