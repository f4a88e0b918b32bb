#include "mse/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mse {

Grid::Grid(const Domain& dom, const std::vector<int>& nodes_per_axis) : dom_(dom) {
  d_ = dom.dim();
  if (d_ < 1 || d_ > 3) throw std::invalid_argument("Grid: base dimension must be 1..3");
  if (static_cast<int>(nodes_per_axis.size()) != d_)
    throw std::invalid_argument("Grid: nodes_per_axis size mismatch");
  for (int a = 0; a < d_; ++a) {
    if (nodes_per_axis[a] < 9) throw std::invalid_argument("Grid: need >= 9 nodes per axis");
    if (!(dom.upper[a] > dom.lower[a]))
      throw std::invalid_argument("Grid: domain upper must exceed lower");
    np_[a] = nodes_per_axis[a];
    h_[a] = (dom.upper[a] - dom.lower[a]) / (np_[a] - 1);
  }
  build();
}

Grid::Grid(const Domain& dom, int nodes_all_axes)
    : Grid(dom, std::vector<int>(dom.dim(), nodes_all_axes)) {}

void Grid::build() {
  total_ = 1;
  for (int a = 0; a < d_; ++a) total_ *= np_[a];
  interior_id_.assign(total_, -1);
  boundary_id_.assign(total_, -1);
  interior_weights_.assign(total_, 0.0);

  int idx[3] = {0, 0, 0};
  for (long node = 0; node < total_; ++node) {
    unflatten(node, idx);
    bool bdry = false;
    double w = 1.0;
    for (int a = 0; a < d_; ++a) {
      const bool edge = (idx[a] == 0 || idx[a] == np_[a] - 1);
      if (edge) bdry = true;
      w *= edge ? 0.5 * h_[a] : h_[a];
    }
    interior_weights_[node] = w;
    if (bdry) {
      boundary_id_[node] = static_cast<long>(boundary_nodes_.size());
      boundary_nodes_.push_back(node);
    } else {
      interior_id_[node] = static_cast<long>(interior_nodes_.size());
      interior_nodes_.push_back(node);
    }
  }

  // face-averaged outward normals
  boundary_normals_.resize(boundary_nodes_.size());
  for (size_t b = 0; b < boundary_nodes_.size(); ++b) {
    unflatten(boundary_nodes_[b], idx);
    Vec nrm = Vec::zero(d_);
    for (int a = 0; a < d_; ++a) {
      if (idx[a] == 0) nrm[a] -= 1.0;
      if (idx[a] == np_[a] - 1) nrm[a] += 1.0;
    }
    const double len = nrm.norm();
    for (int a = 0; a < d_; ++a) nrm[a] /= len;
    boundary_normals_[b] = nrm;
  }

  // boundary quadrature: per-face trapezoid, accumulated over incident faces
  boundary_weights_.assign(boundary_nodes_.size(), 0.0);
  for (size_t b = 0; b < boundary_nodes_.size(); ++b) {
    unflatten(boundary_nodes_[b], idx);
    for (int a = 0; a < d_; ++a) {
      if (idx[a] != 0 && idx[a] != np_[a] - 1) continue;  // not on this face pair
      double w = 1.0;
      for (int t = 0; t < d_; ++t) {
        if (t == a) continue;
        const bool edge = (idx[t] == 0 || idx[t] == np_[t] - 1);
        w *= edge ? 0.5 * h_[t] : h_[t];
      }
      boundary_weights_[b] += w;
    }
  }
}

Vec Grid::coords(long node) const {
  int idx[3];
  unflatten(node, idx);
  Vec x = Vec::zero(d_);
  for (int a = 0; a < d_; ++a) x[a] = dom_.lower[a] + idx[a] * h_[a];
  return x;
}

void Grid::unflatten(long node, int* idx) const {
  for (int a = 0; a < d_; ++a) {
    idx[a] = static_cast<int>(node % np_[a]);
    node /= np_[a];
  }
}

long Grid::flatten(const int* idx) const {
  long node = 0;
  for (int a = d_ - 1; a >= 0; --a) node = node * np_[a] + idx[a];
  return node;
}

long Grid::shift(long node, int axis, int step) const {
  int idx[3];
  unflatten(node, idx);
  idx[axis] += step;
  return flatten(idx);
}

int Grid::axis_index(long node, int axis) const {
  int idx[3];
  unflatten(node, idx);
  return idx[axis];
}

template <class T>
T axis_d1(const ScalarFieldT<T>& f, long node, int axis) {
  const Grid& g = f.grid();
  const int i = g.axis_index(node, axis);
  const int n = g.npts(axis);
  const double h = g.spacing(axis);
  if (i > 0 && i < n - 1)
    return (f[g.shift(node, axis, 1)] - f[g.shift(node, axis, -1)]) / (2.0 * h);
  if (i == 0)
    return (-3.0 * f[node] + 4.0 * f[g.shift(node, axis, 1)] - f[g.shift(node, axis, 2)]) /
           (2.0 * h);
  return (3.0 * f[node] - 4.0 * f[g.shift(node, axis, -1)] + f[g.shift(node, axis, -2)]) /
         (2.0 * h);
}

template <class T>
T axis_d2(const ScalarFieldT<T>& f, long node, int axis) {
  const Grid& g = f.grid();
  const int i = g.axis_index(node, axis);
  const int n = g.npts(axis);
  const double h = g.spacing(axis);
  if (i > 0 && i < n - 1)
    return (f[g.shift(node, axis, 1)] - 2.0 * f[node] + f[g.shift(node, axis, -1)]) / (h * h);
  if (i == 0)
    return (2.0 * f[node] - 5.0 * f[g.shift(node, axis, 1)] + 4.0 * f[g.shift(node, axis, 2)] -
            f[g.shift(node, axis, 3)]) /
           (h * h);
  return (2.0 * f[node] - 5.0 * f[g.shift(node, axis, -1)] + 4.0 * f[g.shift(node, axis, -2)] -
          f[g.shift(node, axis, -3)]) /
         (h * h);
}

template <class T>
T mixed_d2(const ScalarFieldT<T>& f, long node, int a, int b) {
  // D_a applied to axis_d1(·, b), symmetrized in (a,b)
  const Grid& g = f.grid();
  auto directional = [&](int outer, int inner) -> T {
    const int i = g.axis_index(node, outer);
    const int n = g.npts(outer);
    const double h = g.spacing(outer);
    if (i > 0 && i < n - 1)
      return (axis_d1(f, g.shift(node, outer, 1), inner) -
              axis_d1(f, g.shift(node, outer, -1), inner)) /
             (2.0 * h);
    if (i == 0)
      return (-3.0 * axis_d1(f, node, inner) + 4.0 * axis_d1(f, g.shift(node, outer, 1), inner) -
              axis_d1(f, g.shift(node, outer, 2), inner)) /
             (2.0 * h);
    return (3.0 * axis_d1(f, node, inner) - 4.0 * axis_d1(f, g.shift(node, outer, -1), inner) +
            axis_d1(f, g.shift(node, outer, -2), inner)) /
           (2.0 * h);
  };
  return 0.5 * (directional(a, b) + directional(b, a));
}

template <class T>
std::vector<ScalarFieldT<T>> gradient_fd(const ScalarFieldT<T>& f) {
  const Grid& g = f.grid();
  std::vector<ScalarFieldT<T>> r(g.dim(), ScalarFieldT<T>(g));
  for (int a = 0; a < g.dim(); ++a)
    for (long i = 0; i < g.num_nodes(); ++i) r[a][i] = axis_d1(f, i, a);
  return r;
}

template <class T>
std::vector<ScalarFieldT<T>> hessian_fd(const ScalarFieldT<T>& f) {
  const Grid& g = f.grid();
  const int d = g.dim();
  std::vector<ScalarFieldT<T>> r(d * d, ScalarFieldT<T>(g));
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b)
      for (long i = 0; i < g.num_nodes(); ++i) {
        const T v = (a == b) ? axis_d2(f, i, a) : mixed_d2(f, i, a, b);
        r[a * d + b][i] = v;
        r[b * d + a][i] = v;
      }
  return r;
}

template <class T>
ScalarFieldT<T> laplacian_fd(const ScalarFieldT<T>& f) {
  const Grid& g = f.grid();
  ScalarFieldT<T> r(g);
  for (long i = 0; i < g.num_nodes(); ++i) {
    T s{};
    for (int a = 0; a < g.dim(); ++a) s += axis_d2(f, i, a);
    r[i] = s;
  }
  return r;
}

template <class T>
BoundaryFieldT<T> normal_derivative(const ScalarFieldT<T>& f) {
  const Grid& g = f.grid();
  BoundaryFieldT<T> r(g);
  for (long b = 0; b < g.num_boundary(); ++b) {
    const long node = g.node_of_boundary(b);
    const Vec& nu = g.boundary_normal(b);
    T s{};
    for (int a = 0; a < g.dim(); ++a)
      if (nu[a] != 0.0) s += nu[a] * axis_d1(f, node, a);
    r[b] = s;
  }
  return r;
}

template <class T>
T integrate_interior(const ScalarFieldT<T>& f) {
  const Grid& g = f.grid();
  T s{};
  for (long i = 0; i < g.num_nodes(); ++i) s += f[i] * g.interior_weight(i);
  return s;
}

template <class T>
T integrate_boundary(const BoundaryFieldT<T>& f) {
  const Grid& g = f.grid();
  T s{};
  for (long b = 0; b < g.num_boundary(); ++b) s += f[b] * g.boundary_weight(b);
  return s;
}

template <class T>
T integrate_flux(const ScalarFieldT<T>& u, const BoundaryFieldT<T>& w) {
  const Grid& g = u.grid();
  const int d = g.dim();
  T s{};
  int idx[3];
  for (long b = 0; b < g.num_boundary(); ++b) {
    const long node = g.node_of_boundary(b);
    g.unflatten(node, idx);
    for (int a = 0; a < d; ++a) {
      const bool lo = (idx[a] == 0);
      const bool hi = (idx[a] == g.npts(a) - 1);
      if (!lo && !hi) continue;
      double wface = 1.0;
      for (int t = 0; t < d; ++t) {
        if (t == a) continue;
        const bool edge = (idx[t] == 0 || idx[t] == g.npts(t) - 1);
        wface *= edge ? 0.5 * g.spacing(t) : g.spacing(t);
      }
      const T flux = (hi ? 1.0 : -1.0) * axis_d1(u, node, a);
      s += wface * flux * w[b];
    }
  }
  return s;
}

template <class T>
BoundaryFieldT<T> trace(const ScalarFieldT<T>& f) {
  const Grid& g = f.grid();
  BoundaryFieldT<T> r(g);
  for (long b = 0; b < g.num_boundary(); ++b) r[b] = f[g.node_of_boundary(b)];
  return r;
}

template <class T>
void apply_dirichlet(ScalarFieldT<T>& f, const BoundaryFieldT<T>& bc) {
  const Grid& g = f.grid();
  for (long b = 0; b < g.num_boundary(); ++b) f[g.node_of_boundary(b)] = bc[b];
}

double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}
double sup_norm(const BoundaryField& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}
double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (long i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}
double l2_norm(const ScalarField& f) {
  double s = 0.0;
  const Grid& g = f.grid();
  for (long i = 0; i < g.num_nodes(); ++i) s += f[i] * f[i] * g.interior_weight(i);
  return std::sqrt(s);
}

void write_csv(const ScalarField& f, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path);
  const Grid& g = f.grid();
  for (long i = 0; i < g.num_nodes(); ++i) {
    const Vec x = g.coords(i);
    for (int a = 0; a < g.dim(); ++a) std::fprintf(fp, "%.17g,", x[a]);
    std::fprintf(fp, "%.17g\n", f[i]);
  }
  std::fclose(fp);
}

void write_csv(const BoundaryField& f, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path);
  const Grid& g = f.grid();
  for (long b = 0; b < g.num_boundary(); ++b) {
    const Vec x = g.coords(g.node_of_boundary(b));
    for (int a = 0; a < g.dim(); ++a) std::fprintf(fp, "%.17g,", x[a]);
    std::fprintf(fp, "%.17g\n", f[b]);
  }
  std::fclose(fp);
}

void write_binary(const ScalarField& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  const Grid& g = f.grid();
  os.write("MSEF1\n", 6);
  const int32_t d = g.dim();
  os.write(reinterpret_cast<const char*>(&d), 4);
  for (int a = 0; a < d; ++a) {
    const int32_t n = g.npts(a);
    os.write(reinterpret_cast<const char*>(&n), 4);
  }
  os.write(reinterpret_cast<const char*>(f.data().data()),
           static_cast<std::streamsize>(sizeof(double) * f.data().size()));
}

ScalarField read_binary(const Grid& g, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[6];
  is.read(magic, 6);
  if (std::string(magic, 6) != "MSEF1\n") throw std::runtime_error("bad field file " + path);
  int32_t d = 0;
  is.read(reinterpret_cast<char*>(&d), 4);
  if (d != g.dim()) throw std::runtime_error("field dimension mismatch");
  for (int a = 0; a < d; ++a) {
    int32_t n = 0;
    is.read(reinterpret_cast<char*>(&n), 4);
    if (n != g.npts(a)) throw std::runtime_error("field grid mismatch");
  }
  ScalarField f(g);
  is.read(reinterpret_cast<char*>(f.data().data()),
          static_cast<std::streamsize>(sizeof(double) * f.data().size()));
  return f;
}

// explicit instantiations
template double axis_d1<double>(const ScalarField&, long, int);
template std::complex<double> axis_d1<std::complex<double>>(const ComplexField&, long, int);
template double axis_d2<double>(const ScalarField&, long, int);
template std::complex<double> axis_d2<std::complex<double>>(const ComplexField&, long, int);
template double mixed_d2<double>(const ScalarField&, long, int, int);
template std::complex<double> mixed_d2<std::complex<double>>(const ComplexField&, long, int, int);
template std::vector<ScalarField> gradient_fd<double>(const ScalarField&);
template std::vector<ComplexField> gradient_fd<std::complex<double>>(const ComplexField&);
template std::vector<ScalarField> hessian_fd<double>(const ScalarField&);
template std::vector<ComplexField> hessian_fd<std::complex<double>>(const ComplexField&);
template ScalarField laplacian_fd<double>(const ScalarField&);
template ComplexField laplacian_fd<std::complex<double>>(const ComplexField&);
template BoundaryField normal_derivative<double>(const ScalarField&);
template ComplexBoundaryField normal_derivative<std::complex<double>>(const ComplexField&);
template double integrate_interior<double>(const ScalarField&);
template std::complex<double> integrate_interior<std::complex<double>>(const ComplexField&);
template double integrate_boundary<double>(const BoundaryField&);
template std::complex<double> integrate_boundary<std::complex<double>>(const ComplexBoundaryField&);
template double integrate_flux<double>(const ScalarField&, const BoundaryField&);
template std::complex<double> integrate_flux<std::complex<double>>(const ComplexField&,
                                                                   const ComplexBoundaryField&);
template BoundaryField trace<double>(const ScalarField&);
template ComplexBoundaryField trace<std::complex<double>>(const ComplexField&);
template void apply_dirichlet<double>(ScalarField&, const BoundaryField&);
template void apply_dirichlet<std::complex<double>>(ComplexField&, const ComplexBoundaryField&);

}  // namespace mse
