#ifndef MSE_SMALLVEC_HPP
#define MSE_SMALLVEC_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <initializer_list>

namespace mse {

constexpr int kMaxDim = 4;

/// Fixed-capacity real vector for points in R^n, n <= 4.
struct Vec {
  std::array<double, kMaxDim> v{};
  int n = 0;

  Vec() = default;
  Vec(std::initializer_list<double> xs) {
    n = static_cast<int>(xs.size());
    assert(n <= kMaxDim);
    int i = 0;
    for (double x : xs) v[i++] = x;
  }
  static Vec zero(int dim) {
    Vec r;
    r.n = dim;
    return r;
  }
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
  int dim() const { return n; }

  Vec operator+(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < n; ++i) r.v[i] += o.v[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < n; ++i) r.v[i] -= o.v[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r = *this;
    for (int i = 0; i < n; ++i) r.v[i] *= s;
    return r;
  }
  double dot(const Vec& o) const {
    double s = 0;
    for (int i = 0; i < n; ++i) s += v[i] * o.v[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

/// Complex vector, same capacity. dot() is the bilinear (not Hermitian) product.
struct CVec {
  std::array<std::complex<double>, kMaxDim> v{};
  int n = 0;

  CVec() = default;
  explicit CVec(int dim) : n(dim) {}
  static CVec from(const Vec& re, const Vec& im) {
    CVec r(re.n);
    for (int i = 0; i < re.n; ++i) r.v[i] = {re[i], im[i]};
    return r;
  }
  std::complex<double>& operator[](int i) { return v[i]; }
  std::complex<double> operator[](int i) const { return v[i]; }
  int dim() const { return n; }

  CVec operator+(const CVec& o) const {
    CVec r = *this;
    for (int i = 0; i < n; ++i) r.v[i] += o.v[i];
    return r;
  }
  CVec operator*(std::complex<double> s) const {
    CVec r = *this;
    for (int i = 0; i < n; ++i) r.v[i] *= s;
    return r;
  }
  /// Bilinear dot product: sum z_i w_i (no conjugation).
  std::complex<double> dot(const CVec& o) const {
    std::complex<double> s = 0;
    for (int i = 0; i < n; ++i) s += v[i] * o.v[i];
    return s;
  }
  std::complex<double> dot(const Vec& o) const {
    std::complex<double> s = 0;
    for (int i = 0; i < n; ++i) s += v[i] * o.v[i];
    return s;
  }
  Vec real() const {
    Vec r = Vec::zero(n);
    for (int i = 0; i < n; ++i) r[i] = v[i].real();
    return r;
  }
  Vec imag() const {
    Vec r = Vec::zero(n);
    for (int i = 0; i < n; ++i) r[i] = v[i].imag();
    return r;
  }
  double norm() const {
    double s = 0;
    for (int i = 0; i < n; ++i) s += std::norm(v[i]);
    return std::sqrt(s);
  }
};

/// Small symmetric-capable matrix, n x n with n <= 4 (row major).
struct Mat {
  std::array<double, kMaxDim * kMaxDim> m{};
  int n = 0;

  Mat() = default;
  static Mat zero(int dim) {
    Mat r;
    r.n = dim;
    return r;
  }
  double& operator()(int i, int j) { return m[i * kMaxDim + j]; }
  double operator()(int i, int j) const { return m[i * kMaxDim + j]; }
  int dim() const { return n; }
  double trace() const {
    double s = 0;
    for (int i = 0; i < n; ++i) s += (*this)(i, i);
    return s;
  }
  /// x^T M y
  double quad(const Vec& x, const Vec& y) const {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += (*this)(i, j) * x[i] * y[j];
    return s;
  }
};

/// Multi-index for partial derivatives, one order per axis.
struct MultiIndex {
  std::array<int, kMaxDim> k{};
  int n = 0;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> ks) {
    n = static_cast<int>(ks.size());
    assert(n <= kMaxDim);
    int i = 0;
    for (int x : ks) k[i++] = x;
  }
  static MultiIndex zero(int dim) {
    MultiIndex r;
    r.n = dim;
    return r;
  }
  static MultiIndex unit(int dim, int axis, int order = 1) {
    MultiIndex r = zero(dim);
    r.k[axis] = order;
    return r;
  }
  int& operator[](int i) { return k[i]; }
  int operator[](int i) const { return k[i]; }
  int order() const {
    int s = 0;
    for (int i = 0; i < n; ++i) s += k[i];
    return s;
  }
};

}  // namespace mse

#endif
