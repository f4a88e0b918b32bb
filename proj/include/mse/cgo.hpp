#ifndef MSE_CGO_HPP
#define MSE_CGO_HPP

/*
 * Complex geometric optics machinery: ζ-pair construction, the directional
 * Cauchy transform N⁻¹_{ζ0} (truncated-disk midpoint quadrature with exact
 * ±y antisymmetry), CGO solutions of the linearized operators as exact
 * discrete BVP solutions, and Fourier probing of products of solutions.
 *
 * Paths: d = 2 uses the Schrödinger reduction (−Δ + q, q = Δ√γ/√γ) with the
 * isotropic h-free ζ-pair; d >= 3 uses the convection operator for the first
 * pair member and its formal transpose for the second, so that the phases
 * cancel exactly and products concentrate on e^{i x·ξ}.
 */

#include <functional>
#include <optional>
#include <vector>

#include "mse/conformal.hpp"
#include "mse/grid.hpp"
#include "mse/linearize.hpp"

namespace mse {

struct ZetaPair {
  CVec zeta1, zeta2;  // complex d-vectors, ζ·ζ = 0, ζ1+ζ2 = i h ξ
  Vec mu1, mu2, xi;   // frame; for d = 2, mu1 = ξ^⊥/|ξ| and mu2 = ξ/|ξ|
  double h = 0.0;
};

/// Frame construction for d >= 3: requires unit mu1, mu2 orthogonal to each
/// other and to xi, and h|ξ| < 2.
ZetaPair make_zeta_pair(const Vec& xi, double h, const Vec& mu1, const Vec& mu2);

/// Isotropic d = 2 pair ζ1 = h(ξ^⊥+iξ)/2, ζ2 = h(−ξ^⊥+iξ)/2; the fields
/// e^{x·ζ/h} are h-free.
ZetaPair make_zeta_pair_2d(const Vec& xi, double h);

/// Deterministic orthonormal frame ⊥ xi for d = 3, conjugate-symmetric under
/// xi → −xi (mu1 even, mu2 odd).
void default_frame(const Vec& xi, Vec& mu1, Vec& mu2);

/// Dispatch on dimension.
ZetaPair make_zeta_pair_auto(const Vec& xi, double h);

/// Truncated directional Cauchy transform
///   (N⁻¹_{ζ0} f)(x) = (1/2π) ∬ f(x − y1 Re ζ0 − y2 Im ζ0)/(y1+iy2) dy
/// by midpoint quadrature over the disk |y| <= radius on a cells×cells grid;
/// the y = 0 cell kernel integral vanishes analytically and the ±y pairing
/// makes the ζ0 → −ζ0 antisymmetry exact at the quadrature level.
class CauchyTransform {
 public:
  using Fn = std::function<std::complex<double>(const Vec&)>;

  CauchyTransform(const Vec& re_zeta0, const Vec& im_zeta0, double radius, int cells);

  std::complex<double> apply(const Fn& f, const Vec& x) const;
  ComplexField apply_to_grid(const Fn& f, const Grid& g) const;
  /// Max |f| sampled on the truncation circle (support-leakage estimate).
  double tail_estimate(const Fn& f, const Vec& x0) const;

  double radius() const { return radius_; }

 private:
  Vec e1_, e2_;
  double radius_;
  int cells_;
};

struct CGOOptions {
  double cauchy_radius_factor = 3.0;  // × domain diameter
  int cauchy_cells = 129;
  double linear_rel_tol = 1e-12;
};

struct CGOSolution {
  CVec zeta;
  double h = 1.0;
  ComplexField phi;             // correction phase Φ on the grid (zero on the d = 2 path)
  ComplexBoundaryField trace;   // applied Dirichlet data e^{x·ζ/h − scale_log} e^{Φ}
  ComplexField interior;        // exact discrete solution with that trace
  double remainder_norm = 0.0;  // L²(Ω) of e^{−(x·ζ/h − scale_log)}·interior − e^{Φ}
  double scale_log = 0.0;       // subtracted exponent cap
  double cauchy_tail = 0.0;
  LinearReport solve_report;
};

/// member = 1 or 2 selects the pair element; for d >= 3 member 2 solves the
/// formal transpose operator with phase −Φ.
CGOSolution build_cgo(const ConformalFactor& c, const Grid& g, const ZetaPair& zp, int member,
                      const CGOOptions& opts = {});

struct FourierProbeRow {
  Vec xi;
  std::complex<double> probe;      // ∫ target v1 v2 dx'
  std::complex<double> reference;  // ∫ target e^{i x·ξ} dx'
  double remainder1 = 0.0, remainder2 = 0.0;
};

/// Probe ∫ target·v1·v2 per ξ (≈ Fourier coefficient of target as the pair
/// concentrates); ξ = 0 rows use the constant pair v ≡ 1.
std::vector<FourierProbeRow> fourier_probe(const ConformalFactor& c, const Grid& g,
                                           const ScalarField& target, const std::vector<Vec>& xis,
                                           double h, const CGOOptions& opts = {});

}  // namespace mse

#endif
