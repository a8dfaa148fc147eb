#ifndef AKSTAB_CURVATURE_HPP
#define AKSTAB_CURVATURE_HPP

#include <array>

#include "akstab/structures.hpp"

namespace akstab {

/// Christoffel symbols Gamma^c_{ab} of a metric, symmetric in (a,b),
/// assembled with spectral derivatives.
class ChristoffelField {
 public:
  ChristoffelField() = default;
  explicit ChristoffelField(const MetricField& g);

  const GridSpec& grid() const { return grid_; }
  const ScalarField& gamma(int c, int a, int b) const {
    return g_[static_cast<std::size_t>(10 * c + MetricField::sym_index(a, b))];
  }

 private:
  GridSpec grid_;
  std::array<ScalarField, 40> g_;
};

/// The canonical hermitian connection nabla_X Y = D^g_X Y - 1/2 J (D^g_X J) Y
/// of an almost-Kahler pair, as per-axis connection matrices
/// Theta_a = Gamma_a - 1/2 J (d_a J + [Gamma_a, J]).
class ConnectionField {
 public:
  explicit ConnectionField(const CompatibleStructure& s);

  const ChristoffelField& christoffels() const { return gamma_; }
  const EndomorphismField& theta(int axis) const {
    return theta_[static_cast<std::size_t>(axis)];
  }

  /// sup norm of the assembled nabla J (zero for the hermitian connection).
  double nabla_j_defect() const;
  /// sup norm of the assembled nabla g.
  double nabla_g_defect() const;

 private:
  const CompatibleStructure* s_ = nullptr;
  ChristoffelField gamma_;
  std::array<EndomorphismField, 4> theta_;
};

/// Hermitian Ricci form of (J,g): the omega-trace-normalized trace of the
/// curvature of the canonical hermitian connection against J. Closed, and a
/// representative of 2 pi c1 (zero pairing on the torus).
Form hermitian_ricci(const CompatibleStructure& s);

/// Hermitian scalar curvature via s * symplectic^2 = 4 (rho ^ symplectic).
ScalarField hermitian_scalar(const CompatibleStructure& s, const Form& symplectic);

/// Conformal-change oracle: -1/2 d(J dF) + rho_base. Matches hermitian_ricci
/// of the deformed structure whenever e^F is the top-form ratio of the two
/// symplectic forms compatible with the same J.
Form conformal_ricci_check(const CompatibleStructure& s, const ScalarField& F,
                           const Form& rho_base);

/// Riemannian scalar curvature from the Christoffel symbols; independent
/// cross-check for the Kahler case.
ScalarField riemannian_scalar(const MetricField& g);

struct CurvatureReport {
  double chern_pairing = 0;  // integral of rho ^ omega
  double s_integral = 0;     // integral of s against omega^2/2
  double d_rho_norm = 0;     // sup norm of d rho
};

CurvatureReport curvature_report(const CompatibleStructure& s);

}  // namespace akstab

#endif
