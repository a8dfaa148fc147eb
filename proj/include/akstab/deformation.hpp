#ifndef AKSTAB_DEFORMATION_HPP
#define AKSTAB_DEFORMATION_HPP

#include <optional>
#include <vector>

#include "akstab/elliptic.hpp"

namespace akstab {

/// One almost-Kahler potential deformation at parameter t:
///   psi_f solves P psi_f = (d J df)^{J,-} orthogonal to ker P,
///   alpha = J df - delta psi_f,  omega_f = omega + d alpha,
///   g_f(.,.) = omega_f(., J.),   e^F omega^2 = omega_f^2.
struct DeformationState {
  double t = 0;
  ScalarField f;
  Form psi_f;
  Form alpha;
  Form omega_f;
  MetricField g_f;
  ScalarField F;
  ScalarField s_def;
  /// sup norms recorded at construction: (d alpha)^{J,-} and e^F omega^2 - omega_f^2.
  double anti_invariant_defect = 0;
  double volume_defect = 0;
};

/// Hamiltonian functions spanning t_omega. Empty on the torus (no hamiltonian
/// circle actions); nonempty synthetic bases exercise the projection algebra.
class HamiltonianBasis {
 public:
  HamiltonianBasis() = default;
  explicit HamiltonianBasis(std::vector<ScalarField> xi) : xi_(std::move(xi)) {}

  bool empty() const { return xi_.empty(); }
  int size() const { return static_cast<int>(xi_.size()); }
  const std::vector<ScalarField>& functions() const { return xi_; }

  /// Gram-Schmidt orthonormalization against the given volume density.
  /// Throws DegenerateBasis when the normalized Gram determinant is < 1e-8.
  std::vector<ScalarField> orthonormalized(const ScalarField& density) const;

 private:
  std::vector<ScalarField> xi_;
};

/// (d J df)^{J,-}, the right-hand side of the potential equation.
Form hessian_anti(const ScalarField& f, const CompatibleStructure& s);

/// Independent route D^g_{(df)^sharp} omega assembled from the Christoffel
/// symbols; agrees with hessian_anti (identity of Section-4 type).
Form hessian_anti_connection_route(const ScalarField& f, const CompatibleStructure& s);

/// Builds the full deformation state; throws NotAPotential when g_f fails
/// pointwise positive definiteness (margin 1e-8) or the conformal factor
/// degenerates, and InvalidField when f is not zero-mean.
DeformationState build_state(double t, const ScalarField& f, const EllipticContext& ctx);

/// (equa-8 style) deformed hermitian scalar curvature
/// s = Lap_{g_f} F + g_f(rho_base, omega_f).
ScalarField deformed_scalar(const DeformationState& st, const Form& rho_base);

/// L2-orthogonal projection onto span(basis) under the volume density;
/// the empty basis projects to zero (torus specialization).
ScalarField project_T(const ScalarField& h, const HamiltonianBasis& basis,
                      const ScalarField& density);

/// The scalar component of the extremal residual map
/// Psi(t,f) = (Id - Pi_omega) (Id - Pi_{omega_f}) s_def, returned as a
/// zero-mean function with respect to omega^2/2. Zero iff (J_t, g_f) is
/// extremal.
ScalarField residual_psi(double t, const ScalarField& f, const EllipticContext& ctx,
                         const HamiltonianBasis& basis);

struct ExtremalReport {
  double calabi_energy = 0;   // integral of s^2 against omega_f^2/2
  double killing_defect = 0;  // sup |L_Z g_f| for omega_f(Z,.) = d s
  ScalarField z;              // projection of the zero-mean scalar curvature onto t_omega
  std::array<ScalarField, 4> extremal_field;  // Z^T with omega_f(Z^T,.) = dz
  std::vector<double> moment_pairings;        // integral of s * f' against omega_f^2/2
};

ExtremalReport extremal_diagnostics(const DeformationState& st, const EllipticContext& ctx,
                                    const HamiltonianBasis& basis,
                                    const std::vector<ScalarField>* test_functions = nullptr);

}  // namespace akstab

#endif
