#ifndef AKSTAB_SOLVER_HPP
#define AKSTAB_SOLVER_HPP

#include <string>
#include <vector>

#include "akstab/deformation.hpp"

namespace akstab {

struct ContinuationConfig {
  int n = 16;
  double t_max = 0.5;
  int steps = 10;
  double newton_tol = 1e-8;
  int max_newton_iters = 12;
  double fd_epsilon = 1e-5;
  double ker_tol = 1e-6;
  // inner Krylov controls
  int gmres_restart = 25;
  int gmres_max_iters = 60;
  double gmres_rel_tol = 1e-3;

  void validate() const;
};

/// The Lichnerowicz operator of the flat Kahler base point,
/// L(f) = -2 delta delta (D df)^{J,-}; the linearization of the extremal
/// residual at (0,0). On the flat base its Fourier symbol is -|k|^4.
ScalarField lichnerowicz(const ScalarField& f, const CompatibleStructure& base);

/// Mode-by-mode inverse of the numerically tabulated flat-base Lichnerowicz
/// symbol (zero mode excluded); the chord preconditioner for all Newton
/// steps.
class LichnerowiczPreconditioner {
 public:
  explicit LichnerowiczPreconditioner(GridSpec grid);
  ScalarField apply(const ScalarField& r) const;

 private:
  std::vector<double> inv_symbol_;
};

struct NewtonOutcome {
  ScalarField f;
  double residual_norm = 0;
  int iters = 0;
};

/// Jacobian-free Newton-Krylov corrector for residual_psi(t, .) = 0.
/// Directional derivatives by central finite differences; inner solves by
/// GMRES preconditioned with the flat-base Lichnerowicz inverse.
/// Throws Diverged when max_newton_iters is exceeded and NotAPotential when
/// backtracking cannot re-enter the admissible set.
NewtonOutcome newton_correct(double t, const ScalarField& f0, const EllipticContext& ctx,
                             const HamiltonianBasis& basis, const ContinuationConfig& cfg,
                             const LichnerowiczPreconditioner& precond);

struct StepRecord {
  double t = 0;
  ScalarField f_t;
  double residual_norm = 0;
  int newton_iters = 0;
  int h_minus = 0;
  double gap = 0;
  double killing_defect = 0;
  double calabi_energy = 0;
  std::string status;  // converged | kernel_jump | not_a_potential | diverged
};

struct ContinuationResult {
  std::vector<StepRecord> steps;
  std::string status = "converged";
  double h_minus_base = 0;
};

/// Steps t_k = k t_max/steps, rebuilding the elliptic context at each step
/// (warm-started kernel), monitoring h_minus against its t = 0 value, and
/// warm-starting Newton from the previous potential. Stops and reports on
/// kernel jumps; partial results are always returned.
ContinuationResult continue_path(const DeformationPath& path, const ContinuationConfig& cfg,
                                 const HamiltonianBasis& basis = {});

struct CrosscheckReport {
  double e1_residual = 0;  // s_e6 - g_f(rho_base, omega_f) - Lap_{g_f} F
  double e2_residual = 0;  // e^F - omega_f^2/omega^2
};

/// Verifies the extremality system pair on a converged state: the scalar
/// curvature equation against the independently assembled trace route, and
/// the volume-form equation for the conformal factor.
CrosscheckReport system_crosscheck(const DeformationState& st, const EllipticContext& ctx);

}  // namespace akstab

#endif
