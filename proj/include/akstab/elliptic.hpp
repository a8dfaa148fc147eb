#ifndef AKSTAB_ELLIPTIC_HPP
#define AKSTAB_ELLIPTIC_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "akstab/curvature.hpp"
#include "akstab/structures.hpp"

namespace akstab {

/// Options for kernel_detect. tol separates "kernel" from "small eigenvalue";
/// the detected spectral gap is reported so callers can judge adequacy.
struct KernelOptions {
  double tol = 1e-6;
  int block = 8;  // subspace dimension, at most 12 eigenpairs retained
  int max_outer = 40;
  double shift = 0.08;   // sigma in the shifted inner solves
  double coarse_residual = 1e-4;
  double cg_tol = 1e-10;
  std::uint64_t seed = 0x616b7374ull;
  const std::vector<Form>* warm_start = nullptr;
};

/// Discretized operator P for one structure with its numerically detected
/// kernel and deflation data. Immutable once built; safe to share across
/// threads and to use for concurrent green_solve calls.
class EllipticContext {
 public:
  const CompatibleStructure& structure() const { return s_; }
  const GridSpec& grid() const { return s_.grid(); }
  /// Hermitian Ricci form of the structure (cached; the deformation module
  /// evaluates (equa-style) scalar curvature formulas against it).
  const Form& rho_base() const { return rho_base_; }

  int dim_kernel() const { return static_cast<int>(kernel_.size()); }
  int h_minus() const { return h_minus_; }
  double gap() const { return gap_; }
  double tol() const { return tol_; }

  /// L2_g-orthonormal kernel basis: anti-self-dual class first, then the
  /// J-anti-invariant class.
  const std::vector<Form>& kernel_basis() const { return kernel_; }
  const std::vector<double>& kernel_eigenvalues() const { return kernel_eigs_; }
  /// The J-anti-invariant kernel class (used for Green-operator deflation).
  const std::vector<Form>& kernel_anti() const { return kernel_anti_; }
  /// All retained Ritz values from the coarse eigensolve, ascending.
  const std::vector<double>& ritz_values() const { return ritz_; }
  /// Smallest ratio min(|k+|,|k-|)/|k| over the detected kernel before
  /// reclassification; near 1/2 signals invariant/anti-invariant mixing.
  double classification_margin() const { return classification_margin_; }

  friend EllipticContext kernel_detect(const CompatibleStructure&, const KernelOptions&);

 private:
  CompatibleStructure s_;
  Form rho_base_;
  std::vector<Form> kernel_;
  std::vector<double> kernel_eigs_;
  std::vector<Form> kernel_anti_;
  std::vector<double> ritz_;
  int h_minus_ = 0;
  double gap_ = 0;
  double tol_ = 0;
  double classification_margin_ = 1.0;
};

/// P psi = 1/2 Lap psi - 1/4 g(Lap psi, omega) omega on primitive 2-forms.
/// Throws PrimitivityError if g(psi,omega) is not pointwise zero (1e-8).
Form apply_P(const Form& psi, const CompatibleStructure& s);
Form apply_P(const Form& psi, const EllipticContext& ctx);

/// Restriction of P to J-anti-invariant forms: (d delta psi)^{J,-}.
Form apply_P_anti(const Form& psi, const CompatibleStructure& s);

/// g-harmonic representatives of the six constant 2-form cohomology classes,
/// in the fixed 2-form component order. Computed by Poisson solves
/// Lap alpha = -delta(e_I), kappa_I = e_I + d alpha.
std::array<Form, 6> harmonic_two_form_basis(const CompatibleStructure& s,
                                            double cg_tol = 1e-12);

/// Detects ker(P) by block inverse iteration with shifted CG inner solves and
/// Rayleigh-Ritz extraction, refines the detected kernel vectors to their
/// g-harmonic representatives, classifies them into anti-self-dual vs
/// J-anti-invariant, and reports h_minus and the spectral gap.
/// Throws AmbiguousKernel when the gap is below 10*tol or when the coarse
/// detection and the harmonic refinement disagree.
EllipticContext kernel_detect(const CompatibleStructure& s,
                              const KernelOptions& opts = {});

/// Solves P psi = rhs_perp (rhs with its kernel component removed) for the
/// unique psi orthogonal to ker(P), by deflated preconditioned CG on the
/// J-anti-invariant forms. rhs must be J-anti-invariant (1e-8).
Form green_solve(const Form& rhs, const EllipticContext& ctx, double rel_tol = 1e-11);

}  // namespace akstab

#endif
