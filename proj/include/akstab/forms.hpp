#ifndef AKSTAB_FORMS_HPP
#define AKSTAB_FORMS_HPP

#include <array>
#include <utility>
#include <vector>

#include "akstab/grid.hpp"

namespace akstab {

/// Number of components of a rank-p form in dimension 4.
int form_component_count(int rank);

/// Fixed coordinate-basis ordering of the form components (0-based axes):
///   rank 1: (1),(2),(3),(4)
///   rank 2: (12),(13),(14),(23),(24),(34)
///   rank 3: (234),(134),(124),(123)
///   rank 4: (1234)
const int* form_basis_indices(int rank, int comp);

/// Index of the component with the given sorted axis list.
int form_comp_index(int rank, const int* sorted_axes);

/// Differential form of rank 0..4 with lower-index coefficient ScalarFields
/// in the fixed basis order. All metric raising happens inside hodge_star
/// and the inner products.
class Form {
 public:
  Form() = default;
  Form(int rank, GridSpec grid);

  static Form from_scalar(const ScalarField& f);
  /// omega = dx1^dx2 + dx3^dx4.
  static Form standard_symplectic(GridSpec grid);

  int rank() const { return rank_; }
  int component_count() const { return static_cast<int>(comps_.size()); }
  const GridSpec& grid() const { return grid_; }

  ScalarField& comp(int i) { return comps_[static_cast<std::size_t>(i)]; }
  const ScalarField& comp(int i) const { return comps_[static_cast<std::size_t>(i)]; }

  const ScalarField& as_scalar() const;

  Form& operator+=(const Form& o);
  Form& operator-=(const Form& o);
  Form& operator*=(double c);
  Form& add_scaled(const Form& o, double c);

  double max_abs() const;

 private:
  int rank_ = -1;
  GridSpec grid_;
  std::vector<ScalarField> comps_;
};

Form operator+(Form a, const Form& b);
Form operator-(Form a, const Form& b);
Form operator*(double c, Form a);

/// Pointwise endomorphism field A^a_b (16 ScalarFields, row-major in (a,b)).
/// Acts on vectors by (AX)^a = A^a_b X^b and on 1-forms by
/// (A alpha)(X) = -alpha(AX).
class EndomorphismField {
 public:
  EndomorphismField() = default;
  explicit EndomorphismField(GridSpec grid);
  static EndomorphismField constant(GridSpec grid, const std::array<double, 16>& m);

  const GridSpec& grid() const { return grid_; }
  ScalarField& comp(int a, int b) { return c_[static_cast<std::size_t>(4 * a + b)]; }
  const ScalarField& comp(int a, int b) const {
    return c_[static_cast<std::size_t>(4 * a + b)];
  }

  /// sup norm of A*A + Id; zero for almost-complex structures.
  double almost_complex_defect() const;

 private:
  GridSpec grid_;
  std::array<ScalarField, 16> c_;
};

/// J-action on a 1-form: (J alpha)(X) = -alpha(JX).
Form j_act_one_form(const EndomorphismField& J, const Form& alpha);

/// Symmetric metric tensor g_ab as 10 ScalarFields with cached pointwise
/// inverse, determinant and sqrt(det). Construction validates symmetry and
/// pointwise positive definiteness.
class MetricField {
 public:
  MetricField() = default;
  static MetricField identity(GridSpec grid);
  /// comps ordered (11),(12),(13),(14),(22),(23),(24),(33),(34),(44).
  static MetricField from_components(GridSpec grid, std::array<ScalarField, 10> comps);

  const GridSpec& grid() const { return grid_; }
  const ScalarField& comp(int a, int b) const;
  const ScalarField& inv_comp(int a, int b) const;
  const ScalarField& det() const { return det_; }
  const ScalarField& sqrt_det() const { return sqrt_det_; }
  double min_eigenvalue() const { return min_eig_; }

  static int sym_index(int a, int b);

 private:
  GridSpec grid_;
  std::array<ScalarField, 10> g_;
  std::array<ScalarField, 10> ginv_;
  ScalarField det_, sqrt_det_;
  double min_eig_ = 0.0;
};

/// d: rank p -> p+1 (p <= 3), coordinate formula with spectral derivatives.
Form exterior_derivative(const Form& form);
Form exterior_derivative(const ScalarField& f);

/// Graded-antisymmetric pointwise product, p+q <= 4.
Form wedge(const Form& a, const Form& b);

/// Hodge star for the orientation dx1234 > 0: psi1 ^ (*psi2) = g(psi1,psi2) vol_g.
Form hodge_star(const Form& form, const MetricField& g);

/// delta = -*d* on every rank >= 1 (4-dimensional convention).
Form codifferential(const Form& form, const MetricField& g);

/// Hodge Laplacian dd* + d*d with nonnegative spectrum; on functions
/// laplacian(f) = delta d f.
Form laplacian(const Form& form, const MetricField& g);
ScalarField laplacian(const ScalarField& f, const MetricField& g);

/// Pointwise inner product of two rank-p forms, normalized so that
/// g(omega,omega) = 2 for compatible metrics.
ScalarField pointwise_inner(const Form& a, const Form& b, const MetricField& g);

/// integral of g(a,b) against the volume density (default: omega^2/2 = flat).
double l2_inner(const Form& a, const Form& b, const MetricField& g);
double l2_inner(const Form& a, const Form& b, const MetricField& g,
                const ScalarField& density);
double l2_norm(const Form& a, const MetricField& g);

/// (psi^{J,+}, psi^{J,-}) with psi^{J,+-}(.,.) = (psi(.,.) +- psi(J.,J.))/2.
/// check_structure validates J^2 = -Id first (skippable in inner loops that
/// already hold a validated structure).
std::pair<Form, Form> j_split(const Form& psi, const EndomorphismField& J,
                              bool check_structure = true);
Form j_anti_part(const Form& psi, const EndomorphismField& J,
                 bool check_structure = true);

/// (lambda, psi0) with psi = lambda*omega + psi0 and g(psi0, omega) = 0
/// pointwise; lambda = g(psi, omega)/2.
std::pair<ScalarField, Form> primitive_split(const Form& psi, const MetricField& g);

/// psi - (g(psi,omega)/2) omega.
Form primitive_part(const Form& psi, const MetricField& g);

/// Pointwise Gram application on rank-p forms: raises both index groups with
/// g and reinterprets the result as lower components, so that
/// l2_inner(a,b,g) equals the flat pairing of metric_gram_apply(a,g) with b.
Form metric_gram_apply(const Form& a, const MetricField& g);

}  // namespace akstab

#endif
