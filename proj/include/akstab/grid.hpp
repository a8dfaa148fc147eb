#ifndef AKSTAB_GRID_HPP
#define AKSTAB_GRID_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "akstab/errors.hpp"

namespace akstab {

/// Periodic grid on the 4-torus [0,2pi)^4 with n points per axis.
///
/// Grid points are x_a(i) = 2*pi*i/n. n must be even and >= 8 so that the
/// low-frequency modes used throughout are exactly representable and the
/// Nyquist convention is unambiguous.
struct GridSpec {
  int n = 0;

  static GridSpec checked(int n);

  std::size_t total() const {
    auto m = static_cast<std::size_t>(n);
    return m * m * m * m;
  }
  double spacing() const;
  double coord(int i) const;
  /// Quadrature weight of one grid point, (2pi/n)^4.
  double cell_volume() const;

  bool operator==(const GridSpec&) const = default;
};

/// Real-valued function sampled on a GridSpec, indexed (i1,i2,i3,i4) with
/// i1 slowest and i4 fastest.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridSpec grid, double fill = 0.0)
      : grid_(grid), values_(grid.total(), fill) {}

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double& at(int i1, int i2, int i3, int i4) {
    const std::size_t n = static_cast<std::size_t>(grid_.n);
    return values_[((static_cast<std::size_t>(i1) * n + i2) * n + i3) * n + i4];
  }
  double at(int i1, int i2, int i3, int i4) const {
    const std::size_t n = static_cast<std::size_t>(grid_.n);
    return values_[((static_cast<std::size_t>(i1) * n + i2) * n + i3) * n + i4];
  }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  /// Pointwise product.
  ScalarField& operator*=(const ScalarField& o);
  ScalarField& operator*=(double c);
  ScalarField& add_scaled(const ScalarField& o, double c);

  bool all_finite() const;
  double max_abs() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator*(double c, ScalarField a);

/// Samples f(x1,x2,x3,x4) at the grid points.
ScalarField sample(GridSpec grid,
                   const std::function<double(double, double, double, double)>& f);

ScalarField pointwise(const ScalarField& a, const std::function<double(double)>& f);

/// Exact spectral derivative along axis (1-based, 1..4) for band-limited
/// fields. The Nyquist mode's derivative coefficient is set to zero so that
/// derivatives of real fields stay real.
ScalarField spectral_derivative(const ScalarField& field, int axis);

/// All four partial derivatives of one field.
std::array<ScalarField, 4> gradient(const ScalarField& field);

/// (2pi/n)^4 * sum(field * density); spectral-exact quadrature on the
/// periodic grid. density must be positive pointwise.
double integrate(const ScalarField& field, const ScalarField& density);
/// Same with density == 1.
double integrate(const ScalarField& field);

double l2_inner(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& a);

/// field minus its density-weighted mean; the result integrates to zero
/// against density.
ScalarField zero_mean_project(const ScalarField& field, const ScalarField& density);
ScalarField zero_mean_project(const ScalarField& field);

/// Sum over Fourier modes of |coefficient|^2 times torus volume; equals
/// integrate(f*f) by Parseval.
double parseval_sum(const ScalarField& field);

/// Deterministic band-limited field: random coefficients on modes with
/// |k_a| <= max_freq, zero mean, seeded. Used for solver start vectors and
/// property tests.
ScalarField random_band_limited(GridSpec grid, int max_freq, std::uint64_t seed,
                                double amplitude = 1.0);

/// |k|^2 for every grid mode, in the layout used by apply_fourier_multiplier.
std::vector<double> fourier_k2_table(GridSpec grid);

/// Applies a real diagonal Fourier multiplier: f -> IFFT(mult .* FFT(f)).
/// mult is indexed like fourier_k2_table.
ScalarField apply_fourier_multiplier(const ScalarField& field,
                                     const std::vector<double>& mult);

/// Real parts of the Fourier coefficients c_k (f = sum c_k e^{ikx}), indexed
/// like fourier_k2_table. Used to tabulate symbols of constant-coefficient
/// operators.
std::vector<double> fourier_coefficients_real(const ScalarField& field);

}  // namespace akstab

#endif
