#ifndef AKSTAB_STRUCTURES_HPP
#define AKSTAB_STRUCTURES_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "akstab/forms.hpp"

namespace akstab {

/// An almost-complex structure J with a hermitian metric g. For structures
/// compatible with the standard symplectic form, g(.,.) = omega(.,J.); for
/// potential-deformed metrics the pair is compatible with omega_f instead,
/// and only J^2 = -Id, g(J.,J.) = g(.,.) and positivity are required.
class CompatibleStructure {
 public:
  CompatibleStructure() = default;

  /// Constant J0 with J0 e1 = e2, J0 e3 = e4; induced metric is the identity.
  static CompatibleStructure standard(GridSpec grid);

  /// Canonical retraction onto the omega-compatible structures: A = h^{-1}omega
  /// (i.e. omega(X,Y) = h(AX,Y)), J = A(-A^2)^{-1/2} through the symmetric
  /// positive square root, g = omega(.,J.). If h is already induced by a
  /// compatible J, that J is returned.
  static CompatibleStructure polar_compatible(const MetricField& h);

  /// Validates J and derives g = omega(.,J.).
  static CompatibleStructure omega_compatible(EndomorphismField J);

  /// General hermitian pair (used for deformed metrics g_f). Validates
  /// J^2 = -Id, g symmetric positive definite, and g(J.,J.) = g.
  static CompatibleStructure hermitian_pair(EndomorphismField J, MetricField g);

  const EndomorphismField& J() const { return J_; }
  const MetricField& g() const { return g_; }
  const GridSpec& grid() const { return grid_; }

  /// sup norm of omega(J.,J.) - omega over the grid.
  double omega_invariance_defect() const;

 private:
  GridSpec grid_;
  EndomorphismField J_;
  MetricField g_;
};

/// L-infinity norm of the Nijenhuis tensor
/// N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y] on coordinate frames.
/// Zero (up to tolerance) iff J is integrable.
double nijenhuis_norm(const CompatibleStructure& s);

/// One symmetric perturbation entry S_ij(x) = sum of amp * prod sin/cos(freq x_axis).
struct BumpTerm {
  struct Factor {
    int axis = 1;  // 1..4
    int freq = 1;
    bool is_sin = true;
  };
  double amp = 0.0;
  std::vector<Factor> factors;
};

struct BumpEntry {
  int i = 1, j = 1;  // 1..4, symmetric
  std::vector<BumpTerm> terms;
};

/// Path of compatible structures J_t obtained by retracting h_t = Id + t*S
/// onto the compatible structures. constant_linear uses a constant symmetric
/// S (stays Kahler); bump_metric uses a spatially varying S(x) (generally
/// non-integrable); user_file interpolates h_t = Id + (t/t_max)(g_J - Id)
/// toward the metric of a J loaded from an AKF4 file, so that evaluate(t_max)
/// reproduces the loaded structure.
class DeformationPath {
 public:
  enum class Kind { constant_linear, bump_metric, user_file };

  static DeformationPath constant_linear(const std::array<double, 16>& S, double t_max);
  static DeformationPath bump_metric(std::vector<BumpEntry> entries, double t_max);
  static DeformationPath user_file(MetricField target_metric, double t_max);

  /// The documented non-integrable acceptance path:
  /// S = 0.3 sin(x3) (e1 x e1 - e2 x e2).
  static DeformationPath standard_bump(double t_max);

  CompatibleStructure evaluate(GridSpec grid, double t) const;

  double t_max() const { return t_max_; }
  Kind kind() const { return kind_; }

 private:
  Kind kind_ = Kind::constant_linear;
  double t_max_ = 0.0;
  std::array<double, 16> S_const_{};
  std::vector<BumpEntry> entries_;
  MetricField target_;  // user_file only
};

}  // namespace akstab

#endif
