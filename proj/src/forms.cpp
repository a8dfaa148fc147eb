#include "akstab/forms.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "akstab/errors.hpp"

namespace akstab {

namespace {

constexpr int kCompCount[5] = {1, 4, 6, 4, 1};

// Basis index lists per rank, in the fixed component order.
constexpr int kBasis0[1][1] = {{0}};
constexpr int kBasis1[4][1] = {{0}, {1}, {2}, {3}};
constexpr int kBasis2[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
constexpr int kBasis3[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
constexpr int kBasis4[1][4] = {{0, 1, 2, 3}};

// Sign of the permutation taking (I, complement(I)) to (0,1,2,3), and the
// component index of the complement in rank 4-p. Filled by init_dual().
struct DualEntry {
  int dual_comp;
  double sign;
};

int permutation_sign(const int* perm, int len) {
  int s = 1;
  for (int i = 0; i < len; ++i)
    for (int j = i + 1; j < len; ++j)
      if (perm[i] > perm[j]) s = -s;
  return s;
}

std::array<std::array<DualEntry, 6>, 5> init_dual() {
  std::array<std::array<DualEntry, 6>, 5> table{};
  for (int rank = 0; rank <= 4; ++rank) {
    for (int c = 0; c < kCompCount[rank]; ++c) {
      const int* idx = form_basis_indices(rank, c);
      bool used[4] = {false, false, false, false};
      for (int i = 0; i < rank; ++i) used[idx[i]] = true;
      int full[4];
      int pos = 0;
      for (int i = 0; i < rank; ++i) full[pos++] = idx[i];
      int comp_axes[4];
      int cpos = 0;
      for (int a = 0; a < 4; ++a)
        if (!used[a]) {
          full[pos++] = a;
          comp_axes[cpos++] = a;
        }
      table[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)] = DualEntry{
          form_comp_index(4 - rank, comp_axes),
          static_cast<double>(permutation_sign(full, 4))};
    }
  }
  return table;
}

const std::array<std::array<DualEntry, 6>, 5>& dual_table() {
  static const auto table = init_dual();
  return table;
}

// Sign of dx_a ^ dx_I for sorted I not containing a: (-1)^(count of I < a).
int insert_sign(int axis, const int* idx, int rank) {
  int below = 0;
  for (int i = 0; i < rank; ++i)
    if (idx[i] < axis) ++below;
  return (below % 2 == 0) ? 1 : -1;
}

// Raised components psi^I at one point from the inverse metric gi and the
// lower components, via the Gram minors det(gi[I,J]).
template <int P>
void raise_components(const double gi[4][4], const double* lower, double* upper);

template <>
void raise_components<0>(const double[4][4], const double* lower, double* upper) {
  upper[0] = lower[0];
}

template <>
void raise_components<1>(const double gi[4][4], const double* lower, double* upper) {
  for (int a = 0; a < 4; ++a) {
    double s = 0;
    for (int b = 0; b < 4; ++b) s += gi[a][b] * lower[b];
    upper[a] = s;
  }
}

template <>
void raise_components<2>(const double gi[4][4], const double* lower, double* upper) {
  for (int ci = 0; ci < 6; ++ci) {
    const int* I = kBasis2[ci];
    double s = 0;
    for (int cj = 0; cj < 6; ++cj) {
      const int* J = kBasis2[cj];
      double minor = gi[I[0]][J[0]] * gi[I[1]][J[1]] - gi[I[0]][J[1]] * gi[I[1]][J[0]];
      s += minor * lower[cj];
    }
    upper[ci] = s;
  }
}

template <>
void raise_components<3>(const double gi[4][4], const double* lower, double* upper) {
  for (int ci = 0; ci < 4; ++ci) {
    const int* I = kBasis3[ci];
    double s = 0;
    for (int cj = 0; cj < 4; ++cj) {
      const int* J = kBasis3[cj];
      double m00 = gi[I[0]][J[0]], m01 = gi[I[0]][J[1]], m02 = gi[I[0]][J[2]];
      double m10 = gi[I[1]][J[0]], m11 = gi[I[1]][J[1]], m12 = gi[I[1]][J[2]];
      double m20 = gi[I[2]][J[0]], m21 = gi[I[2]][J[1]], m22 = gi[I[2]][J[2]];
      double minor = m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
                     m02 * (m10 * m21 - m11 * m20);
      s += minor * lower[cj];
    }
    upper[ci] = s;
  }
}

template <>
void raise_components<4>(const double gi[4][4], const double* lower, double* upper) {
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = gi[a][b];
  upper[0] = m.determinant() * lower[0];
}

void gather_inverse(const MetricField& g, std::size_t p, double gi[4][4]) {
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      double v = g.inv_comp(a, b)[p];
      gi[a][b] = v;
      gi[b][a] = v;
    }
}

template <int P>
void raise_all(const Form& form, const MetricField& g,
               std::vector<std::array<double, 6>>& upper) {
  const std::size_t total = form.grid().total();
  const int nc = form.component_count();
  upper.resize(total);
  for (std::size_t p = 0; p < total; ++p) {
    double gi[4][4];
    gather_inverse(g, p, gi);
    double lower[6];
    for (int c = 0; c < nc; ++c) lower[c] = form.comp(c)[p];
    raise_components<P>(gi, lower, upper[p].data());
  }
}

void check_metric_grid(const Form& form, const MetricField& g) {
  if (!(form.grid() == g.grid())) throw MetricError("grid mismatch between form and metric");
}

}  // namespace

int form_component_count(int rank) {
  if (rank < 0 || rank > 4) throw RankError("form rank out of range");
  return kCompCount[rank];
}

const int* form_basis_indices(int rank, int comp) {
  switch (rank) {
    case 0: return kBasis0[comp];
    case 1: return kBasis1[comp];
    case 2: return kBasis2[comp];
    case 3: return kBasis3[comp];
    case 4: return kBasis4[comp];
    default: throw RankError("form rank out of range");
  }
}

int form_comp_index(int rank, const int* sorted_axes) {
  for (int c = 0; c < kCompCount[rank]; ++c) {
    const int* idx = form_basis_indices(rank, c);
    bool match = true;
    for (int i = 0; i < rank; ++i)
      if (idx[i] != sorted_axes[i]) match = false;
    if (match) return c;
  }
  throw RankError("invalid axis list");
}

Form::Form(int rank, GridSpec grid) : rank_(rank), grid_(grid) {
  int nc = form_component_count(rank);
  comps_.reserve(static_cast<std::size_t>(nc));
  for (int i = 0; i < nc; ++i) comps_.emplace_back(grid);
}

Form Form::from_scalar(const ScalarField& f) {
  Form out(0, f.grid());
  out.comp(0) = f;
  return out;
}

Form Form::standard_symplectic(GridSpec grid) {
  Form out(2, grid);
  out.comp(0) = ScalarField(grid, 1.0);  // dx12
  out.comp(5) = ScalarField(grid, 1.0);  // dx34
  return out;
}

const ScalarField& Form::as_scalar() const {
  if (rank_ != 0) throw RankError("as_scalar requires rank 0");
  return comps_[0];
}

Form& Form::operator+=(const Form& o) {
  if (rank_ != o.rank_) throw RankError("rank mismatch");
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
  return *this;
}
Form& Form::operator-=(const Form& o) {
  if (rank_ != o.rank_) throw RankError("rank mismatch");
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= o.comps_[i];
  return *this;
}
Form& Form::operator*=(double c) {
  for (auto& f : comps_) f *= c;
  return *this;
}
Form& Form::add_scaled(const Form& o, double c) {
  if (rank_ != o.rank_) throw RankError("rank mismatch");
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i].add_scaled(o.comps_[i], c);
  return *this;
}

double Form::max_abs() const {
  double m = 0;
  for (const auto& f : comps_) m = std::max(m, f.max_abs());
  return m;
}

Form operator+(Form a, const Form& b) { return a += b; }
Form operator-(Form a, const Form& b) { return a -= b; }
Form operator*(double c, Form a) { return a *= c; }

EndomorphismField::EndomorphismField(GridSpec grid) : grid_(grid) {
  for (auto& f : c_) f = ScalarField(grid);
}

EndomorphismField EndomorphismField::constant(GridSpec grid,
                                              const std::array<double, 16>& m) {
  EndomorphismField out(grid);
  for (int i = 0; i < 16; ++i) out.c_[static_cast<std::size_t>(i)] = ScalarField(grid, m[static_cast<std::size_t>(i)]);
  return out;
}

double EndomorphismField::almost_complex_defect() const {
  const std::size_t total = grid_.total();
  double worst = 0;
  for (std::size_t p = 0; p < total; ++p) {
    double J[4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) J[a][b] = comp(a, b)[p];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double s = (a == b) ? 1.0 : 0.0;
        for (int c = 0; c < 4; ++c) s += J[a][c] * J[c][b];
        worst = std::max(worst, std::abs(s));
      }
  }
  return worst;
}

Form j_act_one_form(const EndomorphismField& J, const Form& alpha) {
  if (alpha.rank() != 1) throw RankError("j_act_one_form requires rank 1");
  Form out(1, alpha.grid());
  const std::size_t total = alpha.grid().total();
  for (int a = 0; a < 4; ++a) {
    ScalarField& oc = out.comp(a);
    for (int b = 0; b < 4; ++b) {
      const ScalarField& jc = J.comp(b, a);
      const ScalarField& ac = alpha.comp(b);
      for (std::size_t p = 0; p < total; ++p) oc[p] -= ac[p] * jc[p];
    }
  }
  return out;
}

int MetricField::sym_index(int a, int b) {
  if (a > b) std::swap(a, b);
  static constexpr int table[4][4] = {
      {0, 1, 2, 3}, {1, 4, 5, 6}, {2, 5, 7, 8}, {3, 6, 8, 9}};
  return table[a][b];
}

const ScalarField& MetricField::comp(int a, int b) const {
  return g_[static_cast<std::size_t>(sym_index(a, b))];
}
const ScalarField& MetricField::inv_comp(int a, int b) const {
  return ginv_[static_cast<std::size_t>(sym_index(a, b))];
}

MetricField MetricField::identity(GridSpec grid) {
  std::array<ScalarField, 10> comps;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b)
      comps[static_cast<std::size_t>(sym_index(a, b))] =
          ScalarField(grid, a == b ? 1.0 : 0.0);
  return from_components(grid, std::move(comps));
}

MetricField MetricField::from_components(GridSpec grid,
                                         std::array<ScalarField, 10> comps) {
  MetricField out;
  out.grid_ = grid;
  out.g_ = std::move(comps);
  for (auto& f : out.ginv_) f = ScalarField(grid);
  out.det_ = ScalarField(grid);
  out.sqrt_det_ = ScalarField(grid);
  const std::size_t total = grid.total();
  double min_minor = std::numeric_limits<double>::max();
  Eigen::Matrix4d m;
  for (std::size_t p = 0; p < total; ++p) {
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        double v = out.g_[static_cast<std::size_t>(sym_index(a, b))][p];
        m(a, b) = v;
        m(b, a) = v;
      }
    // Sylvester criterion via leading principal minors.
    double m1 = m(0, 0);
    double m2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    double m3 = m.topLeftCorner<3, 3>().determinant();
    double m4 = m.determinant();
    min_minor = std::min({min_minor, m1, m2, m3, m4});
    if (!(m4 > 0.0) || !(m1 > 0.0) || !(m2 > 0.0) || !(m3 > 0.0))
      throw MetricError("metric not positive definite");
    Eigen::Matrix4d inv = m.inverse();
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b)
        out.ginv_[static_cast<std::size_t>(sym_index(a, b))][p] = inv(a, b);
    out.det_[p] = m4;
    out.sqrt_det_[p] = std::sqrt(m4);
  }
  out.min_eig_ = min_minor;
  return out;
}

Form exterior_derivative(const ScalarField& f) {
  Form out(1, f.grid());
  auto grad = gradient(f);
  for (int a = 0; a < 4; ++a) out.comp(a) = std::move(grad[static_cast<std::size_t>(a)]);
  return out;
}

Form exterior_derivative(const Form& form) {
  const int p = form.rank();
  if (p >= 4) throw RankError("exterior derivative of a 4-form");
  if (p == 0) return exterior_derivative(form.as_scalar());
  Form out(p + 1, form.grid());
  for (int c = 0; c < form.component_count(); ++c) {
    const int* idx = form_basis_indices(p, c);
    bool used[4] = {false, false, false, false};
    for (int i = 0; i < p; ++i) used[idx[i]] = true;
    for (int a = 0; a < 4; ++a) {
      if (used[a]) continue;
      int target[5];
      int pos = 0;
      for (int i = 0; i < p && idx[i] < a; ++i) target[pos++] = idx[i];
      target[pos++] = a;
      for (int i = 0; i < p; ++i)
        if (idx[i] > a) target[pos++] = idx[i];
      int oc = form_comp_index(p + 1, target);
      double sgn = insert_sign(a, idx, p);
      out.comp(oc).add_scaled(spectral_derivative(form.comp(c), a + 1), sgn);
    }
  }
  return out;
}

Form wedge(const Form& a, const Form& b) {
  const int p = a.rank(), q = b.rank();
  if (p + q > 4) throw RankError("wedge rank overflow");
  if (!(a.grid() == b.grid())) throw RankError("grid mismatch");
  Form out(p + q, a.grid());
  for (int ca = 0; ca < a.component_count(); ++ca) {
    const int* ia = form_basis_indices(p, ca);
    for (int cb = 0; cb < b.component_count(); ++cb) {
      const int* ib = form_basis_indices(q, cb);
      bool used[4] = {false, false, false, false};
      for (int i = 0; i < p; ++i) used[ia[i]] = true;
      bool disjoint = true;
      for (int i = 0; i < q; ++i) {
        if (used[ib[i]]) disjoint = false;
        used[ib[i]] = true;
      }
      if (!disjoint) continue;
      int concat[4];
      int pos = 0;
      for (int i = 0; i < p; ++i) concat[pos++] = ia[i];
      for (int i = 0; i < q; ++i) concat[pos++] = ib[i];
      int sorted[4];
      std::copy(concat, concat + p + q, sorted);
      std::sort(sorted, sorted + p + q);
      int oc = form_comp_index(p + q, sorted);
      double sgn = permutation_sign(concat, p + q);
      const ScalarField& fa = a.comp(ca);
      const ScalarField& fb = b.comp(cb);
      ScalarField& fo = out.comp(oc);
      for (std::size_t i = 0; i < fa.size(); ++i) fo[i] += sgn * fa[i] * fb[i];
    }
  }
  return out;
}

Form hodge_star(const Form& form, const MetricField& g) {
  check_metric_grid(form, g);
  const int p = form.rank();
  const std::size_t total = form.grid().total();
  std::vector<std::array<double, 6>> upper;
  switch (p) {
    case 0: raise_all<0>(form, g, upper); break;
    case 1: raise_all<1>(form, g, upper); break;
    case 2: raise_all<2>(form, g, upper); break;
    case 3: raise_all<3>(form, g, upper); break;
    case 4: raise_all<4>(form, g, upper); break;
    default: throw RankError("bad rank");
  }
  const auto& duals = dual_table()[static_cast<std::size_t>(p)];
  Form out(4 - p, form.grid());
  const ScalarField& sq = g.sqrt_det();
  for (int c = 0; c < form.component_count(); ++c) {
    const DualEntry& d = duals[static_cast<std::size_t>(c)];
    ScalarField& oc = out.comp(d.dual_comp);
    for (std::size_t i = 0; i < total; ++i)
      oc[i] += d.sign * sq[i] * upper[i][static_cast<std::size_t>(c)];
  }
  return out;
}

Form codifferential(const Form& form, const MetricField& g) {
  if (form.rank() < 1) throw RankError("codifferential of a 0-form");
  Form s = hodge_star(form, g);
  Form ds = exterior_derivative(s);
  Form out = hodge_star(ds, g);
  out *= -1.0;
  return out;
}

Form laplacian(const Form& form, const MetricField& g) {
  const int p = form.rank();
  if (p == 0) {
    Form df = exterior_derivative(form);
    return codifferential(df, g);
  }
  if (p == 4) {
    Form cf = codifferential(form, g);
    return exterior_derivative(cf);
  }
  Form a = exterior_derivative(codifferential(form, g));
  Form b = codifferential(exterior_derivative(form), g);
  return a += b;
}

ScalarField laplacian(const ScalarField& f, const MetricField& g) {
  return codifferential(exterior_derivative(f), g).as_scalar();
}

ScalarField pointwise_inner(const Form& a, const Form& b, const MetricField& g) {
  if (a.rank() != b.rank()) throw RankError("rank mismatch in inner product");
  check_metric_grid(a, g);
  const std::size_t total = a.grid().total();
  std::vector<std::array<double, 6>> upper;
  switch (a.rank()) {
    case 0: raise_all<0>(a, g, upper); break;
    case 1: raise_all<1>(a, g, upper); break;
    case 2: raise_all<2>(a, g, upper); break;
    case 3: raise_all<3>(a, g, upper); break;
    case 4: raise_all<4>(a, g, upper); break;
    default: throw RankError("bad rank");
  }
  ScalarField out(a.grid());
  for (int c = 0; c < a.component_count(); ++c) {
    const ScalarField& bc = b.comp(c);
    for (std::size_t i = 0; i < total; ++i)
      out[i] += upper[i][static_cast<std::size_t>(c)] * bc[i];
  }
  return out;
}

double l2_inner(const Form& a, const Form& b, const MetricField& g) {
  ScalarField pw = pointwise_inner(a, b, g);
  return integrate(pw);
}

double l2_inner(const Form& a, const Form& b, const MetricField& g,
                const ScalarField& density) {
  ScalarField pw = pointwise_inner(a, b, g);
  return integrate(pw, density);
}

double l2_norm(const Form& a, const MetricField& g) {
  return std::sqrt(std::max(0.0, l2_inner(a, a, g)));
}

std::pair<Form, Form> j_split(const Form& psi, const EndomorphismField& J,
                              bool check_structure) {
  if (psi.rank() != 2) throw RankError("j_split requires rank 2");
  if (check_structure && J.almost_complex_defect() > 1e-10)
    throw StructureError("J is not an almost-complex structure");
  const std::size_t total = psi.grid().total();
  Form plus(2, psi.grid()), minus(2, psi.grid());
  for (std::size_t p = 0; p < total; ++p) {
    double Jm[4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) Jm[a][b] = J.comp(a, b)[p];
    double Psi[4][4] = {};
    for (int c = 0; c < 6; ++c) {
      const int* idx = kBasis2[c];
      double v = psi.comp(c)[p];
      Psi[idx[0]][idx[1]] = v;
      Psi[idx[1]][idx[0]] = -v;
    }
    // psi(J.,J.)_{ab} = J^c_a Psi_{cd} J^d_b
    for (int c = 0; c < 6; ++c) {
      const int* idx = kBasis2[c];
      int a = idx[0], b = idx[1];
      double s = 0;
      for (int cc = 0; cc < 4; ++cc)
        for (int dd = 0; dd < 4; ++dd) s += Jm[cc][a] * Psi[cc][dd] * Jm[dd][b];
      double v = Psi[a][b];
      plus.comp(c)[p] = 0.5 * (v + s);
      minus.comp(c)[p] = 0.5 * (v - s);
    }
  }
  return {std::move(plus), std::move(minus)};
}

Form j_anti_part(const Form& psi, const EndomorphismField& J, bool check_structure) {
  return j_split(psi, J, check_structure).second;
}

std::pair<ScalarField, Form> primitive_split(const Form& psi, const MetricField& g) {
  if (psi.rank() != 2) throw RankError("primitive_split requires rank 2");
  Form omega = Form::standard_symplectic(psi.grid());
  ScalarField lambda = pointwise_inner(psi, omega, g);
  lambda *= 0.5;
  Form psi0 = psi;
  for (int c = 0; c < 6; ++c) {
    const ScalarField& oc = omega.comp(c);
    ScalarField& pc = psi0.comp(c);
    for (std::size_t i = 0; i < lambda.size(); ++i) pc[i] -= lambda[i] * oc[i];
  }
  return {std::move(lambda), std::move(psi0)};
}

Form primitive_part(const Form& psi, const MetricField& g) {
  return primitive_split(psi, g).second;
}

Form metric_gram_apply(const Form& a, const MetricField& g) {
  check_metric_grid(a, g);
  const std::size_t total = a.grid().total();
  std::vector<std::array<double, 6>> upper;
  switch (a.rank()) {
    case 0: raise_all<0>(a, g, upper); break;
    case 1: raise_all<1>(a, g, upper); break;
    case 2: raise_all<2>(a, g, upper); break;
    case 3: raise_all<3>(a, g, upper); break;
    case 4: raise_all<4>(a, g, upper); break;
    default: throw RankError("bad rank");
  }
  Form out(a.rank(), a.grid());
  for (int c = 0; c < a.component_count(); ++c) {
    ScalarField& oc = out.comp(c);
    for (std::size_t i = 0; i < total; ++i) oc[i] = upper[i][static_cast<std::size_t>(c)];
  }
  return out;
}

}  // namespace akstab
