#include "akstab/deformation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "akstab/errors.hpp"

namespace akstab {

namespace {

ScalarField wedge22_top(const Form& a, const Form& b) {
  ScalarField out(a.grid());
  const ScalarField &a12 = a.comp(0), &a13 = a.comp(1), &a14 = a.comp(2);
  const ScalarField &a23 = a.comp(3), &a24 = a.comp(4), &a34 = a.comp(5);
  const ScalarField &b12 = b.comp(0), &b13 = b.comp(1), &b14 = b.comp(2);
  const ScalarField &b23 = b.comp(3), &b24 = b.comp(4), &b34 = b.comp(5);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a12[i] * b34[i] - a13[i] * b24[i] + a14[i] * b23[i] + a34[i] * b12[i] -
             a24[i] * b13[i] + a23[i] * b14[i];
  return out;
}

void check_zero_mean(const ScalarField& f) {
  double vol = integrate(ScalarField(f.grid(), 1.0));
  double mean = integrate(f) / vol;
  if (std::abs(mean) > 1e-10 * std::max(1.0, f.max_abs()))
    throw InvalidField("potential f must have zero mean");
}

/// Pointwise solve of omega_f(Z, .) = beta for the vector field Z.
std::array<ScalarField, 4> symplectic_gradient(const Form& omega_f, const Form& beta) {
  const GridSpec grid = omega_f.grid();
  std::array<ScalarField, 4> Z;
  for (auto& z : Z) z = ScalarField(grid);
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p) {
    Eigen::Matrix4d Om = Eigen::Matrix4d::Zero();
    for (int c = 0; c < 6; ++c) {
      const int* idx = form_basis_indices(2, c);
      double v = omega_f.comp(c)[p];
      Om(idx[0], idx[1]) = v;
      Om(idx[1], idx[0]) = -v;
    }
    Eigen::Vector4d rhs;
    for (int a = 0; a < 4; ++a) rhs(a) = beta.comp(a)[p];
    // omega_f(Z, e_b) = Z^a (Om)_{ab}
    Eigen::Vector4d z = Om.transpose().fullPivLu().solve(rhs);
    for (int a = 0; a < 4; ++a) Z[static_cast<std::size_t>(a)][p] = z(a);
  }
  return Z;
}

double lie_derivative_metric_sup(const std::array<ScalarField, 4>& Z,
                                 const MetricField& g) {
  const GridSpec grid = g.grid();
  // dZ[a][c] = d_a Z^c, dg[a][sym(b,c)] = d_a g_{bc}
  std::array<std::array<ScalarField, 4>, 4> dZ;
  std::array<std::array<ScalarField, 10>, 4> dg;
  for (int a = 0; a < 4; ++a) {
    for (int c = 0; c < 4; ++c)
      dZ[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] =
          spectral_derivative(Z[static_cast<std::size_t>(c)], a + 1);
    for (int b = 0; b < 4; ++b)
      for (int c = b; c < 4; ++c)
        dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(MetricField::sym_index(b, c))] =
            spectral_derivative(g.comp(b, c), a + 1);
  }
  double worst = 0;
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p) {
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        double v = 0;
        for (int c = 0; c < 4; ++c) {
          v += Z[static_cast<std::size_t>(c)][p] *
               dg[static_cast<std::size_t>(c)][static_cast<std::size_t>(MetricField::sym_index(a, b))][p];
          v += g.comp(c, b)[p] * dZ[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)][p];
          v += g.comp(a, c)[p] * dZ[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)][p];
        }
        worst = std::max(worst, std::abs(v));
      }
  }
  return worst;
}

}  // namespace

std::vector<ScalarField> HamiltonianBasis::orthonormalized(
    const ScalarField& density) const {
  const int m = size();
  std::vector<ScalarField> out;
  if (m == 0) return out;
  Eigen::MatrixXd G(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      G(i, j) = integrate(xi_[static_cast<std::size_t>(i)] * xi_[static_cast<std::size_t>(j)],
                          density);
  Eigen::VectorXd d = G.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd Gn = d.asDiagonal() * G * d.asDiagonal();
  if (std::abs(Gn.determinant()) < 1e-8)
    throw DegenerateBasis("hamiltonian basis Gram matrix is numerically singular");
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw DegenerateBasis("hamiltonian basis Gram matrix is not positive definite");
  // xi_tilde = Xi * L^{-T} gives an orthonormal family
  Eigen::MatrixXd Linv = Eigen::MatrixXd(llt.matrixL()).inverse();
  out.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    ScalarField v(xi_[0].grid());
    for (int j = 0; j < m; ++j) v.add_scaled(xi_[static_cast<std::size_t>(j)], Linv(i, j));
    out.push_back(std::move(v));
  }
  return out;
}

Form hessian_anti(const ScalarField& f, const CompatibleStructure& s) {
  Form df = exterior_derivative(f);
  Form jdf = j_act_one_form(s.J(), df);
  Form djdf = exterior_derivative(jdf);
  return j_anti_part(djdf, s.J(), false);
}

Form hessian_anti_connection_route(const ScalarField& f, const CompatibleStructure& s) {
  const GridSpec grid = f.grid();
  const MetricField& g = s.g();
  ChristoffelField gam(g);
  auto df = gradient(f);
  // V = (df)^sharp
  std::array<ScalarField, 4> V;
  for (auto& v : V) v = ScalarField(grid);
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p)
    for (int a = 0; a < 4; ++a) {
      double v = 0;
      for (int b = 0; b < 4; ++b) v += g.inv_comp(a, b)[p] * df[static_cast<std::size_t>(b)][p];
      V[static_cast<std::size_t>(a)][p] = v;
    }
  // (D_V omega)_{ab} = -V^c (Gamma^d_{ca} Om_{db} + Gamma^d_{cb} Om_{ad}), Om constant
  double Om[4][4] = {};
  Om[0][1] = 1;
  Om[1][0] = -1;
  Om[2][3] = 1;
  Om[3][2] = -1;
  Form out(2, grid);
  for (std::size_t p = 0; p < total; ++p) {
    for (int comp = 0; comp < 6; ++comp) {
      const int* idx = form_basis_indices(2, comp);
      int a = idx[0], b = idx[1];
      double v = 0;
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
          v -= V[static_cast<std::size_t>(c)][p] *
               (gam.gamma(d, c, a)[p] * Om[d][b] + gam.gamma(d, c, b)[p] * Om[a][d]);
      out.comp(comp)[p] = v;
    }
  }
  return out;
}

DeformationState build_state(double t, const ScalarField& f, const EllipticContext& ctx) {
  const CompatibleStructure& s = ctx.structure();
  const GridSpec grid = ctx.grid();
  check_zero_mean(f);

  DeformationState st;
  st.t = t;
  st.f = f;

  Form rhs = hessian_anti(f, s);
  st.psi_f = green_solve(rhs, ctx);
  Form df = exterior_derivative(f);
  st.alpha = j_act_one_form(s.J(), df);
  st.alpha -= codifferential(st.psi_f, s.g());

  Form dalpha = exterior_derivative(st.alpha);
  st.anti_invariant_defect = j_anti_part(dalpha, s.J(), false).max_abs();
  Form omega = Form::standard_symplectic(grid);
  st.omega_f = omega + dalpha;

  // g_f(X,Y) = omega_f(X, JY); symmetric because (d alpha)^{J,-} vanishes
  std::array<ScalarField, 10> comps;
  for (auto& c : comps) c = ScalarField(grid);
  const std::size_t total = grid.total();
  double min_minor = std::numeric_limits<double>::max();
  for (std::size_t p = 0; p < total; ++p) {
    Eigen::Matrix4d Om = Eigen::Matrix4d::Zero();
    for (int c = 0; c < 6; ++c) {
      const int* idx = form_basis_indices(2, c);
      double v = st.omega_f.comp(c)[p];
      Om(idx[0], idx[1]) = v;
      Om(idx[1], idx[0]) = -v;
    }
    Eigen::Matrix4d Jm;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) Jm(a, b) = s.J().comp(a, b)[p];
    Eigen::Matrix4d G = Om * Jm;
    G = (0.5 * (G + G.transpose())).eval();
    double m1 = G(0, 0);
    double m2 = G.topLeftCorner<2, 2>().determinant();
    double m3 = G.topLeftCorner<3, 3>().determinant();
    double m4 = G.determinant();
    min_minor = std::min({min_minor, m1, m2, m3, m4});
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b)
        comps[static_cast<std::size_t>(MetricField::sym_index(a, b))][p] = G(a, b);
  }
  if (min_minor <= 1e-8)
    throw NotAPotential("deformed metric loses positive definiteness");
  st.g_f = MetricField::from_components(grid, std::move(comps));

  // conformal factor from the closed form; the top-form identity pins it
  ScalarField pairing = pointwise_inner(dalpha, omega, s.g());
  ScalarField norm2 = pointwise_inner(dalpha, dalpha, s.g());
  st.F = ScalarField(grid);
  for (std::size_t p = 0; p < total; ++p) {
    double arg = 0.5 * ((1.0 + pairing[p]) * (1.0 + pairing[p]) + 1.0 - norm2[p]);
    if (!(arg > 1e-10)) throw NotAPotential("conformal factor argument nonpositive");
    st.F[p] = std::log(arg);
  }
  ScalarField top = wedge22_top(st.omega_f, st.omega_f);
  double vol_defect = 0;
  for (std::size_t p = 0; p < total; ++p)
    vol_defect = std::max(vol_defect, std::abs(2.0 * std::exp(st.F[p]) - top[p]));
  st.volume_defect = vol_defect;
  if (vol_defect > 1e-6)
    throw NotAPotential("e^F omega^2 = omega_f^2 violated beyond tolerance");

  st.s_def = deformed_scalar(st, ctx.rho_base());
  return st;
}

ScalarField deformed_scalar(const DeformationState& st, const Form& rho_base) {
  ScalarField lapF = laplacian(st.F, st.g_f);
  ScalarField pairing = pointwise_inner(rho_base, st.omega_f, st.g_f);
  return lapF + pairing;
}

ScalarField project_T(const ScalarField& h, const HamiltonianBasis& basis,
                      const ScalarField& density) {
  ScalarField out(h.grid());
  if (basis.empty()) return out;
  std::vector<ScalarField> xi = basis.orthonormalized(density);
  for (const ScalarField& x : xi) out.add_scaled(x, integrate(h * x, density));
  return out;
}

ScalarField residual_psi(double t, const ScalarField& f, const EllipticContext& ctx,
                         const HamiltonianBasis& basis) {
  DeformationState st = build_state(t, f, ctx);
  ScalarField density_f = pointwise(st.F, [](double v) { return std::exp(v); });
  ScalarField s0 = zero_mean_project(st.s_def, density_f);
  ScalarField v1 = s0 - project_T(s0, basis, density_f);
  ScalarField ones(f.grid(), 1.0);
  ScalarField v2 = v1 - project_T(v1, basis, ones);
  return zero_mean_project(v2);
}

ExtremalReport extremal_diagnostics(const DeformationState& st, const EllipticContext& ctx,
                                    const HamiltonianBasis& basis,
                                    const std::vector<ScalarField>* test_functions) {
  (void)ctx;
  ExtremalReport rep;
  ScalarField density_f = pointwise(st.F, [](double v) { return std::exp(v); });
  rep.calabi_energy = integrate(st.s_def * st.s_def, density_f);
  ScalarField s0 = zero_mean_project(st.s_def, density_f);
  rep.z = project_T(s0, basis, density_f);

  // Killing criterion for grad_{omega_f} of the scalar curvature (the
  // extremality test); the extremal field uses the projected potential z.
  Form ds0 = exterior_derivative(s0);
  auto Zs = symplectic_gradient(st.omega_f, ds0);
  rep.killing_defect = lie_derivative_metric_sup(Zs, st.g_f);
  Form dz = exterior_derivative(rep.z);
  rep.extremal_field = symplectic_gradient(st.omega_f, dz);

  if (test_functions)
    for (const ScalarField& fp : *test_functions)
      rep.moment_pairings.push_back(integrate(st.s_def * fp, density_f));
  return rep;
}

}  // namespace akstab
