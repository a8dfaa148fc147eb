#include "akstab/curvature.hpp"

#include <cmath>

#include "akstab/errors.hpp"

namespace akstab {

namespace {

// Top (dx1234) coefficient of the wedge of two 2-forms, pointwise.
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

struct EndoAtPoint {
  double m[4][4];
};

EndoAtPoint gather(const EndomorphismField& E, std::size_t p) {
  EndoAtPoint out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out.m[a][b] = E.comp(a, b)[p];
  return out;
}

}  // namespace

ChristoffelField::ChristoffelField(const MetricField& g) : grid_(g.grid()) {
  for (auto& f : g_) f = ScalarField(grid_);
  // dg[a][sym(b,d)] = d_a g_{bd}
  std::array<std::array<ScalarField, 10>, 4> dg;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int d = b; d < 4; ++d)
        dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(MetricField::sym_index(b, d))] =
            spectral_derivative(g.comp(b, d), a + 1);
  const std::size_t total = grid_.total();
  for (std::size_t p = 0; p < total; ++p) {
    double gi[4][4], D[4][4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        double v = g.inv_comp(a, b)[p];
        gi[a][b] = v;
        gi[b][a] = v;
      }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int d = 0; d < 4; ++d)
          D[a][b][d] =
              dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(MetricField::sym_index(b, d))][p];
    for (int c = 0; c < 4; ++c)
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
          double s = 0;
          for (int d = 0; d < 4; ++d) s += gi[c][d] * (D[a][b][d] + D[b][a][d] - D[d][a][b]);
          g_[static_cast<std::size_t>(10 * c + MetricField::sym_index(a, b))][p] = 0.5 * s;
        }
  }
}

ConnectionField::ConnectionField(const CompatibleStructure& s)
    : s_(&s), gamma_(s.g()) {
  const GridSpec grid = s.grid();
  const EndomorphismField& J = s.J();
  std::array<std::array<ScalarField, 16>, 4> dJ;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c)
      for (int b = 0; b < 4; ++b)
        dJ[static_cast<std::size_t>(a)][static_cast<std::size_t>(4 * c + b)] =
            spectral_derivative(J.comp(c, b), a + 1);
  for (auto& th : theta_) th = EndomorphismField(grid);
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p) {
    EndoAtPoint Jm = gather(J, p);
    for (int a = 0; a < 4; ++a) {
      double Ga[4][4], Da[4][4];
      for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b) {
          Ga[c][b] = gamma_.gamma(c, a, b)[p];
          Da[c][b] = dJ[static_cast<std::size_t>(a)][static_cast<std::size_t>(4 * c + b)][p];
        }
      // X = d_a J + [Gamma_a, J]; Theta_a = Gamma_a - 1/2 J X
      double X[4][4];
      for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b) {
          double comm = 0;
          for (int d = 0; d < 4; ++d) comm += Ga[c][d] * Jm.m[d][b] - Jm.m[c][d] * Ga[d][b];
          X[c][b] = Da[c][b] + comm;
        }
      for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b) {
          double jx = 0;
          for (int d = 0; d < 4; ++d) jx += Jm.m[c][d] * X[d][b];
          theta_[static_cast<std::size_t>(a)].comp(c, b)[p] = Ga[c][b] - 0.5 * jx;
        }
    }
  }
}

double ConnectionField::nabla_j_defect() const {
  const EndomorphismField& J = s_->J();
  double worst = 0;
  for (int a = 0; a < 4; ++a) {
    std::array<ScalarField, 16> dJ;
    for (int c = 0; c < 4; ++c)
      for (int b = 0; b < 4; ++b)
        dJ[static_cast<std::size_t>(4 * c + b)] = spectral_derivative(J.comp(c, b), a + 1);
    const std::size_t total = s_->grid().total();
    for (std::size_t p = 0; p < total; ++p) {
      EndoAtPoint Jm = gather(J, p);
      EndoAtPoint Th = gather(theta_[static_cast<std::size_t>(a)], p);
      for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b) {
          double v = dJ[static_cast<std::size_t>(4 * c + b)][p];
          for (int d = 0; d < 4; ++d)
            v += Th.m[c][d] * Jm.m[d][b] - Jm.m[c][d] * Th.m[d][b];
          worst = std::max(worst, std::abs(v));
        }
    }
  }
  return worst;
}

double ConnectionField::nabla_g_defect() const {
  const MetricField& g = s_->g();
  double worst = 0;
  for (int a = 0; a < 4; ++a) {
    std::array<ScalarField, 10> dg;
    for (int b = 0; b < 4; ++b)
      for (int c = b; c < 4; ++c)
        dg[static_cast<std::size_t>(MetricField::sym_index(b, c))] =
            spectral_derivative(g.comp(b, c), a + 1);
    const std::size_t total = s_->grid().total();
    for (std::size_t p = 0; p < total; ++p) {
      EndoAtPoint Th = gather(theta_[static_cast<std::size_t>(a)], p);
      double G[4][4];
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) G[b][c] = g.comp(b, c)[p];
      for (int b = 0; b < 4; ++b)
        for (int c = b; c < 4; ++c) {
          double v = dg[static_cast<std::size_t>(MetricField::sym_index(b, c))][p];
          for (int d = 0; d < 4; ++d) v -= Th.m[d][b] * G[d][c] + Th.m[d][c] * G[b][d];
          worst = std::max(worst, std::abs(v));
        }
    }
  }
  return worst;
}

Form hermitian_ricci(const CompatibleStructure& s) {
  ConnectionField conn(s);
  const GridSpec grid = s.grid();
  const EndomorphismField& J = s.J();
  // dTheta[a][b] = d_a Theta_b as 16 fields each
  std::array<std::array<std::array<ScalarField, 16>, 4>, 4> dTh;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d)
          dTh[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]
             [static_cast<std::size_t>(4 * c + d)] =
                 spectral_derivative(conn.theta(b).comp(c, d), a + 1);
  Form rho(2, grid);
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p) {
    EndoAtPoint Jm = gather(J, p);
    EndoAtPoint Th[4];
    for (int a = 0; a < 4; ++a) Th[a] = gather(conn.theta(a), p);
    int comp = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        // R_ab = d_a Theta_b - d_b Theta_a + [Theta_a, Theta_b]
        double tr = 0;  // tr(J R_ab)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) {
            double r = dTh[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]
                          [static_cast<std::size_t>(4 * c + d)][p] -
                       dTh[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]
                          [static_cast<std::size_t>(4 * c + d)][p];
            for (int e = 0; e < 4; ++e)
              r += Th[a].m[c][e] * Th[b].m[e][d] - Th[b].m[c][e] * Th[a].m[e][d];
            tr += Jm.m[d][c] * r;
          }
        // Trace normalization pinned by the conformal-change identity and the
        // Kahler comparison with the Riemannian scalar curvature.
        rho.comp(comp)[p] = 0.5 * tr;
        ++comp;
      }
  }
  return rho;
}

ScalarField hermitian_scalar(const CompatibleStructure& s, const Form& symplectic) {
  if (symplectic.rank() != 2) throw RankError("symplectic form must have rank 2");
  Form rho = hermitian_ricci(s);
  ScalarField top = wedge22_top(symplectic, symplectic);
  ScalarField num = wedge22_top(rho, symplectic);
  ScalarField out(s.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::abs(top[i]) < 1e-12) throw SymplecticError("degenerate symplectic form");
    out[i] = 4.0 * num[i] / top[i];
  }
  return out;
}

Form conformal_ricci_check(const CompatibleStructure& s, const ScalarField& F,
                           const Form& rho_base) {
  Form dF = exterior_derivative(F);
  Form JdF = j_act_one_form(s.J(), dF);
  Form out = exterior_derivative(JdF);
  out *= -0.5;
  out += rho_base;
  return out;
}

ScalarField riemannian_scalar(const MetricField& g) {
  ChristoffelField gam(g);
  const GridSpec grid = g.grid();
  // dGam[a][c][sym(b,d)] = d_a Gamma^c_{bd}
  std::array<std::array<std::array<ScalarField, 10>, 4>, 4> dG;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c)
      for (int b = 0; b < 4; ++b)
        for (int d = b; d < 4; ++d)
          dG[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)]
            [static_cast<std::size_t>(MetricField::sym_index(b, d))] =
                spectral_derivative(gam.gamma(c, b, d), a + 1);
  ScalarField out(grid);
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p) {
    double gi[4][4], G[4][4][4], D[4][4][4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        double v = g.inv_comp(a, b)[p];
        gi[a][b] = v;
        gi[b][a] = v;
      }
    for (int c = 0; c < 4; ++c)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) G[c][a][b] = gam.gamma(c, a, b)[p];
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b)
          for (int d = 0; d < 4; ++d)
            D[a][c][b][d] = dG[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)]
                              [static_cast<std::size_t>(MetricField::sym_index(b, d))][p];
    double s = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double ric = 0;
        for (int c = 0; c < 4; ++c) {
          ric += D[c][c][a][b] - D[a][c][c][b];
          for (int d = 0; d < 4; ++d)
            ric += G[c][c][d] * G[d][a][b] - G[c][a][d] * G[d][c][b];
        }
        s += gi[a][b] * ric;
      }
    out[p] = s;
  }
  return out;
}

CurvatureReport curvature_report(const CompatibleStructure& s) {
  Form rho = hermitian_ricci(s);
  Form omega = Form::standard_symplectic(s.grid());
  CurvatureReport rep;
  rep.chern_pairing = integrate(wedge22_top(rho, omega));
  ScalarField top = wedge22_top(omega, omega);
  ScalarField num = wedge22_top(rho, omega);
  ScalarField sfield(s.grid());
  for (std::size_t i = 0; i < sfield.size(); ++i) sfield[i] = 4.0 * num[i] / top[i];
  // with the standard omega the volume density omega^2/2 is 1
  rep.s_integral = integrate(sfield);
  rep.d_rho_norm = exterior_derivative(rho).max_abs();
  return rep;
}

}  // namespace akstab
