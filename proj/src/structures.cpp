#include "akstab/structures.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "akstab/errors.hpp"

namespace akstab {

namespace {

Eigen::Matrix4d omega_matrix() {
  Eigen::Matrix4d O = Eigen::Matrix4d::Zero();
  O(0, 1) = 1;
  O(1, 0) = -1;
  O(2, 3) = 1;
  O(3, 2) = -1;
  return O;
}

constexpr std::array<double, 16> kStandardJ = {0, -1, 0, 0,   //
                                               1, 0, 0, 0,    //
                                               0, 0, 0, -1,   //
                                               0, 0, 1, 0};

Eigen::Matrix4d gather_endo(const EndomorphismField& J, std::size_t p) {
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = J.comp(a, b)[p];
  return m;
}

Eigen::Matrix4d gather_sym(const MetricField& g, std::size_t p) {
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      double v = g.comp(a, b)[p];
      m(a, b) = v;
      m(b, a) = v;
    }
  return m;
}

/// g = Omega * J componentwise; g_{ab} = Omega_{ac} J^c_b.
MetricField induced_metric(const EndomorphismField& J) {
  const GridSpec grid = J.grid();
  const Eigen::Matrix4d O = omega_matrix();
  std::array<ScalarField, 10> comps;
  for (auto& f : comps) f = ScalarField(grid);
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p) {
    Eigen::Matrix4d Jm = gather_endo(J, p);
    Eigen::Matrix4d G = O * Jm;
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b)
        comps[static_cast<std::size_t>(MetricField::sym_index(a, b))][p] = G(a, b);
  }
  return MetricField::from_components(grid, std::move(comps));
}

}  // namespace

CompatibleStructure CompatibleStructure::standard(GridSpec grid) {
  return omega_compatible(EndomorphismField::constant(grid, kStandardJ));
}

CompatibleStructure CompatibleStructure::omega_compatible(EndomorphismField J) {
  if (J.almost_complex_defect() > 1e-10)
    throw StructureError("J^2 + Id exceeds tolerance");
  CompatibleStructure out;
  out.grid_ = J.grid();
  out.g_ = induced_metric(J);
  out.J_ = std::move(J);
  if (out.omega_invariance_defect() > 1e-10)
    throw StructureError("omega(J.,J.) != omega");
  return out;
}

CompatibleStructure CompatibleStructure::hermitian_pair(EndomorphismField J,
                                                        MetricField g) {
  if (J.almost_complex_defect() > 1e-10)
    throw StructureError("J^2 + Id exceeds tolerance");
  const std::size_t total = J.grid().total();
  double worst = 0;
  for (std::size_t p = 0; p < total; ++p) {
    Eigen::Matrix4d Jm = gather_endo(J, p);
    Eigen::Matrix4d G = gather_sym(g, p);
    worst = std::max(worst, (Jm.transpose() * G * Jm - G).cwiseAbs().maxCoeff());
  }
  if (worst > 1e-8) throw StructureError("g is not J-hermitian");
  CompatibleStructure out;
  out.grid_ = J.grid();
  out.J_ = std::move(J);
  out.g_ = std::move(g);
  return out;
}

CompatibleStructure CompatibleStructure::polar_compatible(const MetricField& h) {
  const GridSpec grid = h.grid();
  const Eigen::Matrix4d O = omega_matrix();
  EndomorphismField J(grid);
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p) {
    Eigen::Matrix4d H = gather_sym(h, p);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eh(H);
    if (eh.info() != Eigen::Success) throw MetricError("eigensolver failed on h");
    Eigen::Vector4d ev = eh.eigenvalues();
    if (ev.minCoeff() <= 0) throw MetricError("h not positive definite");
    Eigen::Matrix4d Hhalf =
        eh.eigenvectors() * ev.cwiseSqrt().asDiagonal() * eh.eigenvectors().transpose();
    Eigen::Matrix4d Hinvhalf = eh.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                               eh.eigenvectors().transpose();
    // A = -H^{-1} Omega satisfies omega(X,Y) = h(AX,Y); conjugating by H^{1/2}
    // turns -A^2 into the symmetric positive M = -K^2, K = H^{-1/2} Omega H^{-1/2}.
    Eigen::Matrix4d K = Hinvhalf * O * Hinvhalf;
    Eigen::Matrix4d M = -(K * K);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> em(M);
    if (em.info() != Eigen::Success) throw MetricError("eigensolver failed on -A^2");
    Eigen::Vector4d mv = em.eigenvalues();
    if (!(mv.minCoeff() > 0) || mv.maxCoeff() / mv.minCoeff() > 1e12)
      throw DegenerateStructure("-A^2 ill-conditioned in polar retraction");
    Eigen::Matrix4d Minvhalf = em.eigenvectors() * mv.cwiseSqrt().cwiseInverse().asDiagonal() *
                               em.eigenvectors().transpose();
    Eigen::Matrix4d Jm = -Hinvhalf * K * Minvhalf * Hhalf;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) J.comp(a, b)[p] = Jm(a, b);
  }
  return omega_compatible(std::move(J));
}

double CompatibleStructure::omega_invariance_defect() const {
  const Eigen::Matrix4d O = omega_matrix();
  double worst = 0;
  const std::size_t total = grid_.total();
  for (std::size_t p = 0; p < total; ++p) {
    Eigen::Matrix4d Jm = gather_endo(J_, p);
    worst = std::max(worst, (Jm.transpose() * O * Jm - O).cwiseAbs().maxCoeff());
  }
  return worst;
}

double nijenhuis_norm(const CompatibleStructure& s) {
  const EndomorphismField& J = s.J();
  const GridSpec grid = s.grid();
  const std::size_t total = grid.total();
  // dJ[a][c][b] = d_a J^c_b
  std::array<std::array<std::array<ScalarField, 4>, 4>, 4> dJ;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c)
      for (int b = 0; b < 4; ++b)
        dJ[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)][static_cast<std::size_t>(b)] =
            spectral_derivative(J.comp(c, b), a + 1);
  double worst = 0;
  for (std::size_t p = 0; p < total; ++p) {
    double Jm[4][4], D[4][4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) Jm[a][b] = J.comp(a, b)[p];
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b)
          D[a][c][b] = dJ[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)][static_cast<std::size_t>(b)][p];
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        for (int d = 0; d < 4; ++d) {
          double v = 0;
          for (int c = 0; c < 4; ++c) {
            v += Jm[c][a] * D[c][d][b] - Jm[c][b] * D[c][d][a];
            v += Jm[d][c] * D[b][c][a] - Jm[d][c] * D[a][c][b];
          }
          worst = std::max(worst, std::abs(v));
        }
  }
  return worst;
}

DeformationPath DeformationPath::constant_linear(const std::array<double, 16>& S,
                                                 double t_max) {
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (std::abs(S[static_cast<std::size_t>(4 * a + b)] -
                   S[static_cast<std::size_t>(4 * b + a)]) > 1e-14)
        throw ConfigError("constant path matrix S must be symmetric");
  DeformationPath p;
  p.kind_ = Kind::constant_linear;
  p.t_max_ = t_max;
  p.S_const_ = S;
  return p;
}

DeformationPath DeformationPath::bump_metric(std::vector<BumpEntry> entries,
                                             double t_max) {
  for (const auto& e : entries) {
    if (e.i < 1 || e.i > 4 || e.j < 1 || e.j > 4)
      throw ConfigError("bump entry indices must be in 1..4");
    for (const auto& term : e.terms)
      for (const auto& f : term.factors)
        if (f.axis < 1 || f.axis > 4) throw ConfigError("bump factor axis must be in 1..4");
  }
  DeformationPath p;
  p.kind_ = Kind::bump_metric;
  p.t_max_ = t_max;
  p.entries_ = std::move(entries);
  return p;
}

DeformationPath DeformationPath::user_file(MetricField target_metric, double t_max) {
  DeformationPath p;
  p.kind_ = Kind::user_file;
  p.t_max_ = t_max;
  p.target_ = std::move(target_metric);
  return p;
}

DeformationPath DeformationPath::standard_bump(double t_max) {
  BumpEntry e11;
  e11.i = 1;
  e11.j = 1;
  e11.terms.push_back(BumpTerm{0.3, {BumpTerm::Factor{3, 1, true}}});
  BumpEntry e22;
  e22.i = 2;
  e22.j = 2;
  e22.terms.push_back(BumpTerm{-0.3, {BumpTerm::Factor{3, 1, true}}});
  return bump_metric({e11, e22}, t_max);
}

CompatibleStructure DeformationPath::evaluate(GridSpec grid, double t) const {
  if (std::abs(t) > t_max_ * (1 + 1e-12))
    throw PathRangeError("t outside declared path range");
  std::array<ScalarField, 10> comps;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b)
      comps[static_cast<std::size_t>(MetricField::sym_index(a, b))] =
          ScalarField(grid, a == b ? 1.0 : 0.0);

  switch (kind_) {
    case Kind::constant_linear:
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
          ScalarField& f = comps[static_cast<std::size_t>(MetricField::sym_index(a, b))];
          double v = t * S_const_[static_cast<std::size_t>(4 * a + b)];
          for (std::size_t i = 0; i < f.size(); ++i) f[i] += v;
        }
      break;
    case Kind::bump_metric:
      for (const auto& e : entries_) {
        ScalarField& f = comps[static_cast<std::size_t>(MetricField::sym_index(e.i - 1, e.j - 1))];
        for (const auto& term : e.terms) {
          ScalarField prod = sample(grid, [&](double x1, double x2, double x3, double x4) {
            double x[4] = {x1, x2, x3, x4};
            double v = term.amp;
            for (const auto& fac : term.factors)
              v *= fac.is_sin ? std::sin(fac.freq * x[fac.axis - 1])
                              : std::cos(fac.freq * x[fac.axis - 1]);
            return v;
          });
          f.add_scaled(prod, t);
        }
      }
      break;
    case Kind::user_file: {
      if (!(target_.grid() == grid))
        throw ConfigError("user_file path grid does not match requested grid");
      double w = (t_max_ != 0.0) ? t / t_max_ : 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
          std::size_t k = static_cast<std::size_t>(MetricField::sym_index(a, b));
          ScalarField delta = target_.comp(a, b);
          if (a == b)
            for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= 1.0;
          comps[k].add_scaled(delta, w);
        }
      break;
    }
  }

  try {
    MetricField h = MetricField::from_components(grid, std::move(comps));
    return CompatibleStructure::polar_compatible(h);
  } catch (const MetricError&) {
    throw PathRangeError("h_t lost positivity at requested t");
  }
}

}  // namespace akstab
