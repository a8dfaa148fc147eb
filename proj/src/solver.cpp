#include "akstab/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "akstab/errors.hpp"

namespace akstab {

namespace {

/// Hessian of f as a symmetric 2-tensor, (D df)_{ab} = d_a d_b f - Gamma^c_{ab} d_c f.
std::array<ScalarField, 10> covariant_hessian(const ScalarField& f,
                                              const ChristoffelField& gam) {
  const GridSpec grid = f.grid();
  auto df = gradient(f);
  std::array<ScalarField, 10> H;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      ScalarField h = spectral_derivative(df[static_cast<std::size_t>(a)], b + 1);
      for (int c = 0; c < 4; ++c) {
        const ScalarField& gm = gam.gamma(c, a, b);
        const ScalarField& dc = df[static_cast<std::size_t>(c)];
        for (std::size_t p = 0; p < h.size(); ++p) h[p] -= gm[p] * dc[p];
      }
      H[static_cast<std::size_t>(MetricField::sym_index(a, b))] = std::move(h);
    }
  (void)grid;
  return H;
}

}  // namespace

void ContinuationConfig::validate() const {
  if (n < 8 || n % 2 != 0) throw ConfigError("grid n must be even and >= 8");
  if (steps <= 0) throw ConfigError("steps must be positive");
  if (t_max / steps > 0.1 + 1e-15) throw ConfigError("t_max/steps must be <= 0.1");
  double eps = std::numeric_limits<double>::epsilon();
  if (newton_tol < 10 * eps * n * n)
    throw ConfigError("newton_tol below 10*eps*n^2 floor");
  if (max_newton_iters <= 0 || fd_epsilon <= 0 || ker_tol <= 0)
    throw ConfigError("solver parameters must be positive");
}

ScalarField lichnerowicz(const ScalarField& f, const CompatibleStructure& base) {
  const GridSpec grid = f.grid();
  const MetricField& g = base.g();
  const EndomorphismField& J = base.J();
  ChristoffelField gam(g);
  auto H = covariant_hessian(f, gam);

  // J-anti-invariant part of the symmetric tensor: 1/2 (H - J^T H J)
  std::array<ScalarField, 10> Hm;
  for (auto& h : Hm) h = ScalarField(grid);
  const std::size_t total = grid.total();
  for (std::size_t p = 0; p < total; ++p) {
    double Jm[4][4], Hp[4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) Jm[a][b] = J.comp(a, b)[p];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        Hp[a][b] = H[static_cast<std::size_t>(MetricField::sym_index(a, b))][p];
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        double s = 0;
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) s += Jm[c][a] * Hp[c][d] * Jm[d][b];
        Hm[static_cast<std::size_t>(MetricField::sym_index(a, b))][p] =
            0.5 * (Hp[a][b] - s);
      }
  }

  // first divergence: beta_b = g^{ac} (D_a Hm)_{cb}
  std::array<ScalarField, 4> beta;
  for (auto& b : beta) b = ScalarField(grid);
  std::array<std::array<ScalarField, 10>, 4> dHm;
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c)
      for (int b = c; b < 4; ++b)
        dHm[static_cast<std::size_t>(a)][static_cast<std::size_t>(MetricField::sym_index(c, b))] =
            spectral_derivative(Hm[static_cast<std::size_t>(MetricField::sym_index(c, b))], a + 1);
  for (std::size_t p = 0; p < total; ++p) {
    double gi[4][4], G[4][4][4], Hp[4][4], D[4][4][4];
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
      for (int b = 0; b < 4; ++b)
        Hp[a][b] = Hm[static_cast<std::size_t>(MetricField::sym_index(a, b))][p];
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 4; ++c)
        for (int b = 0; b < 4; ++b)
          D[a][c][b] =
              dHm[static_cast<std::size_t>(a)][static_cast<std::size_t>(MetricField::sym_index(c, b))][p];
    for (int b = 0; b < 4; ++b) {
      double s = 0;
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c) {
          double cov = D[a][c][b];
          for (int d = 0; d < 4; ++d) cov -= G[d][a][c] * Hp[d][b] + G[d][a][b] * Hp[c][d];
          s += gi[a][c] * cov;
        }
      beta[static_cast<std::size_t>(b)][p] = s;
    }
  }

  // second divergence: out = g^{ab} (D_a beta)_b ; L = -2 * out
  std::array<std::array<ScalarField, 4>, 4> dbeta;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      dbeta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          spectral_derivative(beta[static_cast<std::size_t>(b)], a + 1);
  ScalarField out(grid);
  for (std::size_t p = 0; p < total; ++p) {
    double gi[4][4];
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) {
        double v = g.inv_comp(a, b)[p];
        gi[a][b] = v;
        gi[b][a] = v;
      }
    double s = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double cov = dbeta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][p];
        for (int c = 0; c < 4; ++c)
          cov -= gam.gamma(c, a, b)[p] * beta[static_cast<std::size_t>(c)][p];
        s += gi[a][b] * cov;
      }
    out[p] = -2.0 * s;
  }
  return out;
}

LichnerowiczPreconditioner::LichnerowiczPreconditioner(GridSpec grid) {
  // L has constant coefficients on the flat base, so it is diagonal in
  // Fourier space: applying it to the delta comb (unit spectrum everywhere)
  // and transforming back tabulates the whole symbol in one pass.
  CompatibleStructure flat = CompatibleStructure::standard(grid);
  ScalarField comb(grid);
  comb[0] = static_cast<double>(grid.total());
  ScalarField Lcomb = lichnerowicz(comb, flat);
  inv_symbol_ = fourier_coefficients_real(Lcomb);
  for (double& s : inv_symbol_) s = (std::abs(s) < 1e-10) ? 0.0 : 1.0 / s;
}

ScalarField LichnerowiczPreconditioner::apply(const ScalarField& r) const {
  return apply_fourier_multiplier(r, inv_symbol_);
}

namespace {

/// Right-preconditioned restarted GMRES for the Newton correction
/// J x = rhs; op is v -> J M^{-1} v, the returned x is M^{-1} u.
ScalarField gmres_right_preconditioned(
    const std::function<ScalarField(const ScalarField&)>& op, const ScalarField& rhs,
    const LichnerowiczPreconditioner& precond, int restart, int max_iters,
    double abs_target) {
  ScalarField u(rhs.grid());
  bool have_u = false;
  int used = 0;
  while (used < max_iters) {
    ScalarField r0 = rhs;
    if (have_u) {
      r0 -= op(u);
      ++used;
    }
    double beta = l2_norm(r0);
    if (beta <= abs_target) break;
    std::vector<ScalarField> V;
    V.reserve(static_cast<std::size_t>(restart) + 1);
    r0 *= 1.0 / beta;
    V.push_back(std::move(r0));
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
    std::vector<double> cs(static_cast<std::size_t>(restart)),
        sn(static_cast<std::size_t>(restart));
    Eigen::VectorXd g = Eigen::VectorXd::Zero(restart + 1);
    g(0) = beta;
    int k = 0;
    bool breakdown = false;
    while (k < restart && used < max_iters) {
      ScalarField w = op(V[static_cast<std::size_t>(k)]);
      ++used;
      for (int j = 0; j <= k; ++j) {
        H(j, k) = l2_inner(w, V[static_cast<std::size_t>(j)]);
        w.add_scaled(V[static_cast<std::size_t>(j)], -H(j, k));
      }
      double hnext = l2_norm(w);
      if (hnext > 1e-14) {
        w *= 1.0 / hnext;
        V.push_back(std::move(w));
      } else {
        breakdown = true;
      }
      for (int j = 0; j < k; ++j) {
        double tmp = cs[static_cast<std::size_t>(j)] * H(j, k) +
                     sn[static_cast<std::size_t>(j)] * H(j + 1, k);
        H(j + 1, k) = -sn[static_cast<std::size_t>(j)] * H(j, k) +
                      cs[static_cast<std::size_t>(j)] * H(j + 1, k);
        H(j, k) = tmp;
      }
      double denom = std::hypot(H(k, k), hnext);
      if (denom < 1e-300) break;
      cs[static_cast<std::size_t>(k)] = H(k, k) / denom;
      sn[static_cast<std::size_t>(k)] = hnext / denom;
      H(k, k) = denom;
      g(k + 1) = -sn[static_cast<std::size_t>(k)] * g(k);
      g(k) = cs[static_cast<std::size_t>(k)] * g(k);
      ++k;
      if (std::abs(g(k)) <= abs_target || breakdown) break;
    }
    if (k == 0) break;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g(i);
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y(j);
      y(i) = s / H(i, i);
    }
    for (int i = 0; i < k; ++i) u.add_scaled(V[static_cast<std::size_t>(i)], y(i));
    have_u = true;
    if (std::abs(g(k)) <= abs_target || breakdown) break;
  }
  return precond.apply(u);
}

}  // namespace

NewtonOutcome newton_correct(double t, const ScalarField& f0, const EllipticContext& ctx,
                             const HamiltonianBasis& basis, const ContinuationConfig& cfg,
                             const LichnerowiczPreconditioner& precond) {
  ScalarField f = zero_mean_project(f0);
  auto residual = [&](const ScalarField& ff) { return residual_psi(t, ff, ctx, basis); };
  ScalarField r = residual(f);
  double rn = l2_norm(r);
  NewtonOutcome out;
  out.f = f;
  out.residual_norm = rn;
  if (rn <= cfg.newton_tol) return out;

  for (int it = 0; it < cfg.max_newton_iters; ++it) {
    // Jacobian-vector product by central differences around f
    double fnorm = l2_norm(f);
    auto jac_vec = [&](const ScalarField& v) {
      double vn = l2_norm(v);
      if (vn == 0) return ScalarField(f.grid());
      double eps = cfg.fd_epsilon * (1.0 + fnorm) / vn;
      ScalarField fp = f;
      fp.add_scaled(v, eps);
      ScalarField fm = f;
      fm.add_scaled(v, -eps);
      ScalarField rp = residual(zero_mean_project(fp));
      ScalarField rm = residual(zero_mean_project(fm));
      rp -= rm;
      rp *= 1.0 / (2.0 * eps);
      return rp;
    };
    auto op = [&](const ScalarField& v) { return jac_vec(precond.apply(v)); };

    ScalarField rhs = r;
    rhs *= -1.0;
    double target = std::max(cfg.gmres_rel_tol * rn, 0.01 * cfg.newton_tol);
    ScalarField step = gmres_right_preconditioned(op, rhs, precond, cfg.gmres_restart,
                                                  cfg.gmres_max_iters, target);
    step = zero_mean_project(step);

    // backtracking only on inadmissible potentials
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= 10; ++bt) {
      ScalarField fn = f;
      fn.add_scaled(step, lambda);
      fn = zero_mean_project(fn);
      try {
        ScalarField rnew = residual(fn);
        f = std::move(fn);
        r = std::move(rnew);
        rn = l2_norm(r);
        accepted = true;
        break;
      } catch (const NotAPotential&) {
        lambda *= 0.5;
      }
    }
    if (!accepted)
      throw NotAPotential("Newton step left the admissible potential set");
    out.iters = it + 1;
    out.f = f;
    out.residual_norm = rn;
    if (rn <= cfg.newton_tol) return out;
  }
  throw Diverged("Newton did not reach tolerance within max_newton_iters");
}

ContinuationResult continue_path(const DeformationPath& path, const ContinuationConfig& cfg,
                                 const HamiltonianBasis& basis) {
  cfg.validate();
  GridSpec grid = GridSpec::checked(cfg.n);
  ContinuationResult result;

  // Theorem hypothesis: the path starts at the flat extremal Kahler point.
  CompatibleStructure base = path.evaluate(grid, 0.0);
  CompatibleStructure flat = CompatibleStructure::standard(grid);
  double base_dev = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      ScalarField diff = base.J().comp(a, b) - flat.J().comp(a, b);
      base_dev = std::max(base_dev, diff.max_abs());
    }
  if (base_dev > 1e-12)
    throw ConfigError("path does not start at the standard Kahler structure");

  KernelOptions kopts;
  kopts.tol = cfg.ker_tol;
  EllipticContext ctx0 = kernel_detect(flat, kopts);
  const int h0 = ctx0.h_minus();
  result.h_minus_base = h0;

  LichnerowiczPreconditioner precond(grid);
  ScalarField f_prev(grid);  // warm start, zero at the base point
  std::vector<Form> warm_kernel = ctx0.kernel_basis();

  const double dt = cfg.t_max / cfg.steps;
  for (int k = 1; k <= cfg.steps; ++k) {
    double t = k * dt;
    StepRecord rec;
    rec.t = t;
    rec.f_t = f_prev;
    try {
      CompatibleStructure st = path.evaluate(grid, t);
      KernelOptions ko = kopts;
      ko.warm_start = &warm_kernel;
      EllipticContext ctx = kernel_detect(st, ko);
      rec.h_minus = ctx.h_minus();
      rec.gap = ctx.gap();
      if (ctx.h_minus() != h0) {
        rec.status = "kernel_jump";
        result.steps.push_back(std::move(rec));
        result.status = "kernel_jump";
        return result;
      }
      NewtonOutcome sol = newton_correct(t, f_prev, ctx, basis, cfg, precond);
      rec.f_t = sol.f;
      rec.residual_norm = sol.residual_norm;
      rec.newton_iters = sol.iters;
      DeformationState state = build_state(t, sol.f, ctx);
      ExtremalReport diag = extremal_diagnostics(state, ctx, basis);
      rec.killing_defect = diag.killing_defect;
      rec.calabi_energy = diag.calabi_energy;
      rec.status = "converged";
      f_prev = sol.f;
      warm_kernel = ctx.kernel_basis();
      result.steps.push_back(std::move(rec));
    } catch (const AmbiguousKernel&) {
      // numerical shadow of the h-minus constancy hypothesis failing
      rec.status = "kernel_jump";
      result.steps.push_back(std::move(rec));
      result.status = "kernel_jump";
      return result;
    } catch (const NotAPotential&) {
      rec.status = "not_a_potential";
      result.steps.push_back(std::move(rec));
      result.status = "not_a_potential";
      return result;
    } catch (const PathRangeError&) {
      rec.status = "not_a_potential";
      result.steps.push_back(std::move(rec));
      result.status = "not_a_potential";
      return result;
    } catch (const Diverged&) {
      rec.status = "diverged";
      result.steps.push_back(std::move(rec));
      result.status = "diverged";
      return result;
    }
  }
  return result;
}

CrosscheckReport system_crosscheck(const DeformationState& st, const EllipticContext& ctx) {
  CrosscheckReport rep;
  CompatibleStructure deformed =
      CompatibleStructure::hermitian_pair(ctx.structure().J(), st.g_f);
  ScalarField s_e6 = hermitian_scalar(deformed, st.omega_f);
  ScalarField lapF = laplacian(st.F, st.g_f);
  ScalarField pairing = pointwise_inner(ctx.rho_base(), st.omega_f, st.g_f);
  ScalarField e1 = s_e6 - pairing - lapF;
  rep.e1_residual = e1.max_abs();
  // e2: e^F = omega_f^2 / omega^2 pointwise
  Form omega = Form::standard_symplectic(st.omega_f.grid());
  Form wf = st.omega_f;
  ScalarField top(st.F.grid());
  {
    const ScalarField &a12 = wf.comp(0), &a13 = wf.comp(1), &a14 = wf.comp(2);
    const ScalarField &a23 = wf.comp(3), &a24 = wf.comp(4), &a34 = wf.comp(5);
    for (std::size_t i = 0; i < top.size(); ++i)
      top[i] = 2.0 * (a12[i] * a34[i] - a13[i] * a24[i] + a14[i] * a23[i]);
  }
  double worst = 0;
  for (std::size_t i = 0; i < top.size(); ++i)
    worst = std::max(worst, std::abs(std::exp(st.F[i]) - top[i] / 2.0));
  rep.e2_residual = worst;
  return rep;
}

}  // namespace akstab
