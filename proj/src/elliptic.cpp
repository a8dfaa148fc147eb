#include "akstab/elliptic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

#include "akstab/errors.hpp"

namespace akstab {

namespace {

using FormOp = std::function<Form(const Form&)>;

/// Componentwise spectral preconditioner with inverse symbol
/// (c_lap*|k|^2 + sigma)^{-1}; the k = 0 entry is zeroed when requested.
class SpectralPreconditioner {
 public:
  SpectralPreconditioner(GridSpec grid, double c_lap, double sigma, bool kill_zero_mode) {
    std::vector<double> k2 = fourier_k2_table(grid);
    inv_.resize(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i) {
      double s = c_lap * k2[i] + sigma;
      inv_[i] = (k2[i] == 0.0 && kill_zero_mode) ? 0.0 : 1.0 / s;
    }
  }

  Form apply(const Form& f) const {
    Form out(f.rank(), f.grid());
    for (int c = 0; c < f.component_count(); ++c)
      out.comp(c) = apply_fourier_multiplier(f.comp(c), inv_);
    return out;
  }

 private:
  std::vector<double> inv_;
};

struct CgOutcome {
  Form x;
  double rel_residual = 0;
  int iters = 0;
};

/// Preconditioned CG in a caller-supplied inner product, with the
/// Polak-Ribiere beta so mildly inexact preconditioners stay stable.
CgOutcome pcg(const FormOp& A, const Form& b, const FormOp& precond,
              const std::function<double(const Form&, const Form&)>& ip,
              double rel_tol, int max_iters) {
  CgOutcome out;
  out.x = Form(b.rank(), b.grid());
  double bnorm = std::sqrt(std::max(0.0, ip(b, b)));
  if (bnorm == 0.0) return out;
  Form r = b;
  Form z = precond(r);
  Form p = z;
  double rz = ip(r, z);
  for (int it = 0; it < max_iters; ++it) {
    Form Ap = A(p);
    double pAp = ip(p, Ap);
    if (!(pAp > 0)) throw SolveError("CG breakdown: operator not positive on subspace");
    double alpha = rz / pAp;
    out.x.add_scaled(p, alpha);
    r.add_scaled(Ap, -alpha);
    double rnorm = std::sqrt(std::max(0.0, ip(r, r)));
    out.iters = it + 1;
    out.rel_residual = rnorm / bnorm;
    if (out.rel_residual <= rel_tol) return out;
    Form z_next = precond(r);
    double rz_next = ip(r, z_next);
    Form dz = z_next - z;
    double beta = ip(r, dz) / rz;
    if (!(beta > 0)) beta = rz_next / rz;
    p *= beta;
    p += z_next;
    z = std::move(z_next);
    rz = rz_next;
  }
  return out;
}

void mgs_orthonormalize(std::vector<Form>& v,
                        const std::function<double(const Form&, const Form&)>& ip) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (int rep = 0; rep < 2; ++rep)
      for (std::size_t j = 0; j < i; ++j) v[i].add_scaled(v[j], -ip(v[j], v[i]));
    double nrm = std::sqrt(std::max(0.0, ip(v[i], v[i])));
    if (nrm < 1e-14) throw SolveError("degenerate block in orthonormalization");
    v[i] *= 1.0 / nrm;
  }
}

Form constant_two_form(GridSpec grid, int comp) {
  Form e(2, grid);
  e.comp(comp) = ScalarField(grid, 1.0);
  return e;
}

double primitivity_defect(const Form& psi, const CompatibleStructure& s) {
  Form omega = Form::standard_symplectic(psi.grid());
  return pointwise_inner(psi, omega, s.g()).max_abs();
}

}  // namespace

Form apply_P(const Form& psi, const CompatibleStructure& s) {
  if (psi.rank() != 2) throw RankError("P acts on 2-forms");
  if (primitivity_defect(psi, s) > 1e-8 * std::max(1.0, psi.max_abs()))
    throw PrimitivityError("input to P is not primitive");
  Form lap = laplacian(psi, s.g());
  Form omega = Form::standard_symplectic(psi.grid());
  ScalarField trace = pointwise_inner(lap, omega, s.g());
  Form out = lap;
  out *= 0.5;
  for (int c = 0; c < 6; ++c) {
    const ScalarField& oc = omega.comp(c);
    ScalarField& outc = out.comp(c);
    for (std::size_t i = 0; i < trace.size(); ++i) outc[i] -= 0.25 * trace[i] * oc[i];
  }
  // re-project to guard primitivity drift over long Krylov runs
  return primitive_part(out, s.g());
}

Form apply_P(const Form& psi, const EllipticContext& ctx) {
  return apply_P(psi, ctx.structure());
}

Form apply_P_anti(const Form& psi, const CompatibleStructure& s) {
  if (psi.rank() != 2) throw RankError("P acts on 2-forms");
  Form delta = codifferential(psi, s.g());
  Form ddelta = exterior_derivative(delta);
  return j_anti_part(ddelta, s.J(), false);
}

std::array<Form, 6> harmonic_two_form_basis(const CompatibleStructure& s,
                                            double cg_tol) {
  const GridSpec grid = s.grid();
  const MetricField& g = s.g();
  SpectralPreconditioner flat(grid, 1.0, 0.0, true);
  auto ip = [&](const Form& a, const Form& b) { return l2_inner(a, b, g); };
  auto A = [&](const Form& x) { return laplacian(x, g); };
  auto precond = [&](const Form& r) { return flat.apply(metric_gram_apply(r, g)); };
  std::array<Form, 6> out;
  for (int c = 0; c < 6; ++c) {
    Form e = constant_two_form(grid, c);
    Form rhs = codifferential(e, g);
    rhs *= -1.0;
    // rhs is co-exact, hence orthogonal to the harmonic 1-forms; CG stays in
    // the co-exact subspace and any harmonic leakage is killed by d below.
    CgOutcome sol = pcg(A, rhs, precond, ip, cg_tol, 400);
    if (sol.rel_residual > std::max(cg_tol * 10, 1e-10) && sol.iters > 0)
      throw SolveError("harmonic representative solve did not converge");
    out[static_cast<std::size_t>(c)] = e + exterior_derivative(sol.x);
  }
  return out;
}

EllipticContext kernel_detect(const CompatibleStructure& s, const KernelOptions& opts) {
  const GridSpec grid = s.grid();
  const MetricField& g = s.g();
  const EndomorphismField& J = s.J();
  if (opts.tol <= 0) throw AmbiguousKernel("kernel tolerance must be positive");
  const int block = std::min(opts.block, 12);
  auto ip = [&](const Form& a, const Form& b) { return l2_inner(a, b, g); };

  // ---- coarse phase: block inverse iteration on P + shift ----
  SpectralPreconditioner shifted(grid, 0.5, opts.shift, false);
  auto A_shift = [&](const Form& x) {
    Form y = apply_P(x, s);
    y.add_scaled(x, opts.shift);
    return y;
  };
  auto precond = [&](const Form& r) {
    return primitive_part(shifted.apply(metric_gram_apply(primitive_part(r, g), g)), g);
  };

  std::vector<Form> X;
  X.reserve(static_cast<std::size_t>(block));
  if (opts.warm_start)
    for (const Form& w : *opts.warm_start)
      if (static_cast<int>(X.size()) < block && w.rank() == 2 && w.grid() == grid)
        X.push_back(primitive_part(w, g));
  std::uint64_t seed = opts.seed;
  while (static_cast<int>(X.size()) < block) {
    Form f(2, grid);
    for (int c = 0; c < 6; ++c) f.comp(c) = random_band_limited(grid, 2, seed++, 1.0);
    X.push_back(primitive_part(f, g));
  }
  mgs_orthonormalize(X, ip);

  std::vector<double> theta(static_cast<std::size_t>(block), 0.0);
  std::vector<double> resid(static_cast<std::size_t>(block), 1.0);
  const double inner_tol = std::max(opts.cg_tol, 0.02 * opts.coarse_residual);
  int outer = 0;
  for (; outer < opts.max_outer; ++outer) {
    std::vector<Form> Y;
    Y.reserve(static_cast<std::size_t>(block));
    for (int i = 0; i < block; ++i) {
      CgOutcome sol = pcg(A_shift, X[static_cast<std::size_t>(i)], precond, ip,
                          inner_tol, 200);
      Y.push_back(primitive_part(sol.x, g));
    }
    mgs_orthonormalize(Y, ip);
    std::vector<Form> PY;
    PY.reserve(static_cast<std::size_t>(block));
    for (int i = 0; i < block; ++i) PY.push_back(apply_P(Y[static_cast<std::size_t>(i)], s));
    Eigen::MatrixXd H(block, block);
    for (int i = 0; i < block; ++i)
      for (int j = 0; j < block; ++j)
        H(i, j) = ip(Y[static_cast<std::size_t>(i)], PY[static_cast<std::size_t>(j)]);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    Eigen::MatrixXd V = eig.eigenvectors();
    // rotate the block to the Ritz basis
    std::vector<Form> Xn, PXn;
    for (int i = 0; i < block; ++i) {
      Form xi(2, grid), pxi(2, grid);
      for (int j = 0; j < block; ++j) {
        xi.add_scaled(Y[static_cast<std::size_t>(j)], V(j, i));
        pxi.add_scaled(PY[static_cast<std::size_t>(j)], V(j, i));
      }
      Xn.push_back(std::move(xi));
      PXn.push_back(std::move(pxi));
    }
    X = std::move(Xn);
    bool done = true;
    for (int i = 0; i < block; ++i) {
      theta[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
      Form r = PXn[static_cast<std::size_t>(i)];
      r.add_scaled(X[static_cast<std::size_t>(i)], -theta[static_cast<std::size_t>(i)]);
      resid[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, ip(r, r)));
      double target = (theta[static_cast<std::size_t>(i)] < 50 * opts.tol)
                          ? opts.coarse_residual
                          : std::max(opts.coarse_residual,
                                     0.05 * theta[static_cast<std::size_t>(i)]);
      if (resid[static_cast<std::size_t>(i)] > target) done = false;
    }
    if (done && outer >= 1) {
      ++outer;
      break;
    }
  }

  int dim_kernel = 0;
  while (dim_kernel < block && theta[static_cast<std::size_t>(dim_kernel)] < opts.tol)
    ++dim_kernel;
  if (dim_kernel == block)
    throw AmbiguousKernel("kernel candidate fills the whole block; enlarge block");
  if (dim_kernel == 0)
    throw AmbiguousKernel("no kernel detected below tolerance");
  double gap = theta[static_cast<std::size_t>(dim_kernel)];
  if (gap < 10 * opts.tol)
    throw AmbiguousKernel("spectral gap below 10*tol; refine resolution or tol");

  // coarse classification by anti-invariant norm dominance
  int h_minus_coarse = 0;
  double margin = 1.0;
  for (int i = 0; i < dim_kernel; ++i) {
    Form anti = j_anti_part(X[static_cast<std::size_t>(i)], J, false);
    double na = std::sqrt(std::max(0.0, ip(anti, anti)));
    if (na > 0.5) ++h_minus_coarse;
    margin = std::min(margin, std::abs(na - 0.5) * 2.0);
  }

  // ---- refinement: harmonic representatives and the star/omega split ----
  auto H6 = harmonic_two_form_basis(s, std::max(1e-13, opts.cg_tol * 1e-2));
  Eigen::MatrixXd G(6, 6), T(6, 6);
  std::vector<Form> starH;
  starH.reserve(6);
  for (int i = 0; i < 6; ++i) starH.push_back(hodge_star(H6[static_cast<std::size_t>(i)], g));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      G(i, j) = ip(H6[static_cast<std::size_t>(i)], H6[static_cast<std::size_t>(j)]);
      T(i, j) = ip(H6[static_cast<std::size_t>(i)], starH[static_cast<std::size_t>(j)]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> star_eig(
      0.5 * (T + T.transpose()), G);
  // eigenvalues cluster at -1 (anti-self-dual classes) and +1 (self-dual)
  int n_minus = 0, n_plus = 0;
  for (int i = 0; i < 6; ++i) {
    double ev = star_eig.eigenvalues()(i);
    if (std::abs(ev + 1.0) < 0.2) ++n_minus;
    if (std::abs(ev - 1.0) < 0.2) ++n_plus;
  }
  if (n_minus != 3 || n_plus != 3)
    throw AmbiguousKernel("harmonic star-splitting did not produce b- = b+ = 3");

  auto combine = [&](const Eigen::VectorXd& c) {
    Form f(2, grid);
    for (int j = 0; j < 6; ++j) f.add_scaled(H6[static_cast<std::size_t>(j)], c(j));
    return f;
  };
  std::vector<Form> asd, sd;
  for (int i = 0; i < 6; ++i) {
    Form f = combine(star_eig.eigenvectors().col(i));
    if (star_eig.eigenvalues()(i) < 0)
      asd.push_back(std::move(f));
    else
      sd.push_back(std::move(f));
  }
  mgs_orthonormalize(asd, ip);
  mgs_orthonormalize(sd, ip);

  // within the self-dual harmonic span, the J-anti-invariant members are the
  // null directions of the omega-component Gram matrix
  Form omega = Form::standard_symplectic(grid);
  Eigen::Matrix3d Q;
  std::vector<ScalarField> lam;
  for (int i = 0; i < 3; ++i) {
    ScalarField li = pointwise_inner(sd[static_cast<std::size_t>(i)], omega, g);
    li *= 0.5;
    lam.push_back(std::move(li));
  }
  const double vol = integrate(ScalarField(grid, 1.0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Q(i, j) = l2_inner(lam[static_cast<std::size_t>(i)],
                                                   lam[static_cast<std::size_t>(j)]) / vol;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> q_eig(Q);
  int h_minus_hodge = 0;
  std::vector<Form> anti_kernel;
  for (int i = 0; i < 3; ++i) {
    if (q_eig.eigenvalues()(i) < opts.tol) {
      Form f(2, grid);
      for (int j = 0; j < 3; ++j)
        f.add_scaled(sd[static_cast<std::size_t>(j)], q_eig.eigenvectors()(j, i));
      anti_kernel.push_back(primitive_part(f, g));
      ++h_minus_hodge;
    }
  }
  if (h_minus_hodge != h_minus_coarse)
    throw AmbiguousKernel("eigensolver and harmonic refinement disagree on h_minus");
  if (3 + h_minus_hodge != dim_kernel)
    throw AmbiguousKernel("detected kernel dimension inconsistent with b- + h-");
  if (!anti_kernel.empty()) mgs_orthonormalize(anti_kernel, ip);

  EllipticContext ctx;
  ctx.s_ = s;
  ctx.tol_ = opts.tol;
  ctx.gap_ = gap;
  ctx.h_minus_ = h_minus_hodge;
  ctx.classification_margin_ = margin;
  ctx.ritz_.assign(theta.begin(), theta.end());
  ctx.kernel_ = std::move(asd);
  for (const Form& f : anti_kernel) ctx.kernel_.push_back(f);
  ctx.kernel_anti_ = std::move(anti_kernel);
  for (const Form& k : ctx.kernel_) {
    Form pk = apply_P(k, s);
    double nrm = std::sqrt(std::max(0.0, ip(pk, pk)));
    ctx.kernel_eigs_.push_back(ip(k, pk));
    if (nrm > 10 * opts.tol)
      throw AmbiguousKernel("refined kernel vector fails ||P k|| <= 10 tol");
  }
  ctx.rho_base_ = hermitian_ricci(s);
  return ctx;
}

Form green_solve(const Form& rhs, const EllipticContext& ctx, double rel_tol) {
  const CompatibleStructure& s = ctx.structure();
  const MetricField& g = s.g();
  const GridSpec grid = ctx.grid();
  if (rhs.rank() != 2) throw RankError("green_solve expects a 2-form");
  auto ip = [&](const Form& a, const Form& b) { return l2_inner(a, b, g); };
  double rhs_norm = std::sqrt(std::max(0.0, ip(rhs, rhs)));
  if (rhs_norm == 0.0) return Form(2, grid);
  {
    auto [plus, minus] = j_split(rhs, s.J(), false);
    (void)minus;
    double nplus = std::sqrt(std::max(0.0, ip(plus, plus)));
    if (nplus > 1e-8 * std::max(1.0, rhs_norm))
      throw StructureError("green_solve rhs is not J-anti-invariant");
  }
  const std::vector<Form>& kernel = ctx.kernel_anti();
  auto deflate = [&](Form& f) {
    for (const Form& k : kernel) f.add_scaled(k, -ip(k, f));
  };
  Form b = rhs;
  deflate(b);
  SpectralPreconditioner flat(grid, 0.5, 0.5, false);
  auto A = [&](const Form& x) {
    Form y = apply_P_anti(x, s);
    deflate(y);
    return y;
  };
  auto precond = [&](const Form& r) {
    Form z = j_anti_part(flat.apply(metric_gram_apply(j_anti_part(r, s.J(), false), g)),
                         s.J(), false);
    deflate(z);
    return z;
  };
  const int max_iters = 50 * grid.n;
  CgOutcome sol = pcg(A, b, precond, ip, rel_tol, max_iters);
  if (sol.rel_residual > rel_tol)
    throw SolveError("green_solve CG stagnated before reaching tolerance");
  deflate(sol.x);
  return sol.x;
}

}  // namespace akstab
