#include "mourrekit/mourre.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace mourrekit {

Mat resolved_window_basis(const MomentumGrid& grid, const RVec& window_mask,
                          double u_cap) {
  const long n = grid.total();
  std::vector<long> sel;
  for (long k = 0; k < n; ++k)
    if (window_mask[k] != 0.0) sel.push_back(k);
  if (sel.empty()) return Mat(n, 0);

  const long m = static_cast<long>(sel.size());
  // compact 3-point Laplacian (sum over axes) restricted to the window
  RMat blk = RMat::Zero(m, m);
  std::vector<long> inv(n, -1);
  for (long i = 0; i < m; ++i) inv[sel[i]] = i;
  int idx[8];
  for (long i = 0; i < m; ++i) {
    grid.unflatten(sel[i], idx);
    for (int ax = 0; ax < grid.dim(); ++ax) {
      long stride = 1;
      for (int j = grid.dim() - 1; j > ax; --j) stride *= grid.axis_points(j);
      double w = 1.0 / (grid.spacing(ax) * grid.spacing(ax));
      blk(i, i) += 2.0 * w;
      if (idx[ax] + 1 < grid.axis_points(ax)) {
        long nb = inv[sel[i] + stride];
        if (nb >= 0) blk(i, nb) -= w;
      }
      if (idx[ax] - 1 >= 0) {
        long nb = inv[sel[i] - stride];
        if (nb >= 0) blk(i, nb) -= w;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(blk);
  if (es.info() != Eigen::Success)
    throw Error("resolved_window_basis: eigendecomposition failed");
  long keep = 0;
  for (long i = 0; i < m; ++i)
    if (es.eigenvalues()[i] <= u_cap * u_cap) ++keep;
  if (keep == 0) keep = 1;  // at least the ground mode of the window
  Mat basis = Mat::Zero(n, keep);
  for (long c = 0; c < keep; ++c)
    for (long i = 0; i < m; ++i)
      basis(sel[i], c) = es.eigenvectors()(i, c);
  return basis;
}

namespace {
MourreReport margin_from_block(const Mat& block, double constant_a,
                               const Interval& window, double u_cap,
                               double mourre_tol) {
  MourreReport rep;
  rep.window = window;
  rep.constant_a = constant_a;
  rep.u_cap = u_cap;
  rep.resolved_dim = static_cast<int>(block.rows());
  rep.mourre_tol = mourre_tol > 0 ? mourre_tol : 1e-6 * std::abs(constant_a);
  if (block.rows() == 0) {
    rep.vacuous = true;
    rep.margin = std::numeric_limits<double>::infinity();
    rep.pass = true;
    return rep;
  }
  Mat sym = 0.5 * (block + Mat(block.adjoint()));
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error("mourre_check: eigendecomposition failed");
  rep.margin = es.eigenvalues()[0] - constant_a;
  rep.pass = rep.margin >= -rep.mourre_tol;
  return rep;
}
}  // namespace

MourreReport mourre_check(const MultiplierOperator& h, const Mat& a_matrix,
                          const Interval& window, double constant_a,
                          double u_cap, double mourre_tol) {
  const MomentumGrid& grid = *h.grid;
  const long n = grid.total();
  ProjectionMeta meta;
  MultiplierOperator e = spectral_projection(h, window, &meta);
  if (meta.empty) {
    MourreReport rep;
    rep.window = window;
    rep.constant_a = constant_a;
    rep.u_cap = u_cap;
    rep.vacuous = true;
    rep.margin = std::numeric_limits<double>::infinity();
    rep.pass = true;
    rep.residuals["vacuous window"] = 0.0;
    return rep;
  }
  Mat x = resolved_window_basis(grid, e.samples, u_cap);
  Vec hd = h.samples.cast<cplx>();
  Mat comm = cplx(0, 1) * (Mat(hd.asDiagonal() * a_matrix) -
                           Mat(a_matrix * hd.asDiagonal()));
  Mat block = x.adjoint() * comm * x;
  return margin_from_block(block, constant_a, window, u_cap, mourre_tol);
}

InverseMourreReport inverse_mourre_check(const MultiplierOperator& h,
                                         const Mat& a_matrix,
                                         const Interval& window,
                                         double beta, double u_cap,
                                         double mourre_tol) {
  const MomentumGrid& grid = *h.grid;
  if (h.samples.minCoeff() <= 0.0)
    throw Error("inverse_mourre_check: H must be strictly positive");
  const double req = 1.0 / ((1.0 + beta) * (1.0 + beta));

  // E_tilde(J_tilde) for H^{-1} selects the same points as E(J) for H
  ProjectionMeta meta;
  MultiplierOperator e = spectral_projection(h, window, &meta);
  InverseMourreReport out;
  if (meta.empty) {
    out.report.window = window;
    out.report.constant_a = req;
    out.report.vacuous = true;
    out.report.margin = std::numeric_limits<double>::infinity();
    out.report.pass = true;
    return out;
  }

  Vec hd = h.samples.cast<cplx>();
  Vec hinv = h.samples.cwiseInverse().cast<cplx>();
  Mat comm = cplx(0, 1) * (Mat(hd.asDiagonal() * a_matrix) -
                           Mat(a_matrix * hd.asDiagonal()));
  // resolvent-commutator identity: i[H^{-1}, A] = -H^{-1} i[H,A] H^{-1}
  Mat comm_inv = -Mat(hinv.asDiagonal() * comm) * Mat(hinv.asDiagonal());
  // direct path for the consistency report
  Mat comm_dir = cplx(0, 1) * (Mat(hinv.asDiagonal() * a_matrix) -
                               Mat(a_matrix * hinv.asDiagonal()));
  out.path_disagreement = operator_norm_hermitian(
      cplx(0, 1) * (comm_inv - comm_dir));

  Mat x = resolved_window_basis(grid, e.samples, u_cap);
  Mat block = x.adjoint() * (-comm_inv) * x;
  out.report = margin_from_block(block, req, window, u_cap, mourre_tol);
  out.report.residuals["path disagreement"] = out.path_disagreement;
  return out;
}

double adk_check(const ConjugateOperatorSpec& spec, int k,
                 const std::vector<WaveFunction>& states) {
  if (k < 1 || k > 2) throw Error("adk_check: k must be 1 or 2");
  const MomentumGrid& grid = *spec.grid;
  const long n = grid.total();
  RVec h(n), target(n);
  for (long kk = 0; kk < n; ++kk) {
    double w = omega_p(grid.point(kk), spec.params);
    h[kk] = w;
    double th = theta_p(w, spec.params, spec.cutoff);
    if (k == 1) {
      target[kk] = th;  // theta_0 = theta
    } else {
      target[kk] = th * theta_p_deriv(w, spec.params, spec.cutoff);
    }
  }
  Vec hd = h.cast<cplx>();
  Mat ad = cplx(0, 1) * (Mat(hd.asDiagonal() * spec.a_matrix) -
                         Mat(spec.a_matrix * hd.asDiagonal()));
  if (k == 2)
    ad = cplx(0, 1) * (ad * spec.a_matrix - spec.a_matrix * ad);

  double worst = 0.0;
  for (const WaveFunction& psi : states) {
    Vec r = ad * psi.amps -
            Vec(target.cast<cplx>().asDiagonal() * psi.amps);
    double nrm = psi.norm();
    if (nrm == 0.0) continue;
    worst = std::max(worst, std::sqrt(grid.weight()) * r.norm() / nrm);
  }
  return worst;
}

}  // namespace mourrekit
