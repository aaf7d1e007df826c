#include "mourrekit/conjugate.hpp"

#include <cmath>

namespace mourrekit {

namespace {
double mollifier(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }
double mollifier_d(double x) {
  return x > 0 ? std::exp(-1.0 / x) / (x * x) : 0.0;
}
// smoothstep 0 -> 1 on [0, 1]
double sstep(double x) {
  double a = mollifier(x);
  double b = mollifier(1.0 - x);
  return a / (a + b);
}
double sstep_d(double x) {
  double a = mollifier(x);
  double b = mollifier(1.0 - x);
  double denom = (a + b) * (a + b);
  return (mollifier_d(x) * b + a * mollifier_d(1.0 - x)) / denom;
}
}  // namespace

CutoffSpec make_cutoff(double eps, double beta) {
  if (eps <= 0) throw Error("cutoff: eps must be positive");
  if (beta + 1.0 <= eps / 2.0)
    throw Error("cutoff: plateau (eps/2, beta+1) is empty");
  return CutoffSpec{eps, beta};
}

double CutoffSpec::value(double lambda) const {
  const double l0 = eps / 4.0, l1 = eps / 2.0;
  const double r1 = beta + 1.0, r0 = beta + 2.0;
  if (lambda <= l0 || lambda >= r0) return 0.0;
  if (lambda < l1) return sstep((lambda - l0) / (l1 - l0));
  if (lambda <= r1) return 1.0;
  return sstep((r0 - lambda) / (r0 - r1));
}

double CutoffSpec::deriv(double lambda) const {
  const double l0 = eps / 4.0, l1 = eps / 2.0;
  const double r1 = beta + 1.0, r0 = beta + 2.0;
  if (lambda <= l0 || lambda >= r0) return 0.0;
  if (lambda < l1) return sstep_d((lambda - l0) / (l1 - l0)) / (l1 - l0);
  if (lambda <= r1) return 0.0;
  return -sstep_d((r0 - lambda) / (r0 - r1)) / (r0 - r1);
}

double theta_p(double lambda, const DispersionParams& par,
               const CutoffSpec& cutoff) {
  return cutoff.value(lambda - 2.0 * omega(0.5 * par.total_momentum, par.mass));
}

double theta_p_deriv(double lambda, const DispersionParams& par,
                     const CutoffSpec& cutoff) {
  return cutoff.deriv(lambda - 2.0 * omega(0.5 * par.total_momentum, par.mass));
}

RVec vector_field_F(const RVec& q, const DispersionParams& par,
                    const CutoffSpec& cutoff, double b_floor) {
  double th = theta_p(omega_p(q, par), par, cutoff);
  if (th == 0.0) return RVec::Zero(q.size());
  RVec g = grad_omega_p(q, par);
  double g2 = g.squaredNorm();
  if (b_floor > 0 && std::sqrt(g2) < 0.5 * b_floor)
    throw Error("vector_field_F: |grad omega_p| below b/2 inside the cutoff "
                "support; construction inconsistent");
  if (g2 == 0.0)
    throw Error("vector_field_F: vanishing gradient with active cutoff");
  return (th / g2) * g;
}

double div_F_closed_form(const RVec& q, const DispersionParams& par,
                         const CutoffSpec& cutoff) {
  double w = omega_p(q, par);
  double th = theta_p(w, par, cutoff);
  double thd = theta_p_deriv(w, par, cutoff);
  if (th == 0.0 && thd == 0.0) return 0.0;
  RVec g = grad_omega_p(q, par);
  double g2 = g.squaredNorm();
  if (g2 == 0.0) return 0.0;
  return thd - th * laplacian_omega_p(q, par) / g2;
}

ConjugateOperatorSpec assemble_Ap(const MomentumGrid& grid,
                                  const DispersionParams& par,
                                  const CutoffSpec& cutoff) {
  const long n = grid.total();
  const int s = grid.dim();
  ConjugateOperatorSpec spec;
  spec.grid = &grid;
  spec.params = par;
  spec.cutoff = cutoff;
  spec.f_samples.assign(s, RVec::Zero(n));
  spec.div_f_closed = RVec::Zero(n);
  spec.theta_samples = RVec::Zero(n);

  for (long k = 0; k < n; ++k) {
    RVec q = grid.point(k);
    spec.theta_samples[k] = theta_p(omega_p(q, par), par, cutoff);
    RVec f = vector_field_F(q, par, cutoff);
    for (int j = 0; j < s; ++j) spec.f_samples[j][k] = f[j];
    spec.div_f_closed[k] = div_F_closed_form(q, par, cutoff);
  }

  // active support must not touch the outermost layer (stencil reach)
  for (long k = 0; k < n; ++k) {
    if (!grid.on_boundary(k)) continue;
    if (spec.theta_samples[k] != 0.0)
      throw Error("assemble_Ap: cutoff support touches the grid boundary; "
                  "enlarge grid extent");
  }

  // finite-difference divergence of the sampled field
  spec.div_f_fd = RVec::Zero(n);
  for (int j = 0; j < s; ++j) {
    WaveFunction fj{&grid, spec.f_samples[j].cast<cplx>()};
    // field vanishes on the boundary by the check above
    WaveFunction dj = derivative(fj, j, 1.0);
    for (long k = 0; k < n; ++k) spec.div_f_fd[k] += dj.amps[k].real();
  }
  spec.div_discrepancy_max = 0.0;
  for (long k = 0; k < n; ++k) {
    if (spec.theta_samples[k] == 0.0 && spec.div_f_fd[k] == 0.0) continue;
    spec.div_discrepancy_max = std::max(
        spec.div_discrepancy_max,
        std::abs(spec.div_f_closed[k] - spec.div_f_fd[k]));
  }

  // A = sum_j (M_Fj U_j + U_j M_Fj)/2, exactly Hermitian
  spec.a_matrix = Mat::Zero(n, n);
  for (int j = 0; j < s; ++j) {
    Mat uj = position_operator(grid, j);
    Vec fc = spec.f_samples[j].cast<cplx>();
    spec.a_matrix += 0.5 * (Mat(fc.asDiagonal() * uj) +
                            Mat(uj * fc.asDiagonal()));
  }
  return spec;
}

double commutator_residual(const ConjugateOperatorSpec& spec,
                           const std::vector<WaveFunction>& states) {
  const MomentumGrid& grid = *spec.grid;
  const long n = grid.total();
  RVec h(n);
  for (long k = 0; k < n; ++k)
    h[k] = omega_p(grid.point(k), spec.params);

  // i[M_h, A] psi - theta psi
  double worst = 0.0;
  for (const WaveFunction& psi : states) {
    Vec apsi = spec.a_matrix * psi.amps;
    Vec hpsi = h.cast<cplx>().asDiagonal() * psi.amps;
    Vec comm = cplx(0, 1) * (h.cast<cplx>().asDiagonal() * apsi -
                             spec.a_matrix * hpsi);
    Vec resid = comm - Vec(spec.theta_samples.cast<cplx>().asDiagonal() *
                           psi.amps);
    double nrm = psi.norm();
    if (nrm == 0.0) continue;
    double r = std::sqrt(grid.weight()) * resid.norm() / nrm;
    if (r > worst) worst = r;
  }
  return worst;
}

std::vector<WaveFunction> plateau_gaussians(const MomentumGrid& grid,
                                            const ConjugateOperatorSpec& spec,
                                            double sigma0, int per_side) {
  if (grid.dim() != 1)
    throw Error("plateau_gaussians: 1-d grids only");
  const long n = grid.total();
  // contiguous runs of theta == 1
  std::vector<std::pair<long, long>> runs;
  long start = -1;
  for (long k = 0; k < n; ++k) {
    bool on = spec.theta_samples[k] >= 1.0 - 1e-14;
    if (on && start < 0) start = k;
    if ((!on || k == n - 1) && start >= 0) {
      runs.emplace_back(start, on ? k : k - 1);
      start = -1;
    }
  }
  std::vector<WaveFunction> out;
  for (auto [a, b] : runs) {
    double ql = grid.coord(a, 0) + 2.0 * sigma0;
    double qr = grid.coord(b, 0) - 2.0 * sigma0;
    if (qr < ql) continue;
    for (int i = 0; i < per_side; ++i) {
      double t = per_side == 1 ? 0.5 : static_cast<double>(i) / (per_side - 1);
      double qc = ql + t * (qr - ql);
      WaveFunction g{&grid, Vec(n)};
      for (long k = 0; k < n; ++k) {
        double d = grid.coord(k, 0) - qc;
        g.amps[k] = std::exp(-d * d / (2.0 * sigma0 * sigma0));
      }
      g.amps /= std::sqrt(grid.weight()) * g.amps.norm();
      out.push_back(std::move(g));
    }
  }
  if (out.empty())
    throw Error("plateau_gaussians: plateau too narrow for sigma0");
  return out;
}

}  // namespace mourrekit
