#include "mourrekit/kato.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mourrekit {

namespace {
// composite Simpson weights on a uniform mesh with an even interval count
std::vector<double> simpson_weights(long samples, double dt) {
  std::vector<double> w(samples, 0.0);
  for (long k = 0; k + 2 < samples; k += 2) {
    w[k] += dt / 3.0;
    w[k + 1] += 4.0 * dt / 3.0;
    w[k + 2] += dt / 3.0;
  }
  return w;
}

double norm2_weighted(const MomentumGrid& g, const Vec& v) {
  return g.weight() * v.squaredNorm();
}
}  // namespace

LocalDecayResult local_decay_integral(const Mat& t_weight,
                                      const MultiplierOperator& h,
                                      const Interval& i,
                                      const WaveFunction& f, double t_max,
                                      double dt, double nu, double mu_damping,
                                      Exec exec) {
  if (nu <= 0.5) throw Error("local_decay_integral: nu must exceed 1/2");
  const MomentumGrid& grid = *h.grid;
  const long n = grid.total();
  MultiplierOperator e = spectral_projection(h, i);
  Vec g(n);
  for (long k = 0; k < n; ++k) g[k] = e.samples[k] * f.amps[k];

  long half = std::max<long>(8, static_cast<long>(std::ceil(t_max / dt)));
  if (half % 2) ++half;
  const long samples = 2 * half + 1;
  const double step = t_max / half;
  std::vector<double> integrand(samples);
  par_for(samples, exec, [&](std::ptrdiff_t k) {
    double tau = (static_cast<double>(k) - half) * step;
    Vec ph(n);
    for (long j = 0; j < n; ++j)
      ph[j] = std::polar(1.0, tau * h.samples[j]) * g[j];
    double v = norm2_weighted(grid, t_weight * ph);
    if (mu_damping > 0) v *= std::exp(-2.0 * mu_damping * std::abs(tau));
    integrand[k] = v;
  });
  std::vector<double> w = simpson_weights(samples, step);

  LocalDecayResult out;
  out.t_max = t_max;
  out.dt = step;
  for (long k = 0; k < samples; ++k) out.integral += w[k] * integrand[k];

  // tail: free-exponent fit over the final decade, both signs pooled
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long cnt = 0;
  double cmax = 0.0;
  for (long k = 0; k < samples; ++k) {
    double tau = std::abs((static_cast<double>(k) - half) * step);
    if (tau < 0.1 * t_max || integrand[k] <= 0) continue;
    double lx = std::log(tau), ly = std::log(integrand[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
    cmax = std::max(cmax, integrand[k] * std::pow(tau, 2.0 * nu));
  }
  if (cnt < 4) {
    out.tail_flagged = true;
    return out;
  }
  double denom = cnt * sxx - sx * sx;
  out.fit_exponent = denom == 0 ? 0.0 : (cnt * sxy - sx * sy) / denom;
  if (out.fit_exponent >= 0.0) {
    out.tail_flagged = true;
    return out;
  }
  // upper-estimate model C tau^{-2 nu}, both tails
  out.tail = 2.0 * cmax * std::pow(t_max, 1.0 - 2.0 * nu) / (2.0 * nu - 1.0);
  return out;
}

CpResult cp_bound(const MultiplierOperator& h, const Mat& w_minus,
                  const Interval& i, const SweepConfig& cfg) {
  CpResult out;
  ResolventSweep sw;
  // imaginary-part sweep shares the lap mesh structure
  sw.lambdas.push_back(i.lo);
  for (int k = 1; k <= cfg.lambda_points; ++k)
    sw.lambdas.push_back(i.lo + (i.hi - i.lo) * k / (cfg.lambda_points + 1.0));
  sw.lambdas.push_back(i.hi);
  double decades = std::log10(1.0 / cfg.mu_min);
  int count =
      std::max(2, static_cast<int>(std::ceil(decades * cfg.mu_per_decade)));
  for (int k = 0; k <= count; ++k)
    sw.mus.push_back(cfg.mu_min *
                     std::pow(1.0 / cfg.mu_min, static_cast<double>(k) / count));
  if (sw.mus.back() >= 1.0) sw.mus.back() = 1.0 - 1e-12;

  const long n = h.samples.size();
  const long nl = static_cast<long>(sw.lambdas.size());
  const long nm = static_cast<long>(sw.mus.size());
  sw.values.resize(nl, nm);
  par_for(nl * nm, cfg.exec, [&](std::ptrdiff_t t) {
    long il = t / nm, im = t % nm;
    double lam = sw.lambdas[il], mu = sw.mus[im];
    Vec d(n);
    for (long k = 0; k < n; ++k) {
      double dh = h.samples[k] - lam;
      d[k] = mu / (dh * dh + mu * mu);
    }
    sw.values(il, im) = sandwich_norm(w_minus, d, w_minus);
  });
  sw.supremum = -1.0;
  for (long il = 0; il < nl; ++il)
    for (long im = 0; im < nm; ++im)
      if (sw.values(il, im) > sw.supremum) {
        sw.supremum = sw.values(il, im);
        sw.arg_lambda = il;
        sw.arg_mu = im;
      }
  double at_min = sw.values.col(0).maxCoeff();
  long im10 = 0;
  for (long im = 0; im < nm; ++im)
    if (sw.mus[im] <= 10.0 * sw.mus[0]) im10 = im;
  double at_min10 = sw.values.col(im10).maxCoeff();
  sw.saturation_change =
      at_min == 0.0 ? 0.0 : std::abs(at_min - at_min10) / at_min;
  sw.saturated = sw.saturation_change < 0.01;
  out.sweep = std::move(sw);
  out.value = 8.0 * out.sweep.supremum;
  return out;
}

TwoPathResult two_path_check(const Mat& t_weight, const MultiplierOperator& h,
                             const Interval& k, const WaveFunction& f,
                             double mu, Exec exec) {
  if (mu <= 0) throw Error("two_path_check: mu must be positive");
  const MomentumGrid& grid = *h.grid;
  const long n = grid.total();
  MultiplierOperator e = spectral_projection(h, k);
  Vec g(n);
  for (long j = 0; j < n; ++j) g[j] = e.samples[j] * f.amps[j];

  TwoPathResult out;
  // time side: damping truncates itself once e^{-2 mu tau} < 1e-10
  double t_max = 11.6 / mu;
  double dt = std::min(kPi / (4.0 * (h.samples.cwiseAbs().maxCoeff() + 1.0)),
                       t_max / 64.0);
  long half = static_cast<long>(std::ceil(t_max / dt));
  if (half % 2) ++half;
  const long samples = 2 * half + 1;
  const double step = t_max / half;
  std::vector<double> integrand(samples);
  par_for(samples, exec, [&](std::ptrdiff_t kk) {
    double tau = (static_cast<double>(kk) - half) * step;
    Vec ph(n);
    for (long j = 0; j < n; ++j)
      ph[j] = std::polar(1.0, tau * h.samples[j]) * g[j];
    integrand[kk] =
        std::exp(-2.0 * mu * std::abs(tau)) * norm2_weighted(grid, t_weight * ph);
  });
  std::vector<double> w = simpson_weights(samples, step);
  for (long kk = 0; kk < samples; ++kk) out.time_side += w[kk] * integrand[kk];

  // frequency side
  double lo = h.samples.minCoeff() - std::max(2.0, 40.0 * mu);
  double hi = h.samples.maxCoeff() + std::max(2.0, 40.0 * mu);
  double dl = mu / 6.0;
  long ns = static_cast<long>(std::ceil((hi - lo) / dl));
  if (ns % 2) ++ns;
  ++ns;  // sample count, even interval count
  double stepl = (hi - lo) / (ns - 1);
  std::vector<double> fint(ns);
  par_for(ns, exec, [&](std::ptrdiff_t kk) {
    double lam = lo + kk * stepl;
    Vec v(n);
    for (long j = 0; j < n; ++j) {
      double dh = h.samples[j] - lam;
      v[j] = mu / (dh * dh + mu * mu) * g[j];
    }
    fint[kk] = norm2_weighted(grid, t_weight * v);
  });
  std::vector<double> wl = simpson_weights(ns, stepl);
  for (long kk = 0; kk < ns; ++kk) out.freq_side += wl[kk] * fint[kk];
  out.freq_side *= 2.0 / kPi;

  double scale = std::max(out.time_side, out.freq_side);
  out.rel_diff =
      scale == 0.0 ? 0.0 : std::abs(out.time_side - out.freq_side) / scale;
  return out;
}

// ---- commuting families ----------------------------------------------------

namespace {
// ||T diag(d)|| by power iteration without forming the product
double right_diag_norm(const Mat& t, const Vec& d, int iters = 80) {
  const long n = t.cols();
  Vec x(n);
  for (long j = 0; j < n; ++j) x[j] = 1.0 + 0.5 * std::cos(2.3 * j);
  x /= x.norm();
  Vec y, z;
  for (int it = 0; it < iters; ++it) {
    y = d.array() * x.array();
    y = t * y;
    z = t.adjoint() * y;
    z = d.conjugate().array() * z.array();
    double nz = z.norm();
    if (nz == 0.0) return 0.0;
    x = z / nz;
  }
  y = d.array() * x.array();
  return (t * y).norm();
}

std::vector<double> family_mu_mesh(const FamilySweepConfig& cfg) {
  std::vector<double> mus;
  double decades = std::log10(1.0 / cfg.mu_min);
  int count =
      std::max(1, static_cast<int>(std::ceil(decades * cfg.mu_per_decade)));
  for (int k = 0; k <= count; ++k)
    mus.push_back(cfg.mu_min *
                  std::pow(1.0 / cfg.mu_min, static_cast<double>(k) / count));
  if (mus.back() >= 1.0) mus.back() = 1.0 - 1e-12;
  return mus;
}
}  // namespace

OptimalConstantResult optimal_constant(
    const Mat& t_weight, const std::vector<const MultiplierOperator*>& hs,
    const std::vector<Interval>& k_box, const std::vector<int>& axes,
    const FamilySweepConfig& cfg) {
  if (axes.empty()) throw Error("optimal_constant: subset a must be nonempty");
  const int na = static_cast<int>(axes.size());
  if (na > 3) throw Error("optimal_constant: |a| capped at 3");
  const long n = hs[0]->samples.size();
  for (const auto* h : hs)
    if (h->samples.size() != n)
      throw Error("optimal_constant: multipliers on different grids");

  // E(K(a)): indicator of h_j in I_j for all j in a
  RVec e = RVec::Ones(n);
  for (int j : axes)
    for (long k = 0; k < n; ++k)
      if (!k_box[j].contains(hs[j]->samples[k])) e[k] = 0.0;

  // per-axis lambda meshes over spectrum +- pad, plus the K(a) mesh
  std::vector<std::vector<double>> lam_wide(na), lam_k(na);
  for (int ia = 0; ia < na; ++ia) {
    int j = axes[ia];
    double lo = hs[j]->samples.minCoeff() - cfg.lambda_pad;
    double hi = hs[j]->samples.maxCoeff() + cfg.lambda_pad;
    for (int k = 0; k < cfg.lambda_points_per_axis; ++k)
      lam_wide[ia].push_back(
          lo + (hi - lo) * k / (cfg.lambda_points_per_axis - 1.0));
    lam_k[ia].push_back(k_box[j].lo);
    for (int k = 1; k + 1 < cfg.lambda_points_per_axis; ++k)
      lam_k[ia].push_back(k_box[j].lo +
                          (k_box[j].hi - k_box[j].lo) * k /
                              (cfg.lambda_points_per_axis - 1.0));
    lam_k[ia].push_back(k_box[j].hi);
  }
  std::vector<double> mus = family_mu_mesh(cfg);

  auto sweep = [&](const std::vector<std::vector<double>>& lam_mesh,
                   bool imaginary_part) {
    long total = 1;
    for (int ia = 0; ia < na; ++ia)
      total *= static_cast<long>(lam_mesh[ia].size());
    long mtot = 1;
    for (int ia = 0; ia < na; ++ia)
      mtot *= static_cast<long>(mus.size());
    std::vector<double> vals(total * mtot, 0.0);
    par_for(total * mtot, cfg.exec, [&](std::ptrdiff_t t) {
      long lt = t / mtot, mt = t % mtot;
      std::vector<double> lam(na), mu(na);
      long rl = lt, rm = mt;
      for (int ia = na - 1; ia >= 0; --ia) {
        lam[ia] = lam_mesh[ia][rl % lam_mesh[ia].size()];
        rl /= lam_mesh[ia].size();
        mu[ia] = mus[rm % mus.size()];
        rm /= mus.size();
      }
      double mu_prod = 1.0;
      for (int ia = 0; ia < na; ++ia) mu_prod *= mu[ia];
      if (!imaginary_part) {
        Vec d(n);
        for (long k = 0; k < n; ++k) {
          cplx r(1.0, 0.0);
          for (int ia = 0; ia < na; ++ia)
            r /= cplx(hs[axes[ia]]->samples[k] - lam[ia], -mu[ia]);
          d[k] = e[k] * r;
        }
        double nrm = right_diag_norm(t_weight, d);
        vals[t] = mu_prod * nrm * nrm;
      } else {
        Vec d(n);
        for (long k = 0; k < n; ++k) {
          double r2 = 1.0;
          for (int ia = 0; ia < na; ++ia) {
            double dh = hs[axes[ia]]->samples[k] - lam[ia];
            r2 /= dh * dh + mu[ia] * mu[ia];
          }
          d[k] = mu_prod * r2;  // Im R_a = prod mu_j R_a^* R_a
        }
        vals[t] = sandwich_norm(t_weight, d, Mat(t_weight.adjoint()));
      }
    });
    double sup = 0.0;
    for (double v : vals) sup = std::max(sup, v);
    return sup;
  };

  OptimalConstantResult out;
  out.c0 = std::pow(2.0, na) * sweep(lam_wide, false);
  out.eight_sup = std::pow(8.0, na) * sweep(lam_k, true);
  out.dominated = out.c0 <= out.eight_sup * (1.0 + 1e-9);
  return out;
}

std::vector<PartitionSet> partition_sets(const std::vector<Interval>& k,
                                         int n) {
  if (n < 1 || n > 3) throw Error("partition_sets: n must be 1..3");
  if (static_cast<int>(k.size()) != n)
    throw Error("partition_sets: box dimension mismatch");
  std::vector<PartitionSet> out;
  for (int mask = (1 << n) - 1; mask >= 0; --mask) {
    PartitionSet ps;
    std::ostringstream desc;
    if (mask == 0) {
      desc << "K(emptyset) = complement of the union of the K(a)";
      ps.member = [k, n](const RVec& x) {
        for (int j = 0; j < n; ++j)
          if (k[j].contains(x[j])) return false;
        return true;
      };
    } else {
      std::vector<int> axes;
      for (int j = 0; j < n; ++j)
        if (mask & (1 << j)) axes.push_back(j);
      ps.axes = axes;
      desc << "K({";
      for (size_t i = 0; i < axes.size(); ++i)
        desc << (i ? "," : "") << axes[i] + 1;
      desc << "}) = ";
      for (int j = 0; j < n; ++j) {
        if (j) desc << " x ";
        if (mask & (1 << j))
          desc << "[" << k[j].lo << "," << k[j].hi << "]";
        else
          desc << "R";
      }
      ps.member = [k, axes](const RVec& x) {
        for (int j : axes)
          if (!k[j].contains(x[j])) return false;
        return true;
      };
    }
    ps.descriptor = desc.str();
    out.push_back(std::move(ps));
  }
  return out;
}

// ---- M(H)_a ----------------------------------------------------------------

namespace {
void split_axes(const MomentumGrid& grid, const std::vector<int>& a_axes,
                std::vector<int>* comp) {
  comp->clear();
  for (int j = 0; j < grid.dim(); ++j)
    if (std::find(a_axes.begin(), a_axes.end(), j) == a_axes.end())
      comp->push_back(j);
}

// marginal over the complementary axes: returns map from flattened a-index
// to integral, with the complementary quadrature weight applied
RVec marginal_over_complement(const MomentumGrid& grid, const RVec& rho,
                              const std::vector<int>& a_axes) {
  std::vector<int> comp;
  split_axes(grid, a_axes, &comp);
  long a_total = 1;
  for (int j : a_axes) a_total *= grid.axis_points(j);
  double wcomp = 1.0;
  for (int j : comp) wcomp *= grid.spacing(j);
  RVec out = RVec::Zero(a_total);
  int idx[8];
  for (long k = 0; k < grid.total(); ++k) {
    grid.unflatten(k, idx);
    long ai = 0;
    for (int j : a_axes) ai = ai * grid.axis_points(j) + idx[j];
    out[ai] += rho[k];
  }
  return out * wcomp;
}
}  // namespace

double mh_norm(const MomentumGrid& grid, const RVec& rho_f,
               const std::vector<int>& a_axes) {
  if (a_axes.empty())
    throw Error("mh_norm: a = emptyset is excluded (M(H)_0 carries no norm)");
  if (rho_f.minCoeff() < 0)
    throw Error("mh_norm: density must be nonnegative");
  RVec marg = marginal_over_complement(grid, rho_f, a_axes);
  return std::sqrt(marg.maxCoeff());
}

SquareIntegrabilityResult square_integrability_check(
    const MomentumGrid& grid, const Vec& f, const Vec& g, const RVec& rho,
    const std::vector<int>& a_axes, double fft_tol) {
  if (a_axes.empty())
    throw Error("square_integrability_check: a must be nonempty");
  if (rho.minCoeff() < 0)
    throw Error("square_integrability_check: rho must be nonnegative");
  const long n = grid.total();
  // LHS via Plancherel of the DFT over the a-axes:
  //   (2 pi)^{|a|} sum_{x_a} | int conj(f) g rho dx^a |^2 prod_a dx
  RVec prod_re(n), prod_im(n);
  for (long k = 0; k < n; ++k) {
    cplx v = std::conj(f[k]) * g[k] * rho[k];
    prod_re[k] = v.real();
    prod_im[k] = v.imag();
  }
  Vec m_re = marginal_over_complement(grid, prod_re, a_axes).cast<cplx>();
  Vec m_im = marginal_over_complement(grid, prod_im, a_axes).cast<cplx>();
  double wa = 1.0;
  for (int j : a_axes) wa *= grid.spacing(j);
  double lhs = 0.0;
  for (long k = 0; k < m_re.size(); ++k) {
    cplx v = m_re[k] + cplx(0, 1) * m_im[k];
    lhs += std::norm(v);
  }
  lhs *= wa * std::pow(2.0 * kPi, static_cast<int>(a_axes.size()));

  // RHS = (2 pi)^{|a|} |||f|||_a^2 ||g||_rho^2
  RVec rho_fd(n);
  for (long k = 0; k < n; ++k) rho_fd[k] = std::norm(f[k]) * rho[k];
  double mnorm = mh_norm(grid, rho_fd, a_axes);
  double g2 = 0.0;
  for (long k = 0; k < n; ++k) g2 += std::norm(g[k]) * rho[k];
  g2 *= grid.weight();
  double rhs =
      std::pow(2.0 * kPi, static_cast<int>(a_axes.size())) * mnorm * mnorm * g2;

  SquareIntegrabilityResult out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.ratio = rhs == 0.0 ? (lhs == 0.0 ? 0.0 : INFINITY) : lhs / rhs;
  out.pass = out.ratio <= 1.0 + fft_tol;
  return out;
}

BoundedEnergyResult mh_bounded_energy_check(
    const MomentumGrid& grid, const RVec& rho_f,
    const std::vector<int>& a_axes, const std::vector<double>& h_caps) {
  std::vector<int> comp;
  split_axes(grid, a_axes, &comp);
  if (comp.size() != h_caps.size())
    throw Error("mh_bounded_energy_check: one cap per complementary axis");
  // support must respect the caps
  int idx[8];
  for (long k = 0; k < grid.total(); ++k) {
    if (rho_f[k] == 0.0) continue;
    grid.unflatten(k, idx);
    for (size_t c = 0; c < comp.size(); ++c) {
      double x = grid.coord(k, comp[c]);
      if (std::abs(x) > h_caps[c])
        throw Error("mh_bounded_energy_check: density leaks past the cap");
    }
  }
  std::vector<int> all_axes(grid.dim());
  for (int j = 0; j < grid.dim(); ++j) all_axes[j] = j;
  BoundedEnergyResult out;
  out.lhs = mh_norm(grid, rho_f, a_axes);
  double prod = 1.0;
  for (double hcap : h_caps) prod *= 2.0 * hcap;
  out.rhs = std::sqrt(prod) * mh_norm(grid, rho_f, all_axes);
  out.pass = out.lhs <= out.rhs * (1.0 + 1e-9);
  return out;
}

}  // namespace mourrekit
