#include "mourrekit/dispersion.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mourrekit {

double omega(const RVec& q, double m) {
  return std::sqrt(m * m + q.squaredNorm());
}

double omega1(double q, double m) { return std::sqrt(m * m + q * q); }

double omega_p(const RVec& q, const DispersionParams& par) {
  RVec half = 0.5 * par.total_momentum;
  return omega(half + q, par.mass) + omega(half - q, par.mass);
}

RVec grad_omega_p(const RVec& q, const DispersionParams& par) {
  RVec half = 0.5 * par.total_momentum;
  RVec a = half + q;
  RVec b = half - q;
  return a / omega(a, par.mass) - b / omega(b, par.mass);
}

double laplacian_omega_p(const RVec& q, const DispersionParams& par) {
  const int s = par.sdim();
  RVec half = 0.5 * par.total_momentum;
  RVec a = half + q;
  RVec b = half - q;
  double wa = omega(a, par.mass);
  double wb = omega(b, par.mass);
  return s / wa + s / wb - a.squaredNorm() / (wa * wa * wa) -
         b.squaredNorm() / (wb * wb * wb);
}

double beta_cap(const Box& k1, const Box& k2, double m) {
  if (!k1.lo.allFinite() || !k1.hi.allFinite() || !k2.lo.allFinite() ||
      !k2.hi.allFinite())
    throw Error("beta_cap: unbounded box");
  return omega(k1.max_abs_corner(), m) + omega(k2.max_abs_corner(), m);
}

namespace {
// uniform mesh over a box, n points per axis
template <typename F>
void box_sweep(const Box& box, int n, F&& fn) {
  const int s = box.dim();
  std::vector<int> idx(s, 0);
  RVec x(s);
  while (true) {
    for (int j = 0; j < s; ++j) {
      double t = (n == 1) ? 0.5 : static_cast<double>(idx[j]) / (n - 1);
      x[j] = box.lo[j] + t * (box.hi[j] - box.lo[j]);
    }
    fn(x);
    int j = s - 1;
    while (j >= 0 && ++idx[j] == n) idx[j--] = 0;
    if (j < 0) break;
  }
}
}  // namespace

DispersionParams make_dispersion_params(double m, const RVec& p, const Box& k1,
                                        const Box& k2, double epsilon_override,
                                        int minimizer_mesh, double rel_gap) {
  if (m <= 0) throw Error("dispersion: mass must be positive");
  DispersionParams par;
  par.mass = m;
  par.total_momentum = p;
  par.k1 = k1;
  par.k2 = k2;
  par.k_tot = Box::minkowski_sum(k1, k2);
  par.k_rel = Box::minkowski_diff(k1, k2);
  if (par.k_rel.dist_to_origin() < rel_gap)
    throw Error("dispersion: K_rel is not separated from 0");

  if (epsilon_override > 0) {
    par.epsilon = epsilon_override;
    return par;
  }
  // eps = 0.9 * inf { omega_p(q) - 2 omega(p/2) : 2q in K_rel, p in K_tot }
  Box half_rel{0.5 * par.k_rel.lo, 0.5 * par.k_rel.hi};
  double best = std::numeric_limits<double>::infinity();
  box_sweep(par.k_tot, minimizer_mesh, [&](const RVec& pt) {
    DispersionParams loc = par;
    loc.total_momentum = pt;
    double base = 2.0 * omega(0.5 * pt, m);
    box_sweep(half_rel, minimizer_mesh, [&](const RVec& q) {
      double v = omega_p(q, loc) - base;
      if (v < best) best = v;
    });
  });
  if (!(best > 0))
    throw Error("dispersion: separation minimizer returned a non-positive "
                "gap; K_rel too close to 0");
  par.epsilon = 0.9 * best;
  return par;
}

double gradient_lower_bound(const DispersionParams& par, const Interval& j,
                            int mesh) {
  // q-range covering the preimage: omega(p/2+q) <= omega_p(q) <= j.hi
  double pmax = par.k_tot.max_abs_corner().norm();
  double qmax = j.hi + 1.0 + 0.5 * pmax;
  const int s = par.sdim();
  Box qbox{RVec::Constant(s, -qmax), RVec::Constant(s, qmax)};
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  box_sweep(qbox, mesh, [&](const RVec& q) {
    double w = omega_p(q, par);
    if (w < j.lo || w > j.hi) return;
    any = true;
    double g = grad_omega_p(q, par).norm();
    if (g < best) best = g;
  });
  if (!any) return 0.0;  // window empty on sample: no constraint measured
  return 0.9 * best;
}

IntervalPair intervals(const DispersionParams& par, double beta) {
  double base = 2.0 * omega(0.5 * par.total_momentum, par.mass);
  if (beta <= base + par.epsilon)
    throw Error("intervals: empty spectral window (beta too small)");
  IntervalPair out;
  out.i = Interval{base + par.epsilon, beta, false};
  out.j = Interval{base + 0.5 * par.epsilon, beta + 1.0, true};
  out.delta = std::min(par.epsilon / 4.0, 0.5);
  return out;
}

MultiplierOperator omega_p_multiplier(const MomentumGrid& grid,
                                      const DispersionParams& par) {
  MultiplierOperator m{&grid, RVec(grid.total())};
  for (long k = 0; k < grid.total(); ++k)
    m.samples[k] = omega_p(grid.point(k), par);
  return m;
}

}  // namespace mourrekit
