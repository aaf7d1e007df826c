#include "mourrekit/lap.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace mourrekit {

BracketFamily BracketFamily::of(const Mat& hermitian) {
  require_hermitian(hermitian);
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian);
  if (es.info() != Eigen::Success)
    throw Error("BracketFamily: eigendecomposition failed");
  return BracketFamily{es.eigenvectors(), es.eigenvalues()};
}

Mat BracketFamily::power(double p) const {
  RVec scal(values.size());
  for (int i = 0; i < values.size(); ++i)
    scal[i] = std::pow(1.0 + values[i] * values[i], 0.5 * p);
  Mat out = vectors * scal.asDiagonal() * vectors.adjoint();
  return 0.5 * (out + Mat(out.adjoint()));
}

double sandwich_norm(const Mat& w1, const Vec& d, const Mat& w2, int iters) {
  const long n = w2.cols();
  Vec x(n);
  for (long j = 0; j < n; ++j) x[j] = 1.0 + 0.5 * std::cos(2.3 * j);
  x /= x.norm();
  // power iteration on M^* M with M = W1 diag(d) W2
  Vec y(n), z(n);
  for (int it = 0; it < iters; ++it) {
    y = w2 * x;
    y.array() *= d.array();
    y = w1 * y;                       // y = M x
    z = w1.adjoint() * y;
    z.array() *= d.conjugate().array();
    z = w2.adjoint() * z;             // z = M^* M x
    double nz = z.norm();
    if (nz == 0.0) return 0.0;
    x = z / nz;
  }
  y = w2 * x;
  y.array() *= d.array();
  y = w1 * y;
  return y.norm();
}

double weighted_resolvent_norm(const MultiplierOperator& h, const Mat& w_minus,
                               double lambda, double mu) {
  if (mu == 0.0)
    throw Error("weighted_resolvent_norm: mu = 0 (boundary values only "
                "through sweep extrapolation)");
  const long n = h.samples.size();
  Vec d(n);
  for (long k = 0; k < n; ++k)
    d[k] = 1.0 / cplx(h.samples[k] - lambda, -mu);
  return sandwich_norm(w_minus, d, w_minus);
}

namespace {
std::vector<double> lambda_mesh(const Interval& i, int interior) {
  std::vector<double> xs;
  xs.push_back(i.lo);
  for (int k = 1; k <= interior; ++k)
    xs.push_back(i.lo + (i.hi - i.lo) * k / (interior + 1.0));
  xs.push_back(i.hi);
  return xs;
}

std::vector<double> mu_mesh(double mu_min, int per_decade) {
  std::vector<double> xs;
  double decades = std::log10(1.0 / mu_min);
  int count = std::max(2, static_cast<int>(std::ceil(decades * per_decade)));
  for (int k = 0; k <= count; ++k) {
    double t = static_cast<double>(k) / count;
    xs.push_back(mu_min * std::pow(1.0 / mu_min, t));
  }
  if (xs.back() >= 1.0) xs.back() = 1.0 - 1e-12;  // mu in (0, 1)
  return xs;
}
}  // namespace

ResolventSweep lap_supremum(const MultiplierOperator& h, const Mat& w_minus,
                            const Interval& i, const SweepConfig& cfg) {
  if (i.empty()) throw Error("lap_supremum: empty interval");
  ResolventSweep sw;
  sw.lambdas = lambda_mesh(i, cfg.lambda_points);
  sw.mus = mu_mesh(cfg.mu_min, cfg.mu_per_decade);
  const long nl = static_cast<long>(sw.lambdas.size());
  const long nm = static_cast<long>(sw.mus.size());
  sw.values.resize(nl, nm);
  par_for(nl * nm, cfg.exec, [&](std::ptrdiff_t t) {
    long il = t / nm, im = t % nm;
    sw.values(il, im) =
        weighted_resolvent_norm(h, w_minus, sw.lambdas[il], sw.mus[im]);
  });
  sw.supremum = -1.0;
  for (long il = 0; il < nl; ++il)
    for (long im = 0; im < nm; ++im)
      if (sw.values(il, im) > sw.supremum) {
        sw.supremum = sw.values(il, im);
        sw.arg_lambda = il;
        sw.arg_mu = im;
      }
  // saturation: sup over lambda at the two ends of the last mu decade
  double at_min = sw.values.col(0).maxCoeff();
  long im10 = 0;
  for (long im = 0; im < nm; ++im)
    if (sw.mus[im] <= 10.0 * sw.mus[0]) im10 = im;
  double at_min10 = sw.values.col(im10).maxCoeff();
  sw.saturation_change =
      at_min == 0.0 ? 0.0 : std::abs(at_min - at_min10) / at_min;
  sw.saturated = sw.saturation_change < 0.01;
  return sw;
}

LapConstants explicit_constants(double a, double norm_h, double norm_ha,
                                double norm_haa, double alpha, double beta,
                                double delta, double nu) {
  if (a <= 0) throw Error("explicit_constants: a must be positive");
  if (delta <= 0) throw Error("explicit_constants: delta must be positive");
  if (nu <= 0.5 || nu > 1.0)
    throw Error("explicit_constants: nu must lie in (1/2, 1]");
  LapConstants c;
  c.a = a;
  c.alpha = alpha;
  c.beta = beta;
  c.delta = delta;
  c.nu = nu;
  c.c1 = norm_h + norm_ha + (1.0 + 4.0 / a) * norm_ha * norm_ha + norm_haa +
         a + std::abs(alpha) + std::abs(beta) + 1.0;
  c.c2 = std::sqrt(2.0 / a) + std::sqrt(8.0 * c.c1 / a) / delta;
  c.c3 = 4.0 * c.c2 + 2.0 * c.c1 * c.c2 * c.c2;
  c.eps0 = std::min(std::sqrt(a) * delta / (4.0 * c.c1),
                    delta * delta / (16.0 * c.c1 * c.c1));
  double expo = c.c3 * c.eps0;
  double inner = std::sqrt(4.0 / (a * c.eps0) +
                           c.c3 * std::pow(c.eps0, nu) / nu) +
                 c.c3 * std::pow(c.eps0, nu - 0.5) / (nu - 0.5);
  c.bound = expo > 700.0 ? std::numeric_limits<double>::infinity()
                         : inner * inner * std::exp(expo);
  return c;
}

namespace {
// integral over (0, eps0) on a geometrically graded mesh, summed from the
// singular end upward; rejects non-integrable integrands
double graded_integral(const std::function<double(double)>& f, double eps0) {
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                               0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  const double ratio = 0.5;
  const int levels = 48;  // eps0 * 2^-48 ~ 4e-15 eps0
  std::vector<double> cells;
  double hi = eps0;
  for (int l = 0; l < levels; ++l) {
    double lo = hi * ratio;
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int g = 0; g < 5; ++g) {
      double v = f(mid + half * gx[g]);
      if (!std::isfinite(v) || v < 0)
        throw Error("diffineq_bound: theta not finite/nonnegative on (0, eps0)");
      s += gw[g] * v;
    }
    cells.push_back(s * half);
    hi = lo;
  }
  // integrability: contributions near 0 must decay
  double tail_last = cells[levels - 1];
  double tail_prev = cells[levels - 2];
  if (tail_last > tail_prev && tail_last > 1e-12 * cells[0])
    throw Error("diffineq_bound: theta not integrable at 0");
  double total = 0.0;
  for (int l = levels - 1; l >= 0; --l) total += cells[l];
  // geometric tail estimate below the mesh floor
  if (tail_prev > 0 && tail_last < tail_prev) {
    double r = tail_last / tail_prev;
    total += tail_last * r / (1.0 - r);
  }
  return total;
}
}  // namespace

double diffineq_bound(double phi_end,
                      const std::function<double(double)>& theta1,
                      const std::function<double(double)>& theta2,
                      double gamma, double eps0) {
  if (eps0 <= 0) throw Error("diffineq_bound: eps0 must be positive");
  if (phi_end < 0) throw Error("diffineq_bound: phi_end must be >= 0");
  double i1 = graded_integral(theta1, eps0);
  double i2 = graded_integral(theta2, eps0);
  double root = std::sqrt(phi_end + i1) + i2;
  return root * root * std::exp(gamma * eps0);
}

GapTransferResult gap_transfer(const MultiplierOperator& h,
                               const BracketFamily& a_brackets,
                               const Interval& i, double nu, double lambda0,
                               double mourre_a_r, double delta_tilde,
                               const SweepConfig& cfg) {
  const long n = h.samples.size();
  double dist = std::numeric_limits<double>::infinity();
  for (long k = 0; k < n; ++k)
    dist = std::min(dist, std::abs(h.samples[k] - lambda0));
  if (dist <= 0.0)
    throw Error("gap_transfer: lambda0 lies in the spectrum");
  if (i.contains(lambda0))
    throw Error("gap_transfer: lambda0 inside the window of interest");

  GapTransferResult out;
  double tl = 1.0 / (i.hi - lambda0);
  double th = 1.0 / (i.lo - lambda0);
  out.i_tilde = Interval{std::min(tl, th), std::max(tl, th), false};

  MultiplierOperator r{h.grid, RVec(n)};
  for (long k = 0; k < n; ++k) r.samples[k] = 1.0 / (h.samples[k] - lambda0);

  Mat w_minus = a_brackets.power(-nu);
  Mat w_plus1 = a_brackets.power(1.0);
  Mat w_minus1 = a_brackets.power(-1.0);

  // ||<A>^nu R <A>^-nu|| <= ||R||^{1-nu} ||<A> R <A>^{-1}||^{nu}
  Mat rd = r.samples.cast<cplx>().asDiagonal();
  double norm_r = r.samples.cwiseAbs().maxCoeff();
  double interp_core = operator_norm(w_plus1 * rd * w_minus1);
  out.interp_factor =
      std::pow(norm_r, 1.0 - nu) * std::pow(interp_core, nu);

  // mapped sweep of the direct mesh through the reciprocal
  std::vector<double> ls = lambda_mesh(i, cfg.lambda_points);
  std::vector<double> ms = mu_mesh(cfg.mu_min, cfg.mu_per_decade);
  const long nl = static_cast<long>(ls.size());
  const long nm = static_cast<long>(ms.size());
  std::vector<double> vals(nl * nm, 0.0);
  std::vector<double> lt(nl), mt(nl * nm);
  for (long il = 0; il < nl; ++il) lt[il] = 1.0 / (ls[il] - lambda0);
  int mu_ge_one = 0;
  for (long il = 0; il < nl; ++il)
    for (long im = 0; im < nm; ++im) {
      double dl = ls[il] - lambda0;
      double m = ms[im] / (dl * dl + ms[im] * ms[im]);
      mt[il * nm + im] = m;
      if (m >= 1.0) ++mu_ge_one;
    }
  out.mu_ge_one_count = mu_ge_one;
  par_for(nl * nm, cfg.exec, [&](std::ptrdiff_t t) {
    long il = t / nm, im = t % nm;
    vals[t] = weighted_resolvent_norm(r, w_minus, lt[il], mt[t]);
  });
  double inner_sup = 0.0;
  double bound = 0.0;
  for (long il = 0; il < nl; ++il) {
    double al = std::abs(lt[il]);
    for (long im = 0; im < nm; ++im) {
      double v = vals[il * nm + im];
      inner_sup = std::max(inner_sup, v);
      bound = std::max(bound,
                       al * (al + 1.0 / al + v) * out.interp_factor);
    }
  }
  out.inner_measured_sup = inner_sup;
  out.bound = bound;

  // explicit-constant route: Thm-style bound for R on I_tilde
  Mat a_mat = a_brackets.vectors *
              a_brackets.values.cast<cplx>().asDiagonal() *
              a_brackets.vectors.adjoint();
  Mat comm_ra = rd * a_mat - a_mat * rd;
  double norm_ra = operator_norm(comm_ra);
  double norm_raa = operator_norm(comm_ra * a_mat - a_mat * comm_ra);
  out.r_constants =
      explicit_constants(mourre_a_r, norm_r, norm_ra, norm_raa,
                         out.i_tilde.lo, out.i_tilde.hi, delta_tilde, nu);
  out.inner_explicit = std::max(out.r_constants.bound, 1.0);
  double alm = std::max(std::abs(out.i_tilde.lo), std::abs(out.i_tilde.hi));
  double aln = std::min(std::abs(out.i_tilde.lo), std::abs(out.i_tilde.hi));
  double pref = std::max(alm * (alm + 1.0 / alm + out.inner_explicit),
                         aln * (aln + 1.0 / aln + out.inner_explicit));
  out.explicit_bound = pref * out.interp_factor;
  return out;
}

InterpolationResult interpolation_check(const Mat& x, const Mat& s1,
                                        const Mat& s2, double nu) {
  if (nu < 0.0 || nu > 1.0)
    throw Error("interpolation_check: nu must lie in [0, 1]");
  Eigen::SelfAdjointEigenSolver<Mat> e1(s1), e2(s2);
  if (e1.info() != Eigen::Success || e2.info() != Eigen::Success)
    throw Error("interpolation_check: eigendecomposition failed");
  if (e1.eigenvalues().minCoeff() <= 0 || e2.eigenvalues().minCoeff() <= 0)
    throw Error("interpolation_check: S1, S2 must be positive definite");
  auto frac_power = [](const Eigen::SelfAdjointEigenSolver<Mat>& es,
                       double p) {
    RVec s(es.eigenvalues().size());
    for (int i = 0; i < s.size(); ++i) s[i] = std::pow(es.eigenvalues()[i], p);
    return Mat(es.eigenvectors() * s.asDiagonal() *
               es.eigenvectors().adjoint());
  };
  InterpolationResult r;
  r.lhs = operator_norm(frac_power(e1, nu) * x * frac_power(e2, nu));
  r.rhs = std::pow(operator_norm(x), 1.0 - nu) *
          std::pow(operator_norm(s1 * x * s2), nu);
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-10);
  return r;
}

}  // namespace mourrekit
