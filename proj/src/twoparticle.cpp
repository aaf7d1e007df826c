#include "mourrekit/twoparticle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mourrekit/kato.hpp"
#include "mourrekit/lap.hpp"

namespace mourrekit {

namespace {
double mollifier(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }
double sstep01(double x) {  // smoothstep 0 -> 1 on [0, 1]
  double a = mollifier(x);
  double b = mollifier(1.0 - x);
  return a / (a + b);
}
// smooth bump: 1 on [lo+edge, hi-edge], 0 outside [lo, hi]
double bump(double x, double lo, double hi, double edge) {
  if (x <= lo || x >= hi) return 0.0;
  if (x < lo + edge) return sstep01((x - lo) / edge);
  if (x > hi - edge) return sstep01((hi - x) / edge);
  return 1.0;
}

std::vector<double> simpson_weights_nodes(double t1, double t2, double dt_hint,
                                          std::vector<double>* nodes) {
  long m = std::max<long>(4, static_cast<long>(std::ceil((t2 - t1) / dt_hint)));
  if (m % 2) ++m;
  double dt = (t2 - t1) / m;
  nodes->resize(m + 1);
  std::vector<double> w(m + 1, 0.0);
  for (long k = 0; k <= m; ++k) (*nodes)[k] = t1 + k * dt;
  for (long k = 0; k + 2 <= m; k += 2) {
    w[k] += dt / 3.0;
    w[k + 1] += 4.0 * dt / 3.0;
    w[k + 2] += dt / 3.0;
  }
  return w;
}

// closed-form Simpson phase sum: sum_k w_k e^{-i t_k delta} over the
// composite rule on [t1, t1 + m dt]
cplx simpson_phase_sum(double delta, double t1, double dt, long m) {
  cplx z = std::polar(1.0, -dt * delta);
  cplx r = z * z;
  long kk = m / 2;
  auto geom = [&](long terms) -> cplx {
    if (terms <= 0) return cplx(0, 0);
    cplx one_minus_r = cplx(1, 0) - r;
    if (std::abs(one_minus_r) < 1e-8) {
      // series around r = 1
      cplx d = r - cplx(1, 0);
      double n = static_cast<double>(terms);
      return cplx(n, 0) + d * (n * (n - 1.0) / 2.0) +
             d * d * (n * (n - 1.0) * (n - 2.0) / 6.0);
    }
    return (cplx(1, 0) - std::pow(r, static_cast<double>(terms))) /
           one_minus_r;
  };
  cplx s1 = geom(kk);
  cplx s2 = s1 - std::pow(r, static_cast<double>(kk - 1));
  cplx zm = std::polar(1.0, -dt * delta * static_cast<double>(m));
  cplx total = (cplx(1, 0) + zm) + 4.0 * z * s1 + 2.0 * z * z * s2;
  return (dt / 3.0) * std::polar(1.0, -t1 * delta) * total;
}

double hermitian_lambda_max(const Mat& m, int iters = 120) {
  const long n = m.rows();
  Vec x(n);
  for (long j = 0; j < n; ++j) x[j] = 1.0 + 0.5 * std::cos(2.3 * j);
  x /= x.norm();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec y = m * x;
    double ny = y.norm();
    if (ny == 0.0) return 0.0;
    lam = std::real(x.dot(y));
    x = y / ny;
  }
  return std::max(lam, std::real(x.dot(Vec(m * x))));
}

double product_norm(const Mat& a, const Mat& b, int iters = 80) {
  const long n = b.cols();
  Vec x(n);
  for (long j = 0; j < n; ++j) x[j] = 1.0 + 0.5 * std::cos(2.3 * j);
  x /= x.norm();
  Vec y, z;
  for (int it = 0; it < iters; ++it) {
    y = a * (b * x);
    z = b.adjoint() * (a.adjoint() * y);
    double nz = z.norm();
    if (nz == 0.0) return 0.0;
    x = z / nz;
  }
  return (a * (b * x)).norm();
}
}  // namespace

Vec Channel::s_values(double tau) const {
  const int s = cfg.s;
  const long nf = static_cast<long>(fibers.size());
  Vec out = Vec::Zero(nf);
  const double de = model.spacing(0);
  const int ne = model.axis_points(0);
  int idx[8];
  for (long f = 0; f < nf; ++f) {
    // fibers[f] is the model index with E-index 0 at this P point
    cplx acc(0, 0);
    model.unflatten(fibers[f], idx);
    for (int e = 0; e < ne; ++e) {
      idx[0] = e;
      long k = model.flatten(idx);
      if (rho[k] == 0.0) continue;
      double energy = model.coord(k, 0);
      acc += std::conj(psi[k]) * std::polar(1.0, tau * energy) * phi_ep[k] *
             rho[k];
    }
    out[f] = acc * de;
    (void)s;
  }
  return out;
}

double Channel::s_norm2(double tau) const {
  double wp = 1.0;
  for (int j = 1; j < model.dim(); ++j) wp *= model.spacing(j);
  Vec s = s_values(tau);
  return wp * s.squaredNorm();
}

Channel build_channel(const ChannelConfig& cfg) {
  if (cfg.s < 1 || cfg.s > 2)
    throw Error("build_channel: s must be 1 or 2");
  Channel ch;
  ch.cfg = cfg;

  // dispersion data
  RVec p_seed = RVec::Zero(cfg.s);
  ch.disp = make_dispersion_params(cfg.mass, p_seed, cfg.k1, cfg.k2);
  ch.beta = beta_cap(cfg.k1, cfg.k2, cfg.mass);
  ch.cutoff = make_cutoff(ch.disp.epsilon, ch.beta);

  // model grid: axis 0 = E, axes 1..s = P
  {
    std::vector<double> lo{cfg.e_lo}, hi{cfg.e_hi};
    std::vector<int> n{cfg.n_e};
    for (int j = 0; j < cfg.s; ++j) {
      lo.push_back(cfg.p_lo[j]);
      hi.push_back(cfg.p_hi[j]);
      n.push_back(cfg.n_p[j]);
    }
    ch.model = MomentumGrid(1 + cfg.s, lo, hi, n);
  }
  const long nm = ch.model.total();

  // rho: smooth bump in E times smooth bump in each P axis
  ch.rho = RVec::Zero(nm);
  for (long k = 0; k < nm; ++k) {
    double e = ch.model.coord(k, 0);
    double v = bump(e, cfg.rho_e_lo, cfg.rho_e_hi, cfg.rho_e_edge);
    for (int j = 0; j < cfg.s; ++j)
      v *= bump(ch.model.coord(k, 1 + j), cfg.rho_p_lo[j], cfg.rho_p_hi[j],
                cfg.rho_p_edge);
    ch.rho[k] = v;
  }
  // stay clear of the one-particle mass shell E = omega(P)
  for (long k = 0; k < nm; ++k) {
    if (ch.rho[k] == 0.0) continue;
    RVec pp(cfg.s);
    for (int j = 0; j < cfg.s; ++j) pp[j] = ch.model.coord(k, 1 + j);
    if (ch.model.coord(k, 0) - omega(pp, cfg.mass) < cfg.mass_shell_gap)
      throw Error("build_channel: rho support reaches the mass-shell "
                  "stand-in region");
  }
  if (ch.rho.maxCoeff() <= 0.0)
    throw Error("build_channel: rho vanishes on the model grid");

  // psi: smooth profile with a phase twist, normalized in L^2(rho)
  ch.psi = Vec::Zero(nm);
  for (long k = 0; k < nm; ++k) {
    if (ch.rho[k] == 0.0) continue;
    double e = ch.model.coord(k, 0);
    double ph = cfg.psi_phase * e;
    for (int j = 0; j < cfg.s; ++j)
      ph += 0.37 * cfg.psi_phase * ch.model.coord(k, 1 + j);
    ch.psi[k] = std::polar(1.0 + 0.2 * std::sin(2.0 * e), ph);
  }
  double nrm2 = 0.0;
  for (long k = 0; k < nm; ++k) nrm2 += std::norm(ch.psi[k]) * ch.rho[k];
  nrm2 *= ch.model.weight();
  ch.psi /= std::sqrt(nrm2);
  ch.psi_mnorm = 0.0;
  ch.p0 = 0.0;
  for (long k = 0; k < nm; ++k) {
    if (ch.rho[k] == 0.0) continue;
    ch.psi_mnorm =
        std::max(ch.psi_mnorm, std::sqrt(std::norm(ch.psi[k]) * ch.rho[k]));
    ch.p0 = std::max(ch.p0, ch.model.coord(k, 0));
  }

  // fiber grids: q dual to u, symmetric extents
  {
    double dq = 2.0 * cfg.q_extent / cfg.n_u;
    double du = 2.0 * kPi / (cfg.n_u * dq);
    std::vector<double> qlo(cfg.s), qhi(cfg.s), ulo(cfg.s), uhi(cfg.s);
    std::vector<int> n(cfg.s, cfg.n_u);
    for (int j = 0; j < cfg.s; ++j) {
      qlo[j] = -cfg.q_extent;
      qhi[j] = -cfg.q_extent + dq * (cfg.n_u - 1);
      ulo[j] = -0.5 * cfg.n_u * du;
      uhi[j] = -0.5 * cfg.n_u * du + du * (cfg.n_u - 1);
    }
    ch.q_grid = MomentumGrid(cfg.s, qlo, qhi, n);
    ch.u_grid = MomentumGrid(cfg.s, ulo, uhi, n);
  }

  // active fibers: P points carrying rho
  {
    int idx[8];
    long p_total = 1;
    for (int j = 0; j < cfg.s; ++j) p_total *= cfg.n_p[j];
    const int ne = cfg.n_e;
    for (long pk = 0; pk < p_total; ++pk) {
      // build model index with E-index 0
      long rem = pk;
      idx[0] = 0;
      for (int j = cfg.s - 1; j >= 0; --j) {
        idx[1 + j] = static_cast<int>(rem % cfg.n_p[j]);
        rem /= cfg.n_p[j];
      }
      long k0 = ch.model.flatten(idx);
      bool active = false;
      for (int e = 0; e < ne && !active; ++e) {
        idx[0] = e;
        if (ch.rho[ch.model.flatten(idx)] > 0) active = true;
      }
      idx[0] = 0;
      if (active) {
        ch.fibers.push_back(k0);
        RVec pp(cfg.s);
        for (int j = 0; j < cfg.s; ++j)
          pp[j] = ch.model.coord(k0, 1 + j);
        ch.fiber_p.push_back(pp);
      }
    }
    if (ch.fibers.empty())
      throw Error("build_channel: no fiber carries rho support");
  }

  // phi_q: band-limited filter, 2q in K_rel and omega_p(q) <= beta - margin
  // for every active fiber
  {
    const long nq = ch.q_grid.total();
    ch.phi_q = Vec::Zero(nq);
    bool any = false;
    for (long k = 0; k < nq; ++k) {
      RVec q = ch.q_grid.point(k);
      double v = 1.0;
      double gauss = 0.0;
      for (int j = 0; j < cfg.s; ++j) {
        double two_q = 2.0 * q[j];
        v *= bump(two_q, ch.disp.k_rel.lo[j], ch.disp.k_rel.hi[j],
                  2.0 * cfg.phi_edge_q);
        double center = 0.25 * (ch.disp.k_rel.lo[j] + ch.disp.k_rel.hi[j]);
        gauss += (q[j] - center) * (q[j] - center);
      }
      if (v == 0.0) continue;
      // energy cap across active fibers
      double wmax = 0.0;
      for (const RVec& pp : ch.fiber_p) {
        DispersionParams loc = ch.disp;
        loc.total_momentum = pp;
        wmax = std::max(wmax, omega_p(q, loc));
      }
      if (wmax > ch.beta - cfg.beta_margin) continue;
      // window must sit above the separation floor on every fiber
      for (const RVec& pp : ch.fiber_p) {
        DispersionParams loc = ch.disp;
        loc.total_momentum = pp;
        if (omega_p(q, loc) <
            2.0 * omega(0.5 * pp, cfg.mass) + ch.disp.epsilon)
          throw Error("build_channel: separation violated inside the "
                      "relative-momentum window");
      }
      ch.phi_q[k] =
          v * std::exp(-gauss / (2.0 * cfg.phi_sigma_q * cfg.phi_sigma_q));
      any = true;
    }
    if (!any)
      throw Error("build_channel: relative-momentum window is empty after "
                  "the energy cap (support constraints unsatisfiable)");
    // unit L^2 normalization of the filter
    ch.phi_q /= std::sqrt(ch.q_grid.weight()) * ch.phi_q.norm();
  }

  // phi_u: inverse transform of phi_q
  {
    const long n = ch.u_grid.total();
    ch.phi_u = Vec::Zero(n);
    const double wq = ch.q_grid.weight();
    const double pref = wq / std::pow(2.0 * kPi, cfg.s);
    par_for(n, cfg.exec, [&](std::ptrdiff_t ku) {
      RVec u = ch.u_grid.point(ku);
      cplx acc(0, 0);
      for (long kq = 0; kq < ch.q_grid.total(); ++kq) {
        if (ch.phi_q[kq] == cplx(0, 0)) continue;
        RVec q = ch.q_grid.point(kq);
        acc += std::polar(1.0, u.dot(q)) * ch.phi_q[kq];
      }
      ch.phi_u[ku] = pref * acc;
    });
  }

  // phi_ep: smooth model-space profile inside the rho support
  {
    ch.phi_ep = Vec::Zero(nm);
    double margin_e = 0.2 * (cfg.rho_e_hi - cfg.rho_e_lo);
    for (long k = 0; k < nm; ++k) {
      if (ch.rho[k] == 0.0) continue;
      double e = ch.model.coord(k, 0);
      double v = bump(e, cfg.rho_e_lo + 0.1 * margin_e,
                      cfg.rho_e_hi - 0.1 * margin_e, cfg.rho_e_edge);
      for (int j = 0; j < cfg.s; ++j)
        v *= bump(ch.model.coord(k, 1 + j), cfg.rho_p_lo[j], cfg.rho_p_hi[j],
                  cfg.rho_p_edge);
      ch.phi_ep[k] = v * std::polar(1.0, -0.4 * e);
    }
    ch.phi_ep_norm2 = 0.0;
    for (long k = 0; k < nm; ++k)
      ch.phi_ep_norm2 += std::norm(ch.phi_ep[k]) * ch.rho[k];
    ch.phi_ep_norm2 *= ch.model.weight();
    if (ch.phi_ep_norm2 <= 0)
      throw Error("build_channel: model-space profile vanishes");
  }

  // decay certificate: max_u ||phi(u)|| <u>^k
  {
    ch.certificate = RVec::Zero(5);
    double epn = std::sqrt(ch.phi_ep_norm2);
    for (long ku = 0; ku < ch.u_grid.total(); ++ku) {
      double uu = ch.u_grid.point(ku).norm();
      double base = std::abs(ch.phi_u[ku]) * epn;
      double br = std::sqrt(1.0 + uu * uu);
      double w = 1.0;
      for (int k = 0; k <= 4; ++k) {
        ch.certificate[k] = std::max(ch.certificate[k], base * w);
        w *= br;
      }
    }
  }
  return ch;
}

CookKernel cook_kernel(const Channel& ch, double tau) {
  const ChannelConfig& cfg = ch.cfg;
  // v grid: dual of the P axes
  std::vector<double> vlo(cfg.s), vhi(cfg.s);
  std::vector<int> n(cfg.s);
  for (int j = 0; j < cfg.s; ++j) {
    double dp = ch.model.spacing(1 + j);
    int np = ch.model.axis_points(1 + j);
    double dv = 2.0 * kPi / (np * dp);
    vlo[j] = -0.5 * np * dv;
    vhi[j] = -0.5 * np * dv + dv * (np - 1);
    n[j] = np;
  }
  CookKernel out{MomentumGrid(cfg.s, vlo, vhi, n), Mat()};

  Vec s = ch.s_values(tau);
  double wp = 1.0;
  for (int j = 1; j < ch.model.dim(); ++j) wp *= ch.model.spacing(j);

  const long nu_pts = ch.u_grid.total();
  const long nv = out.v_grid.total();
  out.values.resize(nu_pts, nv);
  // T(v) = sum_P e^{-i v.P} S(P) dP^s, kernel = phi_u(u) T(v)
  Vec t = Vec::Zero(nv);
  for (long kv = 0; kv < nv; ++kv) {
    RVec v = out.v_grid.point(kv);
    cplx acc(0, 0);
    for (size_t f = 0; f < ch.fibers.size(); ++f)
      acc += std::polar(1.0, -v.dot(ch.fiber_p[f])) * s[f];
    t[kv] = acc * wp;
  }
  for (long ku = 0; ku < nu_pts; ++ku)
    for (long kv = 0; kv < nv; ++kv)
      out.values(ku, kv) = ch.phi_u[ku] * t[kv];
  return out;
}

std::vector<std::pair<double, double>> geometric_windows(double t0,
                                                         double horizon) {
  std::vector<std::pair<double, double>> w;
  for (double t = t0; t <= horizon * (1.0 + 1e-12); t *= 2.0)
    w.emplace_back(t, 2.0 * t);
  return w;
}

CsChainResult cs_chain(const Channel& ch,
                       const std::vector<std::pair<double, double>>& windows,
                       bool sample_cp) {
  const ChannelConfig& cfg = ch.cfg;
  const long nq = ch.q_grid.total();
  const long nf = static_cast<long>(ch.fibers.size());
  const double two_pi_2s = std::pow(2.0 * kPi, 2 * cfg.s);
  double wp = 1.0;
  for (int j = 1; j < ch.model.dim(); ++j) wp *= ch.model.spacing(j);
  const double pref = wp / two_pi_2s;

  CsChainResult out;
  out.windows.resize(windows.size());
  for (size_t w = 0; w < windows.size(); ++w) {
    out.windows[w].t1 = windows[w].first;
    out.windows[w].t2 = windows[w].second;
  }

  // window tau meshes and S values (fiber-independent)
  struct Mesh {
    std::vector<double> nodes, weights;
    double dt = 0;
    Mat s;  // nodes x fibers
  };
  std::vector<Mesh> meshes(windows.size());
  for (size_t w = 0; w < windows.size(); ++w) {
    meshes[w].weights = simpson_weights_nodes(
        windows[w].first, windows[w].second, cfg.tau_step, &meshes[w].nodes);
    meshes[w].dt = meshes[w].nodes[1] - meshes[w].nodes[0];
    const long nn = static_cast<long>(meshes[w].nodes.size());
    meshes[w].s.resize(nn, nf);
    Mat& sm = meshes[w].s;
    const std::vector<double>& nodes = meshes[w].nodes;
    par_for(nn, cfg.exec, [&](std::ptrdiff_t i) {
      sm.row(i) = ch.s_values(nodes[i]).transpose();
    });
  }

  // shared position bracket on the fiber grid
  Mat u_bracket_minus1 = position_bracket_power(ch.q_grid, -1.0);

  out.c_interp_min = std::numeric_limits<double>::infinity();
  out.c_interp_max = 0.0;

  RVec omega_s(nq);
  for (long f = 0; f < nf; ++f) {
    DispersionParams par = ch.disp;
    par.total_momentum = ch.fiber_p[f];
    ConjugateOperatorSpec spec = assemble_Ap(ch.q_grid, par, ch.cutoff);
    for (long k = 0; k < nq; ++k)
      omega_s[k] = omega_p(ch.q_grid.point(k), par);

    // E(I) must hold the filter exactly
    double s0 = 2.0 * omega(0.5 * par.total_momentum, cfg.mass);
    Interval i_win{s0 + ch.disp.epsilon, ch.beta, false};
    for (long k = 0; k < nq; ++k)
      if (ch.phi_q[k] != cplx(0, 0) && !i_win.contains(omega_s[k]))
        throw Error("cs_chain: filter leaks out of the spectral window");

    BracketFamily ba = BracketFamily::of(spec.a_matrix);
    Mat w2m = ba.power(-2.0 * cfg.nu);   // <A>^{-2 nu}
    Mat wp1 = ba.power(cfg.nu);          // <A>^{+nu}

    double cint = product_norm(ba.power(1.0), u_bracket_minus1);
    out.c_interp_min = std::min(out.c_interp_min, cint);
    out.c_interp_max = std::max(out.c_interp_max, cint);

    // ||<A>^nu phi_q||^2 (grid-weighted)
    double anorm2 = ch.q_grid.weight() * (wp1 * ch.phi_q).squaredNorm();

    if (sample_cp && f < cfg.cp_sample_fibers) {
      SweepConfig scfg;
      scfg.lambda_points = 8;
      scfg.mu_min = 1e-2;
      scfg.mu_per_decade = 3;
      scfg.exec = cfg.exec;
      MultiplierOperator hm{&ch.q_grid, omega_s};
      CpResult cp = cp_bound(hm, ba.power(-cfg.nu), i_win, scfg);
      out.cp_samples.emplace_back(ch.fiber_p[f].norm(), cp.value);
    }

    for (size_t w = 0; w < windows.size(); ++w) {
      const Mesh& mesh = meshes[w];
      const long nn = static_cast<long>(mesh.nodes.size());

      // lhs_p = dq^s (2 pi)^{2s} sum_q |phi_q|^2 |sum_i w_i e^{-i t_i w(q)} S_i|^2
      double lhs_p = 0.0;
      for (long k = 0; k < nq; ++k) {
        if (ch.phi_q[k] == cplx(0, 0)) continue;
        cplx acc(0, 0);
        for (long i = 0; i < nn; ++i)
          acc += mesh.weights[i] *
                 std::polar(1.0, -mesh.nodes[i] * omega_s[k]) * mesh.s(i, f);
        lhs_p += std::norm(ch.phi_q[k]) * std::norm(acc);
      }
      lhs_p *= ch.q_grid.weight() * two_pi_2s;

      // kappa_p = lambda_max( sum_i w_i E U_i^* <A>^{-2nu} U_i E )
      Mat m(nq, nq);
      const long mm = static_cast<long>(mesh.weights.size()) - 1;
      par_for(nq, cfg.exec, [&](std::ptrdiff_t r) {
        bool er = i_win.contains(omega_s[r]);
        for (long c = 0; c < nq; ++c) {
          if (!er || !i_win.contains(omega_s[c])) {
            m(r, c) = cplx(0, 0);
            continue;
          }
          m(r, c) = w2m(r, c) * simpson_phase_sum(omega_s[r] - omega_s[c],
                                                  mesh.nodes[0], mesh.dt, mm);
        }
      });
      double kappa = hermitian_lambda_max(m);

      // fiber integral: sum_i w_i |S_i|^2 (2 pi)^{2s} ||<A>^nu phi_q||^2
      double fib = 0.0;
      for (long i = 0; i < nn; ++i)
        fib += mesh.weights[i] * std::norm(mesh.s(i, f));
      fib *= two_pi_2s * anorm2;

      out.windows[w].lhs += pref * lhs_p;
      out.windows[w].rhs += pref * kappa * fib;
      out.windows[w].kappa_max = std::max(out.windows[w].kappa_max, kappa);
    }
  }

  out.chain_ok = true;
  for (const CsWindowResult& w : out.windows)
    if (w.lhs > w.rhs * (1.0 + cfg.chain_tol)) out.chain_ok = false;
  return out;
}

MicrocausalityResult microcausality_integral(const Channel& ch, double nu,
                                             double tol) {
  const ChannelConfig& cfg = ch.cfg;
  // weighted u factor: sum_u <u>^{2 nu} |phi_u|^2 du^s
  double wu = 0.0;
  for (long ku = 0; ku < ch.u_grid.total(); ++ku) {
    double uu = ch.u_grid.point(ku).squaredNorm();
    wu += std::pow(1.0 + uu, nu) * std::norm(ch.phi_u[ku]);
  }
  wu *= ch.u_grid.weight();

  // integrand(tau) = wu (2 pi)^s sum_P |S|^2 dP^s
  std::vector<double> nodes;
  std::vector<double> w =
      simpson_weights_nodes(-cfg.mc_t_max, cfg.mc_t_max, cfg.tau_step, &nodes);
  const long nn = static_cast<long>(nodes.size());
  std::vector<double> integrand(nn);
  const double ps = std::pow(2.0 * kPi, cfg.s);
  par_for(nn, cfg.exec, [&](std::ptrdiff_t i) {
    integrand[i] = wu * ps * ch.s_norm2(nodes[i]);
  });

  MicrocausalityResult out;
  for (long i = 0; i < nn; ++i) out.lhs += w[i] * integrand[i];

  // tail fit as in the local decay integral
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cmax = 0;
  long cnt = 0;
  for (long i = 0; i < nn; ++i) {
    double tau = std::abs(nodes[i]);
    if (tau < 0.1 * cfg.mc_t_max || integrand[i] <= 0) continue;
    double lx = std::log(tau), ly = std::log(integrand[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
    cmax = std::max(cmax, integrand[i] * std::pow(tau, 2.0 * nu));
  }
  if (cnt >= 4) {
    double denom = cnt * sxx - sx * sx;
    double slope = denom == 0 ? 0 : (cnt * sxy - sx * sy) / denom;
    if (slope < 0)
      out.tail = 2.0 * cmax * std::pow(cfg.mc_t_max, 1.0 - 2.0 * nu) /
                 (2.0 * nu - 1.0);
    else
      out.tail_flagged = true;
  } else {
    out.tail_flagged = true;
  }

  out.rhs = std::pow(2.0 * kPi, 1 + cfg.s) * ch.psi_mnorm * ch.psi_mnorm * wu *
            ch.phi_ep_norm2;
  out.pass = out.lhs + out.tail <= out.rhs * (1.0 + tol);
  return out;
}

TauberianResult tauberian_check(const std::function<Vec(double)>& g,
                                double weight, const TauberianConfig& cfg) {
  if (cfg.t_samples.empty())
    throw Error("tauberian_check: no sample times");
  TauberianResult out;
  const double sw = std::sqrt(weight);

  // peak/last norms over the sampled horizon
  std::vector<double> norms(cfg.t_samples.size());
  for (size_t i = 0; i < cfg.t_samples.size(); ++i)
    norms[i] = sw * g(cfg.t_samples[i]).norm();
  out.g_peak = *std::max_element(norms.begin(), norms.end());
  out.g_last = norms.back();
  out.l2_limit_zero = out.g_last <= cfg.z_factor * out.g_peak;

  // B-convergence: (1/delta) || int_t^{t+delta} g || along the samples,
  // with the square-integral bound checked on the way
  double b_first = -1.0, b_last = 0.0;
  double sq_total = 0.0, sq_last_window = 0.0;
  for (size_t i = 0; i < cfg.t_samples.size(); ++i) {
    double t = cfg.t_samples[i];
    std::vector<double> nodes;
    std::vector<double> w =
        simpson_weights_nodes(t, t + cfg.delta_b, cfg.tau_step, &nodes);
    Vec acc;
    double sq = 0.0;
    for (size_t k = 0; k < nodes.size(); ++k) {
      Vec gv = g(nodes[k]);
      if (k == 0) acc = Vec::Zero(gv.size());
      acc += w[k] * gv;
      sq += w[k] * weight * gv.squaredNorm();
    }
    double bval = sw * acc.norm() / cfg.delta_b;
    double bound = std::sqrt(sq / cfg.delta_b);
    if (bval > bound * (1.0 + 1e-9))
      throw Error("tauberian_check: averaging bound violated (internal)");
    if (b_first < 0) b_first = bval;
    b_last = bval;
    sq_total += sq;
    if (i + 1 == cfg.t_samples.size()) sq_last_window = sq;
  }
  out.b_first = b_first;
  out.b_last = b_last;
  out.b_convergent = b_last <= cfg.b_decay_factor * std::max(b_first, 1e-300);
  out.horizon_flagged =
      sq_total > 0 && sq_last_window > 0.25 * sq_total;

  // slow oscillation against the supplied Lipschitz constant
  if (cfg.lipschitz_l > 0) {
    double worst = 0.0;
    for (size_t i = 0; i + 1 < cfg.t_samples.size(); ++i) {
      double t = cfg.t_samples[i];
      for (double dt : {cfg.tau_step, 4.0 * cfg.tau_step}) {
        Vec d = g(t + dt) - g(t);
        worst = std::max(worst, sw * d.norm() / dt);
      }
    }
    out.lip_max_ratio = worst / cfg.lipschitz_l;
    out.slowly_oscillating = worst <= cfg.lipschitz_l * (1.0 + cfg.lip_tol);
  } else {
    out.slowly_oscillating = true;
  }
  return out;
}

TauberianResult tauberian_on_channel(const Channel& ch, TauberianConfig cfg) {
  const ChannelConfig& c = ch.cfg;
  double wp = 1.0;
  for (int j = 1; j < ch.model.dim(); ++j) wp *= ch.model.spacing(j);
  // ||g(tau)||^2 = phi_norm^2 (2 pi)^s sum_P |S|^2 dP^s with
  // phi_norm^2 = sum_u |phi_u|^2 du^s
  double phin2 = ch.u_grid.weight() * ch.phi_u.squaredNorm();
  double scale = std::sqrt(phin2 * std::pow(2.0 * kPi, c.s));
  auto g = [&ch, scale](double tau) -> Vec {
    return scale * ch.s_values(tau);
  };
  if (cfg.t_samples.empty()) {
    for (double t = c.t0; t <= 2.0 * c.horizon * (1 + 1e-12); t *= 2.0)
      cfg.t_samples.push_back(t);
  }
  // Lipschitz constant from the bounded-energy estimate:
  // ||g(t)-g(s)||^2 <= (2 pi)^s 2 p0^3 |||psi|||^2 |t-s|^2 int ||phi(u)||^2 du
  double phi_l2 = phin2 * ch.phi_ep_norm2;
  cfg.lipschitz_l = std::sqrt(std::pow(2.0 * kPi, c.s) * 2.0 *
                              std::pow(ch.p0, 3) * ch.psi_mnorm *
                              ch.psi_mnorm * phi_l2);
  return tauberian_check(g, wp, cfg);
}

}  // namespace mourrekit
