#pragma once

#include <functional>
#include <utility>

#include "mourrekit/conjugate.hpp"
#include "mourrekit/dispersion.hpp"
#include "mourrekit/grid.hpp"
#include "mourrekit/parallel.hpp"

namespace mourrekit {

// Synthetic two-particle channel on the model space L^2(rho dE dP):
// H = multiplication by E, P = multiplication by P, with a commutator
// profile phi(u) = phi_u(u) * phi_ep(E,P) whose relative-momentum content
// is band-limited into K_rel and capped below the two-particle energy beta.
struct ChannelConfig {
  int s = 1;
  double mass = 1.0;
  double nu = 0.8;
  Box k1, k2;

  // model (E, P) grid and the absolutely continuous density rho
  double e_lo = 2.2, e_hi = 4.4;
  int n_e = 160;
  std::vector<double> p_lo{0.40}, p_hi{0.80};
  std::vector<int> n_p{48};
  double rho_e_lo = 2.8, rho_e_hi = 4.0, rho_e_edge = 0.28;
  std::vector<double> rho_p_lo{0.52}, rho_p_hi{0.68};
  double rho_p_edge = 0.025;
  double mass_shell_gap = 0.5;
  double psi_phase = 0.7;

  // phi profile
  double phi_edge_q = 0.03;
  double phi_sigma_q = 0.016;
  double beta_margin = 0.02;

  // relative-coordinate (fiber) grid
  int n_u = 512;
  double q_extent = 4.2;

  // schedules and tolerances
  double tau_step = 0.15625;
  double horizon = 160.0;
  double t0 = 10.0;
  double mc_t_max = 320.0;
  double chain_tol = 1e-9;
  int cp_sample_fibers = 3;
  Exec exec = Exec::Parallel;
};

struct Channel {
  ChannelConfig cfg;
  MomentumGrid model;  // axis 0 = E, axes 1..s = P
  RVec rho;
  Vec psi;
  double psi_mnorm = 0.0;  // |||psi||| = sup sqrt(|psi|^2 rho)
  double p0 = 0.0;         // energy cap of supp rho

  DispersionParams disp;  // boxes and epsilon (total momentum set per fiber)
  double beta = 0.0;
  CutoffSpec cutoff;

  MomentumGrid u_grid, q_grid;  // dual pair, s-dimensional
  Vec phi_u;                    // u-space profile (unit-normalized filter)
  Vec phi_q;                    // band-limited filter on the q grid
  Vec phi_ep;                   // model-space profile
  double phi_ep_norm2 = 0.0;    // ||phi_ep||^2 in L^2(rho)

  std::vector<long> fibers;   // flattened P-grid indices with rho support
  std::vector<RVec> fiber_p;  // total momentum per fiber
  RVec certificate;           // max_u ||phi(u)|| <u>^k, k = 0..4

  // S(tau, fiber) = int conj(psi) e^{i tau E} phi_ep rho dE  (per fiber)
  Vec s_values(double tau) const;
  double s_norm2(double tau) const;  // sum over fibers |S|^2 dP^s
};

Channel build_channel(const ChannelConfig& cfg);

// <psi, e^{i tau H} e^{-i v.P} phi(u)> on the (u, v) grid, v dual to P.
struct CookKernel {
  MomentumGrid v_grid;
  Mat values;  // n_u x n_v
};
CookKernel cook_kernel(const Channel& ch, double tau);

// Cauchy-Schwarz chain over time windows: lhs is the squared L^2 norm of
// the windowed Cook integral, rhs the fiber product of the measured local
// decay constant and the weighted kernel integral.
struct CsWindowResult {
  double t1 = 0, t2 = 0;
  double lhs = 0, rhs = 0;
  double kappa_max = 0;  // largest fiber local-decay constant this window
};
struct CsChainResult {
  std::vector<CsWindowResult> windows;
  bool chain_ok = false;
  double c_interp_min = 0, c_interp_max = 0;  // ||<A_p><u>^{-1}|| spread
  std::vector<std::pair<double, double>> cp_samples;  // (p, c(p)) few fibers
};
CsChainResult cs_chain(const Channel& ch,
                       const std::vector<std::pair<double, double>>& windows,
                       bool sample_cp = false);

std::vector<std::pair<double, double>> geometric_windows(double t0,
                                                         double horizon);

struct MicrocausalityResult {
  double lhs = 0, rhs = 0;
  double tail = 0;
  bool tail_flagged = false;
  bool pass = false;
};
MicrocausalityResult microcausality_integral(const Channel& ch, double nu,
                                             double tol = 1e-9);

// ---- Tauberian step --------------------------------------------------------

struct TauberianConfig {
  double delta_b = 1.0;          // averaging width of the B-test
  double tau_step = 0.15625;
  double b_decay_factor = 0.05;  // pass when b(last) <= factor * b(first)
  double z_factor = 1e-3;        // pass when ||g(end)|| <= factor * peak
  double lip_tol = 1e-9;
  double lipschitz_l = 0.0;      // 0 = skip the slow-oscillation test
  std::vector<double> t_samples;
};

struct TauberianResult {
  bool b_convergent = false;
  bool slowly_oscillating = false;
  bool l2_limit_zero = false;
  bool horizon_flagged = false;  // square integral not visibly convergent
  double b_first = 0, b_last = 0;
  double lip_max_ratio = 0;
  double g_peak = 0, g_last = 0;
};

// g maps tau to a coefficient vector; `weight` is the quadrature weight of
// the underlying grid so that ||g|| = sqrt(weight) |g|_2.
TauberianResult tauberian_check(const std::function<Vec(double)>& g,
                                double weight, const TauberianConfig& cfg);

// Channel kernel as the L^2-valued function of tau, with the Lipschitz
// constant from the bounded-energy estimate.
TauberianResult tauberian_on_channel(const Channel& ch,
                                     TauberianConfig cfg);

}  // namespace mourrekit
