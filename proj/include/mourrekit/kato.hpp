#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mourrekit/grid.hpp"
#include "mourrekit/lap.hpp"

namespace mourrekit {

// ---- time-integral smoothness ----------------------------------------------

struct LocalDecayResult {
  double integral = 0.0;  // truncated quadrature over [-t_max, t_max]
  double tail = 0.0;      // upper tail estimate, 0 when flagged
  bool tail_flagged = false;
  double fit_exponent = 0.0;  // free log-log slope over the last decade
  double t_max = 0.0, dt = 0.0;

  double total() const { return integral + tail; }
};

// integral of ||T e^{i tau H} E(I) f||^2 d tau, diagonal phase evolution,
// composite Simpson, tail fitted as C tau^{-2 nu} on the final decade.
// mu_damping > 0 multiplies the integrand by e^{-2 mu |tau|}.
LocalDecayResult local_decay_integral(const Mat& t_weight,
                                      const MultiplierOperator& h,
                                      const Interval& i,
                                      const WaveFunction& f, double t_max,
                                      double dt, double nu,
                                      double mu_damping = 0.0,
                                      Exec exec = Exec::Parallel);

// c(p) = 8 sup_{lambda in I, mu in (0,1)} ||<A>^-nu Im R <A>^-nu||
struct CpResult {
  double value = 0.0;
  ResolventSweep sweep;
};
CpResult cp_bound(const MultiplierOperator& h, const Mat& w_minus,
                  const Interval& i, const SweepConfig& cfg);

// Two routes for the smoothness integral at matched regularization mu:
//   time:  int e^{-2 mu |tau|} ||T e^{i tau H} E(K) f||^2 d tau
//   freq:  (2/pi) int ||T Im R(lambda + i mu) E(K) f||^2 d lambda
struct TwoPathResult {
  double time_side = 0.0;
  double freq_side = 0.0;
  double rel_diff = 0.0;
};
TwoPathResult two_path_check(const Mat& t_weight, const MultiplierOperator& h,
                             const Interval& k, const WaveFunction& f,
                             double mu, Exec exec = Exec::Parallel);

// ---- commuting families ----------------------------------------------------

struct FamilySweepConfig {
  int lambda_points_per_axis = 24;
  double lambda_pad = 1.0;  // mesh extends past the joint spectrum by this
  double mu_min = 1e-2;
  int mu_per_decade = 3;
  Exec exec = Exec::Parallel;
};

// Optimal constant for the subset a (1-based axes in `axes`):
//   c0 = 2^{|a|} sup mu_prod ||T E(K(a)) R_a||^2
// and the resolvent-boundary bound 8^{|a|} sup_{lambda in K} ||T Im R_a T*||.
struct OptimalConstantResult {
  double c0 = 0.0;
  double eight_sup = 0.0;
  bool dominated = false;  // c0 <= eight_sup
};
OptimalConstantResult optimal_constant(
    const Mat& t_weight, const std::vector<const MultiplierOperator*>& hs,
    const std::vector<Interval>& k_box, const std::vector<int>& axes,
    const FamilySweepConfig& cfg);

// K(a) covering sets of a hyperrectangle, with exact membership tests.
struct PartitionSet {
  std::vector<int> axes;  // empty = K(emptyset)
  std::string descriptor;
  std::function<bool(const RVec&)> member;
};
std::vector<PartitionSet> partition_sets(const std::vector<Interval>& k,
                                         int n);

// ---- M(H)_a spaces ---------------------------------------------------------

// |||f|||_a = sup_{x_a} ( int rho_f(x_a + x^a) dx^a )^{1/2} on a grid.
double mh_norm(const MomentumGrid& grid, const RVec& rho_f,
               const std::vector<int>& a_axes);

struct SquareIntegrabilityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

// int |<f, e^{i x_a . H_a} g>|^2 dx_a <= (2 pi)^{|a|} |||f|||_a^2 ||g||^2
// on L^2(rho dx) with H_j = multiplication by x_j; the left side is the
// Plancherel evaluation of the DFT over the a-axes.
SquareIntegrabilityResult square_integrability_check(
    const MomentumGrid& grid, const Vec& f, const Vec& g, const RVec& rho,
    const std::vector<int>& a_axes, double fft_tol = 1e-6);

// Eq-style bounded-energy refinement: if rho_f vanishes for |x_j| > h_j,
// j not in a, then |||f|||_a <= (prod 2 h_j)^{1/2} |||f|||.
struct BoundedEnergyResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};
BoundedEnergyResult mh_bounded_energy_check(const MomentumGrid& grid,
                                            const RVec& rho_f,
                                            const std::vector<int>& a_axes,
                                            const std::vector<double>& h_caps);

}  // namespace mourrekit
