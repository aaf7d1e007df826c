#pragma once

#include "mourrekit/common.hpp"
#include "mourrekit/grid.hpp"

namespace mourrekit {

// Two-particle kinematics at fixed total momentum p: momentum-transfer
// boxes K1, K2, the derived total/relative supports, and the separation
// parameter epsilon.
struct DispersionParams {
  double mass = 1.0;
  RVec total_momentum;  // p, length s
  double epsilon = 0.0;
  Box k1, k2;
  Box k_tot, k_rel;

  int sdim() const { return static_cast<int>(total_momentum.size()); }
};

struct IntervalPair {
  Interval i;   // closed [2 w(p/2) + eps, beta]
  Interval j;   // open  (2 w(p/2) + eps/2, beta + 1)
  double delta = 0.0;
};

// omega(q) = sqrt(m^2 + |q|^2)
double omega(const RVec& q, double m);
double omega1(double q, double m);  // s = 1 shorthand

// omega_p(q) = omega(p/2 + q) + omega(p/2 - q)
double omega_p(const RVec& q, const DispersionParams& par);
RVec grad_omega_p(const RVec& q, const DispersionParams& par);
double laplacian_omega_p(const RVec& q, const DispersionParams& par);

// beta = sup_{K1} omega + sup_{K2} omega (attained at max-|.| corners)
double beta_cap(const Box& k1, const Box& k2, double m);

// Builds DispersionParams from boxes; epsilon comes from grid minimization
// of omega_p(q) - 2 omega(p/2) over K_rel/2 x K_tot, shrunk by 10%, unless
// an override is supplied.
DispersionParams make_dispersion_params(double m, const RVec& p,
                                        const Box& k1, const Box& k2,
                                        double epsilon_override = 0.0,
                                        int minimizer_mesh = 200,
                                        double rel_gap = 1e-8);

// Lower bound b on |grad omega_p| over the preimage of closure(J),
// minimized on a mesh and shrunk by 10%.
double gradient_lower_bound(const DispersionParams& par, const Interval& j,
                            int mesh = 400);

IntervalPair intervals(const DispersionParams& par, double beta);

// Samples of omega_p on a grid (the fiber Hamiltonian as a multiplier).
MultiplierOperator omega_p_multiplier(const MomentumGrid& grid,
                                      const DispersionParams& par);

}  // namespace mourrekit
