#pragma once

#include "mourrekit/dispersion.hpp"
#include "mourrekit/grid.hpp"

namespace mourrekit {

// Smooth bump on (0, inf) built from the e^{-1/x} mollifier: 0 below eps/4,
// rises to 1 on [eps/4, eps/2], holds 1 through beta+1, falls to 0 on
// [beta+1, beta+2]. The derivative is available in closed form.
struct CutoffSpec {
  double eps = 0.0;
  double beta = 0.0;

  double value(double lambda) const;
  double deriv(double lambda) const;
  double support_lo() const { return eps / 4.0; }
  double support_hi() const { return beta + 2.0; }
};

CutoffSpec make_cutoff(double eps, double beta);

// theta_p(lambda) = theta(lambda - 2 omega(p/2))
double theta_p(double lambda, const DispersionParams& par,
               const CutoffSpec& cutoff);
double theta_p_deriv(double lambda, const DispersionParams& par,
                     const CutoffSpec& cutoff);

// F_p(q) = theta_p(omega_p(q)) grad/|grad|^2, zero where the cutoff vanishes.
RVec vector_field_F(const RVec& q, const DispersionParams& par,
                    const CutoffSpec& cutoff, double b_floor = 0.0);

struct DivFResult {
  double closed_form = 0.0;  // printed form: th' - th * lap/|grad|^2
  double finite_difference = 0.0;
};

// Pointwise closed form only; the finite-difference divergence needs the
// sampled field (see ConjugateOperatorSpec).
double div_F_closed_form(const RVec& q, const DispersionParams& par,
                         const CutoffSpec& cutoff);

// Assembled conjugate operator on a grid: sampled field, both divergence
// fields, and the symmetrized Hermitian matrix A_p.
struct ConjugateOperatorSpec {
  const MomentumGrid* grid = nullptr;
  DispersionParams params;
  CutoffSpec cutoff;
  std::vector<RVec> f_samples;       // one RVec per axis
  RVec div_f_closed;                 // paper's printed form
  RVec div_f_fd;                     // finite differences of f_samples
  RVec theta_samples;                // theta_p(omega_p(q))
  Mat a_matrix;                      // Hermitian by construction
  double div_discrepancy_max = 0.0;  // max |closed - fd| over active points
};

ConjugateOperatorSpec assemble_Ap(const MomentumGrid& grid,
                                  const DispersionParams& par,
                                  const CutoffSpec& cutoff);

// max over `states` of ||([M_omega, iA] - M_theta) psi|| / ||psi||
double commutator_residual(const ConjugateOperatorSpec& spec,
                           const std::vector<WaveFunction>& states);

// Default residual probes: Gaussians of width sigma0 spread over the
// theta = 1 plateau (both momentum signs).
std::vector<WaveFunction> plateau_gaussians(const MomentumGrid& grid,
                                            const ConjugateOperatorSpec& spec,
                                            double sigma0, int per_side = 4);

}  // namespace mourrekit
