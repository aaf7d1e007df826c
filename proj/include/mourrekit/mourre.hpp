#pragma once

#include <map>
#include <string>

#include "mourrekit/conjugate.hpp"
#include "mourrekit/grid.hpp"

namespace mourrekit {

struct MourreReport {
  Interval window;
  double constant_a = 0.0;
  double margin = 0.0;
  bool vacuous = false;
  bool pass = false;
  double mourre_tol = 0.0;
  int resolved_dim = 0;
  double u_cap = 0.0;
  std::map<std::string, double> residuals;
};

// Basis of the resolved sector inside ran E(J): lowest Dirichlet modes of
// the compact 3-point Laplacian restricted to the selected points, kept
// while the mode frequency^2 stays <= u_cap^2. Columns are orthonormal.
// Finite differences do not see a positive commutator on the near-Nyquist
// modes of the window (the trace of a commutator vanishes, so the raw
// projected block has eigenvalues down to -a at every resolution); the
// margin is meaningful exactly on this resolved sector, where it decays at
// the same O(dq^2) rate as the commutator residual.
Mat resolved_window_basis(const MomentumGrid& grid, const RVec& window_mask,
                          double u_cap);

MourreReport mourre_check(const MultiplierOperator& h, const Mat& a_matrix,
                          const Interval& window, double constant_a,
                          double u_cap = 4.0, double mourre_tol = 0.0);

// Mourre estimate for H^{-1} with constant (1+beta)^{-2}, commutator taken
// through [H^{-1},A] = -H^{-1}[H,A]H^{-1}. `path_disagreement` reports the
// deviation from the directly multiplied commutator.
struct InverseMourreReport {
  MourreReport report;
  double path_disagreement = 0.0;
};

InverseMourreReport inverse_mourre_check(const MultiplierOperator& h,
                                         const Mat& a_matrix,
                                         const Interval& window_tilde_source,
                                         double beta, double u_cap = 4.0,
                                         double mourre_tol = 0.0);

// || ad^k_{-iA}(H) - theta_{k-1}(H) || on the given states, k in {1, 2};
// theta_k(lambda) = [theta(lambda) d/dlambda]^k theta(lambda).
double adk_check(const ConjugateOperatorSpec& spec, int k,
                 const std::vector<WaveFunction>& states);

}  // namespace mourrekit
