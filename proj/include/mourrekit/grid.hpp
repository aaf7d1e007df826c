#pragma once

#include <string>
#include <vector>

#include "mourrekit/common.hpp"

namespace mourrekit {

// Uniform tensor grid in momentum space. Quadrature weight is spacing^dim
// per point; all state vectors live on exactly one of these.
class MomentumGrid {
 public:
  // lower/upper are per-axis bounds, n points per axis (n >= 4).
  MomentumGrid(int dim, std::vector<double> lower, std::vector<double> upper,
               std::vector<int> points_per_axis);

  static MomentumGrid uniform_1d(double lo, double hi, int n) {
    return MomentumGrid(1, {lo}, {hi}, {n});
  }

  int dim() const { return dim_; }
  int axis_points(int axis) const { return n_[axis]; }
  double axis_lower(int axis) const { return lower_[axis]; }
  double axis_upper(int axis) const { return upper_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  long total() const { return total_; }
  double weight() const { return weight_; }  // spacing^dim

  // flat index <-> multi-index <-> coordinates
  void unflatten(long k, int* idx) const;
  long flatten(const int* idx) const;
  RVec point(long k) const;
  double coord(long k, int axis) const;

  bool on_boundary(long k) const;  // outermost layer of any axis

  bool same_as(const MomentumGrid& other) const;

  // dense-matrix budget, overridable by config or MOURREKIT_BUDGET
  static long budget_cap();

 private:
  int dim_;
  std::vector<double> lower_, upper_, spacing_;
  std::vector<int> n_;
  long total_;
  double weight_;
};

struct WaveFunction {
  const MomentumGrid* grid = nullptr;
  Vec amps;

  double norm() const { return std::sqrt(grid->weight()) * amps.norm(); }
};

struct MultiplierOperator {
  const MomentumGrid* grid = nullptr;
  RVec samples;
};

struct HermitianOperator {
  const MomentumGrid* grid = nullptr;
  Mat matrix;
};

struct ProjectionMeta {
  long selected = 0;
  bool empty = false;
};

// ---- operations -----------------------------------------------------------

// <f, g> = dq^s sum conj(f_k) g_k, fixed summation order (index order).
cplx inner(const WaveFunction& f, const WaveFunction& g);

// Relative height of the outermost layer; the boundary-vanishing contract
// demands this <= boundary_tol.
double boundary_layer_ratio(const WaveFunction& f);
void require_boundary_vanishing(const WaveFunction& f, double boundary_tol);

// Central second-order difference along `axis`; endpoints to zero.
WaveFunction derivative(const WaveFunction& f, int axis,
                        double boundary_tol = 1e-6);

// Largest singular value (largest |eigenvalue| for Hermitian input).
double operator_norm(const Mat& m);
double operator_norm_hermitian(const Mat& m);

// <M>^p = (1 + M^2)^(p/2) for Hermitian M, via eigendecomposition.
Mat japanese_bracket_power(const Mat& m, double power);

// Spec operation: bracket_power(M, nu) = <M>^{-nu}, nu >= 0.
HermitianOperator bracket_power(const HermitianOperator& m, double nu);

// Indicator of {q : m(q) in window} as a multiplier.
MultiplierOperator spectral_projection(const MultiplierOperator& m,
                                       const Interval& window,
                                       ProjectionMeta* meta = nullptr);

void require_hermitian(const Mat& m, double rel_tol = 1e-12);

// Antisymmetric central-difference stencil along `axis` under zero
// extension (the boundary rows just truncate), times 1/(2 dq).
// i * this matrix is the Hermitian realization of the position operator
// component u_axis = i d/dq_axis.
Mat central_difference_matrix(const MomentumGrid& grid, int axis);
Mat position_operator(const MomentumGrid& grid, int axis);  // i * central diff

// <u> = (1 + sum_j u_j^2)^{1/2} realized densely; power as in bracket.
Mat position_bracket_power(const MomentumGrid& grid, double power);

// ---- column-format text serialization -------------------------------------
// one line per grid point: index, q-components, Re, Im
void save_wavefunction(const WaveFunction& f, const std::string& path);
WaveFunction load_wavefunction(const MomentumGrid& grid,
                               const std::string& path);
void save_field(const MomentumGrid& grid,
                const std::vector<const RVec*>& columns,
                const std::vector<std::string>& names,
                const std::string& path);
void save_matrix(const Mat& m, const std::string& path);

}  // namespace mourrekit
