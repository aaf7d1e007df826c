#include "mourrekit/grid.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mourrekit {

namespace {
long env_budget() {
  if (const char* s = std::getenv("MOURREKIT_BUDGET")) {
    long v = std::atol(s);
    if (v > 0) return v;
  }
  return 4096;
}
}  // namespace

long MomentumGrid::budget_cap() { return env_budget(); }

MomentumGrid::MomentumGrid(int dim, std::vector<double> lower,
                           std::vector<double> upper,
                           std::vector<int> points_per_axis)
    : dim_(dim),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      n_(std::move(points_per_axis)) {
  if (dim_ < 1 || static_cast<int>(lower_.size()) != dim_ ||
      static_cast<int>(upper_.size()) != dim_ ||
      static_cast<int>(n_.size()) != dim_)
    throw Error("MomentumGrid: inconsistent dimensions");
  total_ = 1;
  spacing_.resize(dim_);
  for (int j = 0; j < dim_; ++j) {
    if (n_[j] < 4)
      throw Error("MomentumGrid: need at least 4 points per axis, got " +
                  std::to_string(n_[j]));
    if (upper_[j] <= lower_[j])
      throw Error("MomentumGrid: empty axis " + std::to_string(j));
    spacing_[j] = (upper_[j] - lower_[j]) / (n_[j] - 1);
    total_ *= n_[j];
  }
  if (total_ > budget_cap())
    throw Error("MomentumGrid: " + std::to_string(total_) +
                " points exceed the dense-matrix budget of " +
                std::to_string(budget_cap()) +
                " (set MOURREKIT_BUDGET to override)");
  weight_ = 1.0;
  for (int j = 0; j < dim_; ++j) weight_ *= spacing_[j];
}

void MomentumGrid::unflatten(long k, int* idx) const {
  for (int j = dim_ - 1; j >= 0; --j) {
    idx[j] = static_cast<int>(k % n_[j]);
    k /= n_[j];
  }
}

long MomentumGrid::flatten(const int* idx) const {
  long k = 0;
  for (int j = 0; j < dim_; ++j) k = k * n_[j] + idx[j];
  return k;
}

RVec MomentumGrid::point(long k) const {
  int idx[8];
  unflatten(k, idx);
  RVec q(dim_);
  for (int j = 0; j < dim_; ++j) q[j] = lower_[j] + idx[j] * spacing_[j];
  return q;
}

double MomentumGrid::coord(long k, int axis) const {
  int idx[8];
  unflatten(k, idx);
  return lower_[axis] + idx[axis] * spacing_[axis];
}

bool MomentumGrid::on_boundary(long k) const {
  int idx[8];
  unflatten(k, idx);
  for (int j = 0; j < dim_; ++j)
    if (idx[j] == 0 || idx[j] == n_[j] - 1) return true;
  return false;
}

bool MomentumGrid::same_as(const MomentumGrid& o) const {
  if (dim_ != o.dim_) return false;
  for (int j = 0; j < dim_; ++j)
    if (n_[j] != o.n_[j] || lower_[j] != o.lower_[j] ||
        upper_[j] != o.upper_[j])
      return false;
  return true;
}

cplx inner(const WaveFunction& f, const WaveFunction& g) {
  if (!f.grid->same_as(*g.grid)) throw Error("inner: grid mismatch");
  cplx acc(0.0, 0.0);
  const long n = f.grid->total();
  for (long k = 0; k < n; ++k) acc += std::conj(f.amps[k]) * g.amps[k];
  return acc * f.grid->weight();
}

double boundary_layer_ratio(const WaveFunction& f) {
  double peak = 0.0;
  double edge = 0.0;
  const long n = f.grid->total();
  for (long k = 0; k < n; ++k) {
    double a = std::abs(f.amps[k]);
    if (a > peak) peak = a;
    if (f.grid->on_boundary(k) && a > edge) edge = a;
  }
  if (peak == 0.0) return 0.0;
  return edge / peak;
}

void require_boundary_vanishing(const WaveFunction& f, double boundary_tol) {
  double r = boundary_layer_ratio(f);
  if (r > boundary_tol) {
    std::ostringstream os;
    os << "boundary-vanishing violated: outermost-layer relative maximum "
       << r << " exceeds boundary_tol " << boundary_tol;
    throw Error(os.str());
  }
}

WaveFunction derivative(const WaveFunction& f, int axis, double boundary_tol) {
  require_boundary_vanishing(f, boundary_tol);
  const MomentumGrid& g = *f.grid;
  const long n = g.total();
  long stride = 1;
  for (int j = g.dim() - 1; j > axis; --j) stride *= g.axis_points(j);
  const int na = g.axis_points(axis);
  const double inv2dq = 1.0 / (2.0 * g.spacing(axis));

  WaveFunction out{f.grid, Vec::Zero(n)};
  int idx[8];
  for (long k = 0; k < n; ++k) {
    g.unflatten(k, idx);
    if (idx[axis] == 0 || idx[axis] == na - 1) continue;  // endpoints to zero
    out.amps[k] = (f.amps[k + stride] - f.amps[k - stride]) * inv2dq;
  }
  return out;
}

double operator_norm(const Mat& m) {
  if (!m.allFinite()) throw Error("operator_norm: non-finite entries");
  if (m.rows() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues()[0];
}

double operator_norm_hermitian(const Mat& m) {
  if (!m.allFinite()) throw Error("operator_norm: non-finite entries");
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error("operator_norm: eigendecomposition failed");
  const RVec& ev = es.eigenvalues();
  return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

Mat japanese_bracket_power(const Mat& m, double power) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) {
    Mat r = m * m;
    throw Error("japanese_bracket_power: eigendecomposition failed, |M^2| = " +
                std::to_string(r.norm()));
  }
  RVec lam = es.eigenvalues();
  RVec scal(lam.size());
  for (int i = 0; i < lam.size(); ++i)
    scal[i] = std::pow(1.0 + lam[i] * lam[i], 0.5 * power);
  Mat out = es.eigenvectors() * scal.asDiagonal() *
            es.eigenvectors().adjoint();
  out = 0.5 * (out + Mat(out.adjoint()));  // strip roundoff asymmetry
  return out;
}

HermitianOperator bracket_power(const HermitianOperator& m, double nu) {
  if (nu < 0) throw Error("bracket_power: nu must be >= 0");
  require_hermitian(m.matrix);
  return HermitianOperator{m.grid, japanese_bracket_power(m.matrix, -nu)};
}

MultiplierOperator spectral_projection(const MultiplierOperator& m,
                                       const Interval& window,
                                       ProjectionMeta* meta) {
  if (window.empty()) throw Error("spectral_projection: empty window");
  if (!m.samples.allFinite())
    throw Error("spectral_projection: non-finite multiplier samples");
  MultiplierOperator p{m.grid, RVec::Zero(m.samples.size())};
  long count = 0;
  for (long k = 0; k < m.samples.size(); ++k)
    if (window.contains(m.samples[k])) {
      p.samples[k] = 1.0;
      ++count;
    }
  if (meta) {
    meta->selected = count;
    meta->empty = (count == 0);
  }
  return p;
}

void require_hermitian(const Mat& m, double rel_tol) {
  double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  double dev = (m - Mat(m.adjoint())).cwiseAbs().maxCoeff();
  if (dev > rel_tol * scale)
    throw Error("matrix not Hermitian: max deviation " + std::to_string(dev) +
                " vs scale " + std::to_string(scale));
}

Mat central_difference_matrix(const MomentumGrid& grid, int axis) {
  const long n = grid.total();
  long stride = 1;
  for (int j = grid.dim() - 1; j > axis; --j) stride *= grid.axis_points(j);
  const int na = grid.axis_points(axis);
  const double inv2dq = 1.0 / (2.0 * grid.spacing(axis));
  Mat d = Mat::Zero(n, n);
  int idx[8];
  for (long k = 0; k < n; ++k) {
    grid.unflatten(k, idx);
    if (idx[axis] + 1 < na) d(k, k + stride) = inv2dq;
    if (idx[axis] - 1 >= 0) d(k, k - stride) = -inv2dq;
  }
  return d;
}

Mat position_operator(const MomentumGrid& grid, int axis) {
  return cplx(0.0, 1.0) * central_difference_matrix(grid, axis);
}

Mat position_bracket_power(const MomentumGrid& grid, double power) {
  const long n = grid.total();
  Mat u2 = Mat::Zero(n, n);
  for (int j = 0; j < grid.dim(); ++j) {
    Mat uj = position_operator(grid, j);
    u2 += uj * uj;
  }
  // <u>^p = (1 + sum u_j^2)^{p/2}; reuse the bracket machinery on sqrt(sum)
  Eigen::SelfAdjointEigenSolver<Mat> es(u2);
  if (es.info() != Eigen::Success)
    throw Error("position_bracket_power: eigendecomposition failed");
  RVec lam = es.eigenvalues();
  RVec scal(lam.size());
  for (int i = 0; i < lam.size(); ++i)
    scal[i] = std::pow(1.0 + std::max(lam[i], 0.0), 0.5 * power);
  Mat out = es.eigenvectors() * scal.asDiagonal() *
            es.eigenvectors().adjoint();
  return 0.5 * (out + Mat(out.adjoint()));
}

// ---- serialization ---------------------------------------------------------

namespace {
void write_header(std::ofstream& os, const MomentumGrid& g,
                  const std::string& cols) {
  os << "# mourrekit column format\n";
  os << "# dim " << g.dim();
  for (int j = 0; j < g.dim(); ++j)
    os << "  axis" << j << " " << g.axis_lower(j) << " " << g.axis_upper(j)
       << " " << g.axis_points(j);
  os << "\n# columns: " << cols << "\n";
}
}  // namespace

void save_wavefunction(const WaveFunction& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path);
  os.precision(17);
  std::string cols = "index";
  for (int j = 0; j < f.grid->dim(); ++j) cols += " q" + std::to_string(j);
  cols += " re im";
  write_header(os, *f.grid, cols);
  for (long k = 0; k < f.grid->total(); ++k) {
    os << k;
    RVec q = f.grid->point(k);
    for (int j = 0; j < f.grid->dim(); ++j) os << " " << q[j];
    os << " " << f.amps[k].real() << " " << f.amps[k].imag() << "\n";
  }
}

WaveFunction load_wavefunction(const MomentumGrid& grid,
                               const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  WaveFunction f{&grid, Vec::Zero(grid.total())};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long k;
    ls >> k;
    double tmp, re, im;
    for (int j = 0; j < grid.dim(); ++j) ls >> tmp;
    ls >> re >> im;
    if (!ls) throw Error("parse error in " + path + ": " + line);
    if (k < 0 || k >= grid.total())
      throw Error("index out of range in " + path);
    f.amps[k] = cplx(re, im);
  }
  return f;
}

void save_field(const MomentumGrid& grid,
                const std::vector<const RVec*>& columns,
                const std::vector<std::string>& names,
                const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path);
  os.precision(17);
  std::string cols = "index";
  for (int j = 0; j < grid.dim(); ++j) cols += " q" + std::to_string(j);
  for (const auto& nm : names) cols += " " + nm;
  write_header(os, grid, cols);
  for (long k = 0; k < grid.total(); ++k) {
    os << k;
    RVec q = grid.point(k);
    for (int j = 0; j < grid.dim(); ++j) os << " " << q[j];
    for (const RVec* c : columns) os << " " << (*c)[k];
    os << "\n";
  }
}

void save_matrix(const Mat& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path);
  os.precision(17);
  os << "# rows " << m.rows() << " cols " << m.cols()
     << "\n# columns: row col re im\n";
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      os << i << " " << j << " " << m(i, j).real() << " " << m(i, j).imag()
         << "\n";
}

}  // namespace mourrekit
