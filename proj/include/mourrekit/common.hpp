#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <Eigen/Dense>

namespace mourrekit {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

constexpr double kPi = 3.14159265358979323846;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Closed interval [lo, hi]; `open` marks both endpoints excluded.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool open = false;

  double width() const { return hi - lo; }
  bool contains(double x) const {
    return open ? (x > lo && x < hi) : (x >= lo && x <= hi);
  }
  bool empty() const { return hi < lo || (open && hi <= lo); }
};

// Axis-aligned box in R^s.
struct Box {
  RVec lo;
  RVec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const RVec& x) const {
    for (int j = 0; j < dim(); ++j)
      if (x[j] < lo[j] || x[j] > hi[j]) return false;
    return true;
  }
  // largest |.| corner, attained coordinatewise for |.|-monotone functions
  RVec max_abs_corner() const {
    RVec c(dim());
    for (int j = 0; j < dim(); ++j)
      c[j] = std::abs(lo[j]) > std::abs(hi[j]) ? lo[j] : hi[j];
    return c;
  }
  static Box minkowski_sum(const Box& a, const Box& b) {
    return Box{a.lo + b.lo, a.hi + b.hi};
  }
  static Box minkowski_diff(const Box& a, const Box& b) {
    return Box{a.lo - b.hi, a.hi - b.lo};
  }
  double dist_to_origin() const {
    double d2 = 0.0;
    for (int j = 0; j < dim(); ++j) {
      double d = 0.0;
      if (lo[j] > 0) d = lo[j];
      else if (hi[j] < 0) d = -hi[j];
      d2 += d * d;
    }
    return std::sqrt(d2);
  }
};

}  // namespace mourrekit
