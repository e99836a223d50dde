#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace flowbm {

/// Largest chart dimension supported. Chart vectors and matrices are
/// fixed-capacity so that the stepping loops never touch the heap.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// A point expressed in one chart of a metric family's atlas.
struct ChartPoint {
  int chart = 0;
  Vec coords;

  ChartPoint() = default;
  ChartPoint(int chart_id, Vec x) : chart(chart_id), coords(std::move(x)) {}

  int dim() const { return static_cast<int>(coords.size()); }
  bool finite() const { return coords.allFinite(); }
};

/// Christoffel symbols Gamma^i_{kl}, stored densely as [i][k][l].
class Christoffel {
 public:
  Christoffel() = default;
  explicit Christoffel(int n) : n_(n) { data_.fill(0.0); }

  int dim() const { return n_; }
  double& operator()(int i, int k, int l) { return data_[(i * kMaxDim + k) * kMaxDim + l]; }
  double operator()(int i, int k, int l) const { return data_[(i * kMaxDim + k) * kMaxDim + l]; }

  /// Returns the vector Gamma^i_{kl} a^k b^l.
  Vec contract(const Vec& a, const Vec& b) const {
    Vec out = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) out[i] += (*this)(i, k, l) * a[k] * b[l];
    return out;
  }

  /// Returns the matrix (Gamma(a, .))^i_l = Gamma^i_{kl} a^k.
  Mat along(const Vec& a) const {
    Mat out = Mat::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) out(i, l) += (*this)(i, k, l) * a[k];
    return out;
  }

  /// g^{kl} Gamma^i_{kl}, the contracted symbol entering the coordinate
  /// Laplacian of x^i.
  Vec trace(const Mat& g_inv) const {
    Vec out = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) out[i] += g_inv(k, l) * (*this)(i, k, l);
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) m = std::max(m, std::abs((*this)(i, k, l)));
    return m;
  }

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> data_{};
};

inline double max_abs_diff(const Christoffel& a, const Christoffel& b) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int k = 0; k < a.dim(); ++k)
      for (int l = 0; l < a.dim(); ++l) m = std::max(m, std::abs(a(i, k, l) - b(i, k, l)));
  return m;
}

/// Ricci data at one (t, p).
struct CurvatureData {
  Mat ricci;        ///< Ric_{ij}
  Mat ricci_sharp;  ///< g^{ik} Ric_{kj}
  double scalar = 0.0;
  Vec eigenvalues;  ///< of ricci_sharp, ascending
};

enum class TimeDirection { kForward, kReversed };

}  // namespace flowbm
