#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace flowbm {

/// Real field sampled on the uniform n x n grid of [0, 2pi)^2; entry (i, j)
/// sits at (2pi i / n, 2pi j / n) and is stored row-major.
struct Field2D {
  int n = 0;
  std::vector<double> data;

  Field2D() = default;
  explicit Field2D(int grid_n, double fill = 0.0)
      : n(grid_n), data(static_cast<std::size_t>(grid_n) * grid_n, fill) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }

  double spacing() const;
  double node(int i) const { return spacing() * i; }
  double max_abs() const;
  double min() const;
  double max() const;
  double sum() const;
};

using Spectrum = std::vector<std::complex<double>>;

/// Real-to-complex 2D FFT on an n x n periodic grid plus the spectral
/// derivative operators built on it. Coefficients are normalised so that
/// f(x) = sum_k c_k exp(i k.x).
class Fft2D {
 public:
  explicit Fft2D(int n);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  int n() const { return n_; }
  int spec_cols() const { return n_ / 2 + 1; }
  /// Signed wavenumber of row index i.
  int k1(int i) const { return i <= n_ / 2 ? i : i - n_; }

  Spectrum forward(const Field2D& f) const;
  Field2D inverse(const Spectrum& c) const;

  Field2D laplacian(const Field2D& f) const;
  /// Spectral first derivative along axis 0 (x1) or 1 (x2); Nyquist mode zeroed.
  Field2D derivative(const Field2D& f, int axis) const;
  /// Cell averages over [x - h/2, x + h/2]^2 of the trigonometric interpolant.
  Field2D cell_average(const Field2D& f) const;

 private:
  int n_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

/// Value, first derivatives and flat Laplacian of a field at one point.
struct FieldEval {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double lap = 0.0;
};

/// Sparse trigonometric representation of a sequence of grid fields sampled
/// at increasing times. Only modes above a relative threshold (at any time)
/// are kept, so point evaluation costs O(#significant modes). Values between
/// stored times use cubic Lagrange interpolation over the four nearest
/// samples.
class SpectralSeries {
 public:
  SpectralSeries() = default;
  SpectralSeries(const std::vector<double>& times, const std::vector<Field2D>& fields,
                 double rel_threshold = 1e-15);

  /// Value and space derivatives at (t, x); the time derivative of the
  /// interpolant is written to dt_value when it is non-null.
  FieldEval evaluate(double t, double x1, double x2, double* dt_value = nullptr) const;
  /// Time derivative of the interpolant at (t, x).
  double time_derivative(double t, double x1, double x2) const;

  std::size_t mode_count() const { return modes_.size(); }
  const std::vector<double>& times() const { return times_; }

 private:
  struct Mode {
    int k1;
    int k2;
    double weight;
  };
  void interpolation_weights(double t, int& first, int& count, double* w, double* dw) const;
  FieldEval evaluate_coeffs(int first, int count, const double* w, const double* dw, double x1,
                            double x2, double* dt_value) const;

  std::vector<double> times_;
  std::vector<Mode> modes_;
  std::vector<std::complex<double>> coeffs_;  // [time][mode]
  int kmax1_ = 0;
  int kmax2_ = 0;
};

/// Lagrange weights (and their derivatives) of the cubic-or-lower
/// interpolant through the stored times closest to t.
void lagrange_weights(const std::vector<double>& times, double t, int& first, int& count,
                      double* w, double* dw);

}  // namespace flowbm
