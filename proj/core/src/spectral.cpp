#include "flowbm/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "flowbm/errors.hpp"

namespace flowbm {

double Field2D::spacing() const { return 2.0 * std::numbers::pi / n; }

double Field2D::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

double Field2D::min() const { return *std::min_element(data.begin(), data.end()); }
double Field2D::max() const { return *std::max_element(data.begin(), data.end()); }

double Field2D::sum() const {
  // Row sums first keeps the reduction order fixed and the error small.
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += (*this)(i, j);
    total += row;
  }
  return total;
}

namespace {
// Plan creation in FFTW is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double sinc(double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; }
}  // namespace

struct Fft2D::Plans {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

Fft2D::Fft2D(int n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 2 || n % 2 != 0) throw ResolutionError("FFT grid size must be even and >= 2");
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  plans_->real = fftw_alloc_real(static_cast<std::size_t>(n) * n);
  plans_->cplx = fftw_alloc_complex(static_cast<std::size_t>(n) * (n / 2 + 1));
  plans_->r2c = fftw_plan_dft_r2c_2d(n, n, plans_->real, plans_->cplx, FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_dft_c2r_2d(n, n, plans_->cplx, plans_->real, FFTW_ESTIMATE);
}

Fft2D::~Fft2D() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plans_->r2c);
  fftw_destroy_plan(plans_->c2r);
  fftw_free(plans_->real);
  fftw_free(plans_->cplx);
}

Spectrum Fft2D::forward(const Field2D& f) const {
  if (f.n != n_) throw ResolutionError("field grid does not match FFT grid");
  std::copy(f.data.begin(), f.data.end(), plans_->real);
  fftw_execute(plans_->r2c);
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  Spectrum out(static_cast<std::size_t>(n_) * spec_cols());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = {plans_->cplx[k][0] * scale, plans_->cplx[k][1] * scale};
  return out;
}

Field2D Fft2D::inverse(const Spectrum& c) const {
  for (std::size_t k = 0; k < c.size(); ++k) {
    plans_->cplx[k][0] = c[k].real();
    plans_->cplx[k][1] = c[k].imag();
  }
  fftw_execute(plans_->c2r);
  Field2D f(n_);
  std::copy(plans_->real, plans_->real + f.data.size(), f.data.begin());
  return f;
}

Field2D Fft2D::laplacian(const Field2D& f) const {
  Spectrum c = forward(f);
  const int cols = spec_cols();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < cols; ++j) {
      const double kk = static_cast<double>(k1(i)) * k1(i) + static_cast<double>(j) * j;
      c[static_cast<std::size_t>(i) * cols + j] *= -kk;
    }
  return inverse(c);
}

Field2D Fft2D::derivative(const Field2D& f, int axis) const {
  Spectrum c = forward(f);
  const int cols = spec_cols();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < cols; ++j) {
      int k = axis == 0 ? k1(i) : j;
      if (2 * std::abs(k) == n_) k = 0;
      c[static_cast<std::size_t>(i) * cols + j] *= std::complex<double>(0.0, k);
    }
  return inverse(c);
}

Field2D Fft2D::cell_average(const Field2D& f) const {
  Spectrum c = forward(f);
  const int cols = spec_cols();
  const double half = 0.5 * f.spacing();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < cols; ++j)
      c[static_cast<std::size_t>(i) * cols + j] *= sinc(k1(i) * half) * sinc(j * half);
  return inverse(c);
}

void lagrange_weights(const std::vector<double>& times, double t, int& first, int& count,
                      double* w, double* dw) {
  const int m = static_cast<int>(times.size());
  count = std::min(4, m);
  if (m <= 1) {
    first = 0;
    w[0] = 1.0;
    dw[0] = 0.0;
    return;
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const int idx = static_cast<int>(it - times.begin()) - 1;
  first = std::clamp(idx - 1, 0, m - count);
  for (int a = 0; a < count; ++a) {
    const double ta = times[first + a];
    double num = 1.0;
    double den = 1.0;
    double dnum = 0.0;
    for (int b = 0; b < count; ++b) {
      if (b == a) continue;
      const double tb = times[first + b];
      dnum = dnum * (t - tb) + num;
      num *= t - tb;
      den *= ta - tb;
    }
    w[a] = num / den;
    dw[a] = dnum / den;
  }
}

SpectralSeries::SpectralSeries(const std::vector<double>& times, const std::vector<Field2D>& fields,
                               double rel_threshold)
    : times_(times) {
  if (fields.empty() || fields.size() != times.size())
    throw ResolutionError("spectral series needs one field per time");
  const int n = fields.front().n;
  if (n > 256) throw ResolutionError("spectral series supports grids up to 256");
  Fft2D fft(n);
  const int cols = fft.spec_cols();
  std::vector<Spectrum> spectra;
  spectra.reserve(fields.size());
  double cmax = 0.0;
  for (const Field2D& f : fields) {
    spectra.push_back(fft.forward(f));
    for (const auto& c : spectra.back()) cmax = std::max(cmax, std::abs(c));
  }
  const double cutoff = rel_threshold * cmax;

  // Hermitian half: k2 in (0, n/2) carries weight 2; on k2 = 0 keep k1 >= 0
  // with weight 2 for k1 > 0. Nyquist rows/columns are dropped.
  std::vector<std::size_t> flat_index;
  for (int i = 0; i < n; ++i) {
    const int k1 = fft.k1(i);
    if (2 * std::abs(k1) == n) continue;
    for (int j = 0; j < cols; ++j) {
      if (2 * j == n) continue;
      if (j == 0 && k1 < 0) continue;
      const std::size_t idx = static_cast<std::size_t>(i) * cols + j;
      bool keep = false;
      for (const Spectrum& s : spectra) keep = keep || std::abs(s[idx]) > cutoff;
      if (!keep) continue;
      const double weight = (j == 0 && k1 == 0) ? 1.0 : 2.0;
      modes_.push_back({k1, j, weight});
      flat_index.push_back(idx);
      kmax1_ = std::max(kmax1_, std::abs(k1));
      kmax2_ = std::max(kmax2_, j);
    }
  }
  coeffs_.resize(times.size() * modes_.size());
  for (std::size_t a = 0; a < times.size(); ++a)
    for (std::size_t m = 0; m < modes_.size(); ++m)
      coeffs_[a * modes_.size() + m] = spectra[a][flat_index[m]];
}

void SpectralSeries::interpolation_weights(double t, int& first, int& count, double* w,
                                           double* dw) const {
  lagrange_weights(times_, t, first, count, w, dw);
}

FieldEval SpectralSeries::evaluate_coeffs(int first, int count, const double* w, const double* dw,
                                          double x1, double x2, double* dt_value) const {
  FieldEval out;
  if (dt_value) *dt_value = 0.0;
  const std::size_t nm = modes_.size();
  if (nm == 0) return out;

  // Powers e^{i k x}, k = 0..kmax, as separate real and imaginary tables.
  double c1[129], s1[129], c2[129], s2[129];
  c1[0] = c2[0] = 1.0;
  s1[0] = s2[0] = 0.0;
  if (kmax1_ > 0) {
    const double cb = std::cos(x1), sb = std::sin(x1);
    for (int k = 1; k <= kmax1_; ++k) {
      c1[k] = c1[k - 1] * cb - s1[k - 1] * sb;
      s1[k] = s1[k - 1] * cb + c1[k - 1] * sb;
    }
  }
  if (kmax2_ > 0) {
    const double cb = std::cos(x2), sb = std::sin(x2);
    for (int k = 1; k <= kmax2_; ++k) {
      c2[k] = c2[k - 1] * cb - s2[k - 1] * sb;
      s2[k] = s2[k - 1] * cb + c2[k - 1] * sb;
    }
  }

  const bool with_dt = dt_value && dw && count > 1;
  double dt_acc = 0.0;
  for (std::size_t m = 0; m < nm; ++m) {
    std::complex<double> c = 0.0;
    std::complex<double> dc = 0.0;
    for (int a = 0; a < count; ++a) {
      const std::complex<double>& v = coeffs_[static_cast<std::size_t>(first + a) * nm + m];
      c += w[a] * v;
      if (with_dt) dc += dw[a] * v;
    }
    const Mode& mode = modes_[m];
    const int a1 = mode.k1 >= 0 ? mode.k1 : -mode.k1;
    const std::complex<double> p1(c1[a1], mode.k1 >= 0 ? s1[a1] : -s1[a1]);
    const std::complex<double> basis = mode.weight * p1 * std::complex<double>(c2[mode.k2], s2[mode.k2]);
    const std::complex<double> term = c * basis;
    out.value += term.real();
    // d/dx Re(c e^{ikx}) = -k Im(c e^{ikx})
    out.d1 -= mode.k1 * term.imag();
    out.d2 -= mode.k2 * term.imag();
    out.lap -= (static_cast<double>(mode.k1) * mode.k1 + static_cast<double>(mode.k2) * mode.k2) *
               term.real();
    if (with_dt) dt_acc += (dc * basis).real();
  }
  if (dt_value) *dt_value = dt_acc;
  return out;
}

FieldEval SpectralSeries::evaluate(double t, double x1, double x2, double* dt_value) const {
  int first = 0;
  int count = 0;
  double w[4];
  double dw[4];
  interpolation_weights(t, first, count, w, dw);
  return evaluate_coeffs(first, count, w, dw, x1, x2, dt_value);
}

double SpectralSeries::time_derivative(double t, double x1, double x2) const {
  double dt_value = 0.0;
  evaluate(t, x1, x2, &dt_value);
  return dt_value;
}

}  // namespace flowbm
