#include "flowbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowbm/errors.hpp"

namespace flowbm {

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += x[k];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

MeanStats mean_stats(const std::vector<double>& x) {
  MeanStats s;
  s.n = x.size();
  if (x.empty()) return s;
  s.mean = pairwise_sum(x) / static_cast<double>(x.size());
  if (x.size() < 2) return s;
  std::vector<double> dev(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) dev[k] = (x[k] - s.mean) * (x[k] - s.mean);
  s.variance = pairwise_sum(dev) / static_cast<double>(x.size() - 1);
  s.std_error = std::sqrt(s.variance / static_cast<double>(x.size()));
  return s;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // 1 - Q = sqrt(2 pi) / lambda * sum_k exp(-(2k-1)^2 pi^2 / (8 lambda^2))
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 6; ++k) sum += std::pow(y, (2 * k - 1) * (2 * k - 1));
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("KS test needs two non-empty samples");
  for (double v : a)
    if (!std::isfinite(v)) throw Error("KS sample contains non-finite values");
  for (double v : b)
    if (!std::isfinite(v)) throw Error("KS sample contains non-finite values");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / n1 - j / n2));
  }
  KsResult r;
  r.statistic = d;
  r.n1 = a.size();
  r.n2 = b.size();
  const double ne = std::sqrt(n1 * n2 / (n1 + n2));
  r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

std::vector<double> ecdf(std::vector<double> sample, const std::vector<double>& grid) {
  std::sort(sample.begin(), sample.end());
  std::vector<double> out(grid.size());
  const double n = static_cast<double>(sample.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto it = std::upper_bound(sample.begin(), sample.end(), grid[k]);
    out[k] = sample.empty() ? 0.0 : static_cast<double>(it - sample.begin()) / n;
  }
  return out;
}

}  // namespace flowbm
