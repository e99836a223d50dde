#pragma once

#include <cstddef>
#include <vector>

namespace flowbm {

/// Pairwise (cascade) summation; the reduction tree depends only on n.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct MeanStats {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased sample variance
  double std_error = 0.0;
  std::size_t n = 0;
};

MeanStats mean_stats(const std::vector<double>& x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value and the
/// Stephens small-sample correction. Throws Error on empty or non-finite input.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Empirical CDF of `sample` evaluated at each point of `grid`.
std::vector<double> ecdf(std::vector<double> sample, const std::vector<double>& grid);

}  // namespace flowbm
