#pragma once

#include <functional>
#include <vector>

#include "fastlink/common.hpp"

namespace fastlink::stats {

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased (n-1)

/// Ranks with ties replaced by their average rank (1-based).
std::vector<double> ranks(const std::vector<double>& v);

/// Spearman rank correlation (Pearson on average ranks). Returns 0 when
/// either input is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Kolmogorov-Smirnov statistic of samples against a reference CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// One-sided paired test p-value for H1: mean(a - b) > 0, using the
/// normal approximation to the t statistic (adequate for n >= ~50).
double paired_p_value_greater(const std::vector<double>& a, const std::vector<double>& b);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace fastlink::stats
