#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace simrf {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct SampleStats {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double sem = 0.0;       // standard error of the mean
};

// Two-pass mean/variance with compensated sums; the result depends only on sample order.
SampleStats summarize(const std::vector<double>& samples);

// Element-wise a - b, for paired comparisons.
std::vector<double> paired_difference(const std::vector<double>& a, const std::vector<double>& b);

// sqrt(a.sem^2 + b.sem^2)
double combined_sem(const SampleStats& a, const SampleStats& b);

// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples`.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov p-value P(D_n > d) with Stephens' small-sample
/// correction sqrt(n) + 0.12 + 0.11/sqrt(n).
double ks_pvalue(double statistic, std::size_t n);

}  // namespace simrf
