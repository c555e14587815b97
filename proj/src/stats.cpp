#include "simrf/stats.hpp"

#include <algorithm>
#include <cmath>

#include "simrf/errors.hpp"

namespace simrf {

void CompensatedSum::add(double x) {
    const double s = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - s) + x : (x - s) + sum_;
    sum_ = s;
}

SampleStats summarize(const std::vector<double>& samples) {
    SampleStats out;
    out.count = samples.size();
    if (samples.empty()) return out;
    CompensatedSum total;
    for (double x : samples) total.add(x);
    out.mean = total.value() / static_cast<double>(samples.size());
    if (samples.size() < 2) return out;
    CompensatedSum squares;
    for (double x : samples) squares.add((x - out.mean) * (x - out.mean));
    out.variance = squares.value() / static_cast<double>(samples.size() - 1);
    out.sem = std::sqrt(out.variance / static_cast<double>(samples.size()));
    return out;
}

std::vector<double> paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ArgumentError("paired_difference: length mismatch");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

double combined_sem(const SampleStats& a, const SampleStats& b) {
    return std::hypot(a.sem, b.sem);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw ArgumentError("ks_statistic: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        worst = std::max({worst, f - lo, hi - f});
    }
    return worst;
}

double ks_pvalue(double statistic, std::size_t n) {
    if (n == 0) throw ArgumentError("ks_pvalue: n must be >= 1");
    const double rn = std::sqrt(static_cast<double>(n));
    const double lambda = (rn + 0.12 + 0.11 / rn) * statistic;
    if (lambda < 0.2) return 1.0;
    // Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-16 * std::abs(sum)) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace simrf
