#include "simrf/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "simrf/errors.hpp"

namespace simrf {
namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kMaxRelError = 1e-6;

struct SeriesSum {
    double value = 0.0;
    double abs_sum = 0.0;
    std::size_t terms = 0;
};

/// Neumaier-compensated sum of next(0), next(1), ... with the
/// three-consecutive-small-terms stopping rule.
template <class Next>
SeriesSum sum_series(Next&& next, const SeriesControl& ctl, const char* what) {
    double sum = 0.0;
    double comp = 0.0;
    double abs_sum = 0.0;
    int small = 0;
    for (std::size_t k = 0; k < ctl.max_terms; ++k) {
        const double t = next(k);
        if (!std::isfinite(t)) {
            throw ComputationError(std::string(what) + ": non-finite term at k=" +
                                   std::to_string(k));
        }
        const double s = sum + t;
        comp += std::abs(sum) >= std::abs(t) ? (sum - s) + t : (t - s) + sum;
        sum = s;
        abs_sum += std::abs(t);
        const double total = sum + comp;
        const bool negligible =
            std::abs(t) <= ctl.rel_tol * std::abs(total) || (t == 0.0 && k >= 3);
        small = negligible ? small + 1 : 0;
        if (small >= 3) return {sum + comp, abs_sum, k + 1};
    }
    throw ComputationError(std::string(what) + ": series did not converge after k=" +
                           std::to_string(ctl.max_terms) + " terms");
}

double integrate(const auto& f, double a, double b, const char* what) {
    double error = 0.0;
    double l1 = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-13, &error,
                                                                      &l1);
    if (!std::isfinite(value) || error > std::max(1e-10, 1e-9 * std::abs(l1))) {
        throw ComputationError(std::string(what) + ": quadrature failed (error estimate " +
                               std::to_string(error) + ")");
    }
    return value;
}

void check_dim(std::size_t d, std::size_t min, const char* what) {
    if (d < min) {
        throw ArgumentError(std::string(what) + ": dimension must be >= " + std::to_string(min));
    }
}

void check_v(double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ArgumentError(std::string(what) + ": v must be finite and >= 0");
    }
}

double lgam(double x) { return std::lgamma(x); }

// r_k = Gamma(d/2) Gamma(k+d) / (2^k Gamma(d) Gamma(k+d/2)), computed by recurrence.
struct OrfRatio {
    double d;
    double r = 1.0;
    double advance(std::size_t k) {  // returns r_k, call with k = 0, 1, 2, ...
        if (k > 0) r *= (d + static_cast<double>(k) - 1.0) / (d + 2.0 * static_cast<double>(k) - 2.0);
        return r;
    }
};

// Signed sum over k >= 2 of s^k / k! * (1 - r_k), s = +v^2 (PRF) or -z^2 (RFF).
SeriesSum orthogonality_series(double s, std::size_t d, const SeriesControl& ctl,
                               const char* what) {
    OrfRatio ratio{static_cast<double>(d)};
    double power = 1.0;  // s^k / k!
    return sum_series(
        [&](std::size_t k) {
            if (k > 0) power *= s / static_cast<double>(k);
            const double r = ratio.advance(k);
            return k < 2 ? 0.0 : power * (1.0 - r);
        },
        ctl, what);
}

}  // namespace

void SeriesControl::validate() const {
    if (!(rel_tol > 0.0)) throw ArgumentError("SeriesControl: rel_tol must be > 0");
    if (max_terms == 0) throw ArgumentError("SeriesControl: max_terms must be >= 1");
}

double conformity_iid(double v, std::size_t /*d*/) {
    check_v(v, "conformity_iid");
    return std::exp(v * v);
}

double conformity_orf(double v, std::size_t d, const SeriesControl& ctl) {
    ctl.validate();
    check_dim(d, 2, "conformity_orf");
    check_v(v, "conformity_orf");
    if (v == 0.0) return 1.0;
    const double dd = static_cast<double>(d);
    const double base = lgam(dd / 2.0) - lgam(dd);
    const double log_v = std::log(v);
    return sum_series(
               [&](std::size_t k) {
                   const double kk = static_cast<double>(k);
                   return std::exp(base + 2.0 * kk * log_v - kk * kLn2 - lgam(kk + 1.0) +
                                   lgam(kk + dd) - lgam(kk + dd / 2.0));
               },
               ctl, "conformity_orf")
        .value;
}

double conformity_simrf(double v, std::size_t d, const SeriesControl& ctl) {
    ctl.validate();
    check_dim(d, 2, "conformity_simrf");
    check_v(v, "conformity_simrf");
    if (v == 0.0) return 1.0;
    using ld = long double;
    const ld dd = static_cast<ld>(d);
    const ld log_c = -std::log(dd - 1.0L);
    const ld log_pref =
        0.5L * std::log(std::numbers::pi_v<ld>) - std::lgamma(dd / 2.0L) - (dd - 1.0L) * std::log(2.0L);
    const ld log_v = std::log(static_cast<ld>(v));
    const ld eps = std::numeric_limits<ld>::epsilon();

    std::vector<ld> log_mag;
    double error = 0.0;
    const SeriesSum series = sum_series(
        [&](std::size_t k) {
            const ld kk = static_cast<ld>(k);
            const ld outer = log_pref + std::lgamma(kk + dd) - std::lgamma(kk + dd / 2.0L) +
                             2.0L * kk * log_v - kk * std::log(2.0L);
            log_mag.assign(k + 1, 0.0L);
            ld top = -std::numeric_limits<ld>::infinity();
            for (std::size_t p = 0; p <= k; ++p) {
                const ld pp = static_cast<ld>(p);
                log_mag[p] = pp * log_c + std::lgamma((dd + pp) / 2.0L) -
                             std::lgamma((dd + pp + 1.0L) / 2.0L) -
                             std::lgamma(kk - pp + 1.0L) - std::lgamma(pp + 1.0L);
                top = std::max(top, log_mag[p]);
            }
            ld sum = 0.0L;
            ld comp = 0.0L;
            ld abs_sum = 0.0L;
            for (std::size_t p = 0; p <= k; ++p) {
                const ld a = (p % 2 == 0 ? 1.0L : -1.0L) * std::exp(log_mag[p] - top);
                const ld s = sum + a;
                comp += std::abs(sum) >= std::abs(a) ? (sum - s) + a : (a - s) + sum;
                sum = s;
                abs_sum += std::abs(a);
            }
            const ld scale = std::exp(outer + top);
            // lgamma/exp rounding scales with the size of the log arguments.
            const ld log_size = std::max<ld>(1.0L, std::abs(outer + top) + std::abs(top));
            error += static_cast<double>(64.0L * eps * log_size * abs_sum * scale);
            return static_cast<double>(scale * (sum + comp));
        },
        ctl, "conformity_simrf");
    if (!(series.value > 0.0) || error > kMaxRelError * series.value) {
        throw ComputationError("conformity_simrf: catastrophic cancellation (estimated relative error " +
                               std::to_string(error / std::abs(series.value)) + ")");
    }
    return series.value;
}

double simrf_conformity_slope(std::size_t d) {
    check_dim(d, 2, "simrf_conformity_slope");
    const double dd = static_cast<double>(d);
    const double c = 1.0 / (dd - 1.0);
    const double b0 = std::exp(lgam(dd / 2.0) - lgam((dd + 1.0) / 2.0));
    const double b1 = std::exp(lgam((dd + 1.0) / 2.0) - lgam((dd + 2.0) / 2.0));
    const double pref = std::exp(0.5 * std::log(std::numbers::pi) - lgam(dd / 2.0) -
                                 (dd - 1.0) * kLn2 + lgam(1.0 + dd) - lgam(1.0 + dd / 2.0));
    return pref / 2.0 * (b0 - c * b1);
}

double conformity_theta(double v, std::size_t d, double cos_theta, const SeriesControl& ctl) {
    ctl.validate();
    check_dim(d, 2, "conformity_theta");
    check_v(v, "conformity_theta");
    if (!(std::abs(cos_theta) <= 1.0)) {
        throw ArgumentError("conformity_theta: |cos_theta| must be <= 1");
    }
    if (v == 0.0) return 1.0;
    const double dd = static_cast<double>(d);
    const double log_v = std::log(v);
    return sum_series(
               [&](std::size_t k) {
                   const double kk = static_cast<double>(k);
                   const double coef =
                       std::exp(lgam(kk + dd) - lgam(kk + dd / 2.0) - lgam(kk + 1.0) -
                                lgam(dd / 2.0) - (dd - 1.0 + kk) * kLn2 + 2.0 * kk * log_v);
                   const double j = integrate(
                       [&](double phi) {
                           const double s = std::sin(phi);
                           return std::pow(s, dd - 1.0) * std::pow(1.0 + s * cos_theta, kk);
                       },
                       0.0, std::numbers::pi, "conformity_theta");
                   return coef * j;
               },
               ctl, "conformity_theta")
        .value;
}

double pair_conformity(double wij_sq, double v, std::size_t d, const SeriesControl& ctl) {
    ctl.validate();
    check_dim(d, 1, "pair_conformity");
    check_v(v, "pair_conformity");
    if (!(wij_sq >= 0.0)) throw ArgumentError("pair_conformity: wij_sq must be >= 0");
    const double a = v * v * wij_sq / 4.0;
    if (a == 0.0) return 1.0;
    const double nu = static_cast<double>(d) / 2.0 - 1.0;
    double term = 1.0;
    return sum_series(
               [&](std::size_t k) {
                   if (k > 0) {
                       const double kk = static_cast<double>(k);
                       term *= a / (kk * (kk + nu));
                   }
                   return term;
               },
               ctl, "pair_conformity")
        .value;
}

double conformity_empirical(const Matrix& vectors, double v, const SeriesControl& ctl) {
    const auto m = static_cast<std::size_t>(vectors.rows());
    if (m < 2) throw ArgumentError("conformity_empirical: need at least two vectors");
    const auto d = static_cast<std::size_t>(vectors.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < vectors.rows(); ++j) {
            total += 2.0 * pair_conformity((vectors.row(i) + vectors.row(j)).squaredNorm(), v, d, ctl);
        }
    }
    return total / static_cast<double>(m * (m - 1));
}

double truncated_conformity(const Matrix& vectors, double v) {
    const auto m = static_cast<std::size_t>(vectors.rows());
    if (m < 2) throw ArgumentError("truncated_conformity: need at least two vectors");
    const double d = static_cast<double>(vectors.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < vectors.rows(); ++j) {
            total += 2.0 * (vectors.row(i) + vectors.row(j)).squaredNorm();
        }
    }
    // Gamma(d/2) / Gamma(1 + d/2) = 2/d
    return v * v / (2.0 * d * static_cast<double>(m * (m - 1))) * total;
}

double stacked_conformity(double rho_block, double v, std::size_t block_dim, std::size_t m) {
    if (block_dim == 0) throw ArgumentError("stacked_conformity: block_dim must be >= 1");
    if (m < 2) return rho_block;
    double within = 0.0;
    for (std::size_t start = 0; start < m; start += block_dim) {
        const double rows = static_cast<double>(std::min(block_dim, m - start));
        within += rows * (rows - 1.0);
    }
    const double pairs = static_cast<double>(m) * static_cast<double>(m - 1);
    return (within * rho_block + (pairs - within) * std::exp(v * v)) / pairs;
}

double mse_prf(double rho, double x_norm, double y_norm, double v, std::size_t m) {
    if (m == 0) throw ArgumentError("mse_prf: m must be >= 1");
    check_v(v, "mse_prf");
    const double pref = std::exp(-2.0 * x_norm * x_norm - 2.0 * y_norm * y_norm) /
                        static_cast<double>(m);
    const double ev = std::exp(v * v);
    const double variance = std::exp(2.0 * v * v) - ev;
    if (m == 1) return pref * variance;
    return pref * (variance + static_cast<double>(m - 1) * (rho - ev));
}

double simrf_small_v_prefactor(std::size_t d) {
    check_dim(d, 2, "simrf_small_v_prefactor");
    const double dd = static_cast<double>(d);
    const double log_term = 0.5 * std::log(std::numbers::pi) + lgam(dd + 1.0) +
                            lgam(dd / 2.0 + 0.5) - lgam(dd / 2.0) - 2.0 * lgam(dd / 2.0 + 1.0) -
                            dd * kLn2;
    return 1.0 - std::exp(log_term);
}

double simrf_small_v_ratio_limit(std::size_t d, std::size_t m) {
    check_dim(d, 2, "simrf_small_v_ratio_limit");
    if (m == 0 || m > d) throw ArgumentError("simrf_small_v_ratio_limit: need 1 <= m <= d");
    return 1.0 + static_cast<double>(m - 1) * (simrf_conformity_slope(d) - 1.0);
}

double prf_orthogonality_gap(double x_norm, double y_norm, double v, std::size_t d,
                             std::size_t m, const SeriesControl& ctl) {
    ctl.validate();
    check_dim(d, 2, "prf_orthogonality_gap");
    check_v(v, "prf_orthogonality_gap");
    if (m < 2 || m > d) throw ArgumentError("prf_orthogonality_gap: need 2 <= m <= d");
    if (v == 0.0) return 0.0;
    const SeriesSum s = orthogonality_series(v * v, d, ctl, "prf_orthogonality_gap");
    return std::exp(-2.0 * x_norm * x_norm - 2.0 * y_norm * y_norm) *
           static_cast<double>(m - 1) / static_cast<double>(m) * s.value;
}

double mse_rff_iid(double z, std::size_t m) {
    if (m == 0) throw ArgumentError("mse_rff_iid: m must be >= 1");
    const double a = -std::expm1(-z * z);
    return a * a / (2.0 * static_cast<double>(m));
}

double rff_orthogonality_gap(double z, std::size_t d, std::size_t m, const SeriesControl& ctl) {
    ctl.validate();
    check_dim(d, 1, "rff_orthogonality_gap");
    if (!(z >= 0.0) || !std::isfinite(z)) throw ArgumentError("rff_orthogonality_gap: z must be >= 0");
    if (m < 2 || m > d) throw ArgumentError("rff_orthogonality_gap: need 2 <= m <= d");
    if (z == 0.0) return 0.0;
    const SeriesSum s = orthogonality_series(-z * z, d, ctl, "rff_orthogonality_gap");
    const double rel = std::numeric_limits<double>::epsilon() * 8.0 * s.abs_sum / std::abs(s.value);
    if (!(rel <= kMaxRelError)) {
        throw ComputationError("rff_orthogonality_gap: cancellation, estimated relative error " +
                               std::to_string(rel) + " at z=" + std::to_string(z) +
                               ", d=" + std::to_string(d));
    }
    return static_cast<double>(m - 1) / static_cast<double>(m) * s.value;
}

double mse_rff_orf(double z, std::size_t d, std::size_t m, const SeriesControl& ctl) {
    return mse_rff_iid(z, m) - rff_orthogonality_gap(z, d, m, ctl);
}

double rff_asymptotic_ratio(double z, std::size_t d, std::size_t m) {
    check_dim(d, 1, "rff_asymptotic_ratio");
    if (!(z > 0.0)) throw ArgumentError("rff_asymptotic_ratio: z must be > 0");
    if (m == 0) throw ArgumentError("rff_asymptotic_ratio: m must be >= 1");
    const double e = std::exp(-z * z);
    const double a = -std::expm1(-z * z);
    return 1.0 - static_cast<double>(m - 1) * e * std::pow(z, 4) /
                     (static_cast<double>(d) * a * a);
}

double pdf_wij_iid(double w, std::size_t d) {
    check_dim(d, 1, "pdf_wij_iid");
    if (w < 0.0) return 0.0;
    if (w == 0.0) return d == 1 ? 1.0 / std::sqrt(std::numbers::pi) : 0.0;
    const double dd = static_cast<double>(d);
    return std::exp((dd - 1.0) * std::log(w) - w * w / 4.0 - (dd - 1.0) * kLn2 - lgam(dd / 2.0));
}

double cdf_wij_iid(double w, std::size_t d) {
    check_dim(d, 1, "cdf_wij_iid");
    if (w <= 0.0) return 0.0;
    return boost::math::gamma_p(static_cast<double>(d) / 2.0, w * w / 4.0);
}

double pdf_wij_theta(double w, std::size_t d, double cos_theta) {
    check_dim(d, 2, "pdf_wij_theta");
    if (!(std::abs(cos_theta) <= 1.0)) throw ArgumentError("pdf_wij_theta: |cos_theta| must be <= 1");
    if (w <= 0.0) return 0.0;
    const double dd = static_cast<double>(d);
    const double log_pref = (2.0 * dd - 1.0) * std::log(w) - (dd - 2.0) * kLn2 - 2.0 * lgam(dd / 2.0);
    return integrate(
        [&](double phi) {
            const double sc = std::sin(phi) * std::cos(phi);
            const double c = 1.0 + 2.0 * sc * cos_theta;
            if (!(sc > 0.0) || !(c > 0.0)) return 0.0;
            return std::exp(log_pref + (dd - 1.0) * std::log(sc) - w * w / (2.0 * c) -
                            dd * std::log(c));
        },
        0.0, std::numbers::pi / 2.0, "pdf_wij_theta");
}

double cdf_wij_theta(double w, std::size_t d, double cos_theta) {
    check_dim(d, 2, "cdf_wij_theta");
    if (!(std::abs(cos_theta) <= 1.0)) throw ArgumentError("cdf_wij_theta: |cos_theta| must be <= 1");
    if (w <= 0.0) return 0.0;
    const double dd = static_cast<double>(d);
    const double log_pref = kLn2 + lgam(dd) - 2.0 * lgam(dd / 2.0);
    const double value = integrate(
        [&](double phi) {
            const double sc = std::sin(phi) * std::cos(phi);
            if (!(sc > 0.0)) return 0.0;
            const double c = 1.0 + 2.0 * sc * cos_theta;
            const double p = c > 0.0 ? boost::math::gamma_p(dd, w * w / (2.0 * c)) : 1.0;
            return std::exp(log_pref + (dd - 1.0) * std::log(sc)) * p;
        },
        0.0, std::numbers::pi / 2.0, "cdf_wij_theta");
    return std::clamp(value, 0.0, 1.0);
}

double chi_pdf(double x, std::size_t k) {
    if (k == 0) throw ArgumentError("chi_pdf: k must be >= 1");
    if (x <= 0.0) return 0.0;
    const double kk = static_cast<double>(k);
    return std::exp((kk - 1.0) * std::log(x) - x * x / 2.0 - (kk / 2.0 - 1.0) * kLn2 - lgam(kk / 2.0));
}

}  // namespace simrf
