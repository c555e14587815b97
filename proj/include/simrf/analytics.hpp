#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "simrf/rng.hpp"

namespace simrf {

/// Truncation control for the infinite sums behind the conformity and gap
/// formulas. A sum stops once three consecutive terms fall below
/// rel_tol * |partial sum|; reaching max_terms first is an error.
struct SeriesControl {
    double rel_tol = 1e-12;
    std::size_t max_terms = 10'000;

    void validate() const;
};

/// RF-conformity values for one scheme at one (v, d, m) setting.
struct ConformityReport {
    std::string scheme;
    std::optional<double> analytic;       // closed form, IID/ORF/SimRF only
    double empirical = 0.0;               // value for the drawn configuration
    std::optional<double> empirical_std;  // spread over random couplings, when averaged
    double truncated = 0.0;               // small-v objective on the same configuration
    double v = 0.0;
    std::size_t d = 0;
    std::size_t m = 0;
    std::uint64_t seed = 0;
};

// ---- conformities --------------------------------------------------------

// exp(v^2).
double conformity_iid(double v, std::size_t d);

double conformity_orf(double v, std::size_t d, const SeriesControl& ctl = {});

/// Closed-form conformity of simplex-coupled pairs.
///
/// The inner binomial sum alternates in sign; it is evaluated from
/// log-magnitudes in extended precision and the accumulated rounding error
/// is tracked. A result whose estimated relative error exceeds 1e-6 raises
/// ComputationError rather than returning a cancelled value.
double conformity_simrf(double v, std::size_t d, const SeriesControl& ctl = {});

// Coefficient of v^2 in the SimRF conformity series.
double simrf_conformity_slope(std::size_t d);

/// Conformity of marginally Gaussian pairs held at a fixed angle theta,
/// evaluated term by term with adaptive quadrature over the polar angle.
double conformity_theta(double v, std::size_t d, double cos_theta, const SeriesControl& ctl = {});

/// Gamma(d/2) sum_k (v w / 2)^{2k} / (k! Gamma(k + d/2)) for a single pair
/// with |w_i + w_j|^2 = wij_sq.
double pair_conformity(double wij_sq, double v, std::size_t d, const SeriesControl& ctl = {});

// Conformity of a deterministic set of m vectors (rows), averaged over ordered pairs.
double conformity_empirical(const Matrix& vectors, double v, const SeriesControl& ctl = {});

// First-order (k = 1) part of conformity_empirical, without the constant term.
double truncated_conformity(const Matrix& vectors, double v);

/// Conformity of an ensemble of independent blocks of `block_dim` rows whose
/// within-block pairs have conformity `rho_block`. Cross-block pairs are
/// independent and contribute exp(v^2).
double stacked_conformity(double rho_block, double v, std::size_t block_dim, std::size_t m);

// ---- PRF mean squared error -------------------------------------------

double mse_prf(double rho, double x_norm, double y_norm, double v, std::size_t m);

// 1 - sqrt(pi) Gamma(d+1) Gamma(d/2+1/2) / (Gamma(d/2) Gamma(d/2+1)^2 2^d)
double simrf_small_v_prefactor(std::size_t d);

// lim_{v->0} MSE_SimRF / MSE_IID for m vectors in one block (m <= d).
double simrf_small_v_ratio_limit(std::size_t d, std::size_t m);

// MSE_IID - MSE_ORF for PRFs, m <= d.
double prf_orthogonality_gap(double x_norm, double y_norm, double v, std::size_t d,
                             std::size_t m, const SeriesControl& ctl = {});

// ---- RFF --------------------------------------------------------------

// (1 - exp(-z^2))^2 / (2m)
double mse_rff_iid(double z, std::size_t m);

/// MSE_IID - MSE_ORF for random Fourier features, m <= d.
///
/// The underlying series alternates; compensated summation is used and an
/// estimated relative error above 1e-6 raises ComputationError.
double rff_orthogonality_gap(double z, std::size_t d, std::size_t m,
                             const SeriesControl& ctl = {});

double mse_rff_orf(double z, std::size_t d, std::size_t m, const SeriesControl& ctl = {});

// Large-d approximation of MSE_ORF / MSE_IID for RFFs.
double rff_asymptotic_ratio(double z, std::size_t d, std::size_t m);

// ---- densities of |w_i + w_j| ------------------------------------------

double pdf_wij_iid(double w, std::size_t d);
double cdf_wij_iid(double w, std::size_t d);

// Pair with chi_d norms held at a fixed angle; quadrature over the polar angle.
double pdf_wij_theta(double w, std::size_t d, double cos_theta);
double cdf_wij_theta(double w, std::size_t d, double cos_theta);

// Density of the chi distribution with k degrees of freedom.
double chi_pdf(double x, std::size_t k);

}  // namespace simrf
