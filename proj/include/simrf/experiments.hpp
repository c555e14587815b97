#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simrf/analytics.hpp"
#include "simrf/dataset.hpp"
#include "simrf/feature_maps.hpp"
#include "simrf/stats.hpp"

namespace simrf {

// ---- MSE ratio curves ----------------------------------------------------

struct RatioRow {
    double v = 0.0;
    double orf_ratio = 0.0;    // MSE_ORF / MSE_IID
    double simrf_ratio = 0.0;  // MSE_SimRF / MSE_IID
    bool limit = false;        // v = 0: values are the v -> 0 limits
};

/// Analytic MSE ratios for m <= d vectors in a single block.
std::vector<RatioRow> mse_ratio_curve(std::size_t d, const std::vector<double>& v_grid,
                                      std::size_t m, const SeriesControl& ctl = {});

// ---- Monte Carlo kernel estimates ------------------------------------------

struct MseEstimate {
    std::string scheme;
    FeatureMapKind map = FeatureMapKind::PRF;
    double v = 0.0;
    double z = 0.0;
    double exact = 0.0;                 // Gaussian kernel value
    SampleStats estimate;               // of K-hat
    SampleStats squared_error;          // of (K-hat - K)^2; its mean is the MSE
    std::vector<double> squared_errors;  // per trial, for paired comparisons
};

/// Every scheme and pair is evaluated on the same trial streams
/// (rng.substream(t) for trial t), so schemes share norm draws and rotations.
/// Results are ordered pair-major: index = pair * schemes.size() + scheme.
std::vector<MseEstimate> monte_carlo_mse_paired(const std::vector<KernelPair>& pairs,
                                                const std::vector<CouplingScheme>& schemes,
                                                FeatureMapKind map, std::size_t m,
                                                std::size_t trials, const RngStream& rng,
                                                std::size_t threads = 0);

MseEstimate monte_carlo_mse(const KernelPair& pair, const CouplingScheme& scheme,
                            FeatureMapKind map, std::size_t m, std::size_t trials,
                            const RngStream& rng, std::size_t threads = 0);

// ---- Gram matrix approximation -------------------------------------------

struct GramResult {
    std::string scheme;
    std::size_t m = 0;
    SampleStats error;  // sum_ij (K_ij - K-hat_ij)^2 over trials
};

GramResult gram_frobenius(const Matrix& points, const CouplingScheme& scheme, std::size_t m,
                          std::size_t trials, const RngStream& rng, std::size_t threads = 0);

Matrix exact_gram(const Matrix& points);

// ---- kernel regression ---------------------------------------------------

/// How kernel values are obtained: exactly, or from one random-feature ensemble.
struct RegressionMode {
    bool exact = true;
    CouplingScheme scheme{};
    FeatureMapKind map = FeatureMapKind::PRF;
    std::size_t m = 0;
    RngStream rng{};

    static RegressionMode exact_kernel() { return {}; }
    static RegressionMode features(const CouplingScheme& scheme, FeatureMapKind map,
                                   std::size_t m, const RngStream& rng) {
        return {false, scheme, map, m, rng};
    }
};

struct Predictions {
    Matrix distribution;          // queries x classes, rows sum to one
    std::vector<int> classes;     // argmax, ties to the lowest index
    std::vector<char> fallback;   // 1 where the denominator vanished and a uniform row was used
    std::size_t fallback_count() const;
};

/// Nadaraya-Watson class distribution with the Gaussian kernel K(sigma x', sigma x).
///
/// PRF and exact weights are combined in the log domain with per-column
/// shifts, which leaves the normalised prediction unchanged but cannot
/// overflow. RFF weights may be negative: negative class scores are
/// clamped to zero, and a non-positive denominator gives a uniform row.
Predictions kernel_regression_predict(const Matrix& train_x, const Matrix& train_onehot,
                                      const Matrix& queries, double sigma,
                                      const RegressionMode& mode);

// Single-query convenience form.
Vector kernel_regression_predict(const Matrix& train_x, const Matrix& train_onehot,
                                 const Vector& query, double sigma, const RegressionMode& mode);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct SigmaRow {
    double sigma = 0.0;
    SampleStats accuracy;
};

struct SigmaTuning {
    double best_sigma = 0.0;
    std::vector<SigmaRow> table;  // validation accuracy per grid value
};

/// Grid search for the sigma that maximises validation accuracy of the
/// given scheme (IID PRFs by default), averaged over `repeats` ensembles.
/// Ties go to the smaller sigma.
SigmaTuning tune_sigma(const Dataset& data, const std::vector<double>& sigma_grid,
                       std::size_t m, std::size_t repeats, const RngStream& rng,
                       const CouplingScheme& scheme = CouplingScheme::iid(),
                       std::size_t threads = 0);

struct ClassificationRow {
    std::string scheme;
    std::size_t m = 0;
    SampleStats accuracy;  // test accuracy over trials
    std::size_t fallbacks = 0;
};

struct ClassificationResult {
    std::string dataset;
    double sigma = 0.0;
    FeatureMapKind map = FeatureMapKind::PRF;
    double exact_accuracy = 0.0;
    std::vector<ClassificationRow> rows;  // m-major, then schemes in input order
};

/// Test accuracy per (scheme, m). Within one m, trial t uses the same stream
/// for every scheme.
ClassificationResult classification_experiment(const Dataset& data,
                                               const std::vector<CouplingScheme>& schemes,
                                               const std::vector<std::size_t>& m_grid,
                                               std::size_t trials, double sigma,
                                               const RngStream& rng,
                                               FeatureMapKind map = FeatureMapKind::PRF,
                                               std::size_t threads = 0);

}  // namespace simrf
