#pragma once

#include <string>
#include <string_view>

#include "simrf/blocks.hpp"

namespace simrf {

enum class FeatureMapKind { PRF, RFF };

std::string to_string(FeatureMapKind kind);
FeatureMapKind parse_feature_map(std::string_view text);

// A query pair with its derived scalars v = |x + y| and z = |x - y|.
class KernelPair {
public:
    KernelPair(Vector x, Vector y);

    const Vector& x() const { return x_; }
    const Vector& y() const { return y_; }
    double v() const { return v_; }
    double z() const { return z_; }
    std::size_t dim() const { return static_cast<std::size_t>(x_.size()); }

private:
    Vector x_;
    Vector y_;
    double v_;
    double z_;
};

// exp(-|x - y|^2 / 2)
double gaussian_kernel(const KernelPair& pair);
// exp(x . y)
double softmax_kernel(const KernelPair& pair);

/// Positive random features: sqrt(1/m) exp(w_i . x - |x|^2) for each row w_i.
///
/// Throws RangeError when an exponent would overflow a double.
Vector prf_features(const Vector& x, const ProjectionEnsemble& ensemble);

/// Random Fourier features, interleaved per row: sqrt(1/m) [sin(w_i . x), cos(w_i . x)].
Vector rff_features(const Vector& x, const ProjectionEnsemble& ensemble);

Vector features(const Vector& x, const ProjectionEnsemble& ensemble, FeatureMapKind map);

// Row-wise features for a point set (n x m for PRF, n x 2m for RFF).
Matrix feature_rows(const Matrix& points, const ProjectionEnsemble& ensemble,
                    FeatureMapKind map);

// Throws UnsupportedCombination for RFF with simplex-coupled ensembles.
void check_supported(const CouplingScheme& scheme, FeatureMapKind map);

// phi(x) . phi(y), an unbiased estimate of the Gaussian kernel.
double estimate_kernel(const KernelPair& pair, const ProjectionEnsemble& ensemble,
                       FeatureMapKind map);

}  // namespace simrf
