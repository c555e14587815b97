#include "simrf/feature_maps.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "simrf/errors.hpp"

namespace simrf {
namespace {

// log(DBL_MAX) with a little headroom.
constexpr double kMaxExponent = 709.0;

void check_dim(std::size_t got, const ProjectionEnsemble& ensemble, const char* what) {
    if (got != ensemble.d()) {
        throw ArgumentError(std::string(what) + ": input has length " + std::to_string(got) +
                            ", ensemble expects " + std::to_string(ensemble.d()));
    }
}

}  // namespace

std::string to_string(FeatureMapKind kind) { return kind == FeatureMapKind::PRF ? "PRF" : "RFF"; }

FeatureMapKind parse_feature_map(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "prf") return FeatureMapKind::PRF;
    if (s == "rff") return FeatureMapKind::RFF;
    throw ArgumentError("unknown feature map '" + std::string(text) + "'");
}

KernelPair::KernelPair(Vector x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) {
        throw ArgumentError("KernelPair: dimension mismatch (" + std::to_string(x_.size()) +
                            " vs " + std::to_string(y_.size()) + ")");
    }
    v_ = (x_ + y_).norm();
    z_ = (x_ - y_).norm();
}

double gaussian_kernel(const KernelPair& pair) { return std::exp(-0.5 * pair.z() * pair.z()); }

double softmax_kernel(const KernelPair& pair) { return std::exp(pair.x().dot(pair.y())); }

Vector prf_features(const Vector& x, const ProjectionEnsemble& ensemble) {
    check_dim(static_cast<std::size_t>(x.size()), ensemble, "prf_features");
    Vector expo = project(ensemble, x).array() - x.squaredNorm();
    if (expo.maxCoeff() > kMaxExponent) {
        throw RangeError("prf_features: exponent " + std::to_string(expo.maxCoeff()) +
                         " overflows double precision");
    }
    return expo.array().exp() / std::sqrt(static_cast<double>(ensemble.m()));
}

Vector rff_features(const Vector& x, const ProjectionEnsemble& ensemble) {
    check_dim(static_cast<std::size_t>(x.size()), ensemble, "rff_features");
    const Vector proj = project(ensemble, x);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ensemble.m()));
    Vector out(2 * proj.size());
    for (Eigen::Index i = 0; i < proj.size(); ++i) {
        out[2 * i] = scale * std::sin(proj[i]);
        out[2 * i + 1] = scale * std::cos(proj[i]);
    }
    return out;
}

Vector features(const Vector& x, const ProjectionEnsemble& ensemble, FeatureMapKind map) {
    return map == FeatureMapKind::PRF ? prf_features(x, ensemble) : rff_features(x, ensemble);
}

Matrix feature_rows(const Matrix& points, const ProjectionEnsemble& ensemble,
                    FeatureMapKind map) {
    const Matrix proj = project_rows(ensemble, points);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ensemble.m()));
    if (map == FeatureMapKind::PRF) {
        Matrix expo = proj;
        expo.colwise() -= points.rowwise().squaredNorm();
        if (expo.size() > 0 && expo.maxCoeff() > kMaxExponent) {
            throw RangeError("feature_rows: PRF exponent " + std::to_string(expo.maxCoeff()) +
                             " overflows double precision");
        }
        return scale * expo.array().exp().matrix();
    }
    Matrix out(proj.rows(), 2 * proj.cols());
    for (Eigen::Index c = 0; c < proj.cols(); ++c) {
        out.col(2 * c) = scale * proj.col(c).array().sin().matrix();
        out.col(2 * c + 1) = scale * proj.col(c).array().cos().matrix();
    }
    return out;
}

void check_supported(const CouplingScheme& scheme, FeatureMapKind map) {
    if (map == FeatureMapKind::RFF && scheme.uses_simplex()) {
        throw UnsupportedCombination("RFF estimates are only supported for IID and ORF coupling, not " +
                                     scheme.label());
    }
}

double estimate_kernel(const KernelPair& pair, const ProjectionEnsemble& ensemble,
                       FeatureMapKind map) {
    check_supported(ensemble.scheme(), map);
    return features(pair.x(), ensemble, map).dot(features(pair.y(), ensemble, map));
}

}  // namespace simrf
