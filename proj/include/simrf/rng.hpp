#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace simrf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Key into a family of independent pseudo-random sequences.
///
/// An RngStream is a value, not a generator: every sampler builds its own
/// engine from (seed, stream_id), so equal keys always reproduce the same
/// draws regardless of call order or thread. Child keys obtained with
/// substream() are statistically independent of the parent and each other.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    RngStream() = default;
    constexpr RngStream(std::uint64_t s, std::uint64_t id = 0) : seed(s), stream_id(id) {}

    [[nodiscard]] RngStream substream(std::uint64_t k) const;
    [[nodiscard]] std::mt19937_64 engine() const;

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

// i.i.d. standard normal entries, filled in row-major order.
Matrix sample_gaussian_matrix(std::size_t rows, std::size_t cols, const RngStream& rng);

// n draws from the chi distribution with d degrees of freedom.
std::vector<double> sample_chi(std::size_t d, std::size_t n, const RngStream& rng);

/// Haar-distributed orthogonal d x d matrix.
///
/// QR of a Gaussian matrix with the columns of Q sign-corrected so the
/// triangular factor has a positive diagonal. A numerically rank-deficient
/// draw is discarded and redrawn from a child stream.
Matrix haar_orthogonal(std::size_t d, const RngStream& rng);

// n independent +-1 values with equal probability.
std::vector<int> sample_rademacher(std::size_t n, const RngStream& rng);

// n points drawn uniformly from the unit sphere in R^d, one per row.
Matrix sample_unit_directions(std::size_t n, std::size_t d, const RngStream& rng);

}  // namespace simrf
