#include "simrf/rng.hpp"

#include <cmath>
#include <string>

#include "simrf/errors.hpp"

namespace simrf {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream RngStream::substream(std::uint64_t k) const {
    return RngStream(seed, splitmix64(stream_id ^ splitmix64(k + 0x632BE59BD9B4E019ULL)));
}

std::mt19937_64 RngStream::engine() const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    return std::mt19937_64(seq);
}

Matrix sample_gaussian_matrix(std::size_t rows, std::size_t cols, const RngStream& rng) {
    if (rows == 0 || cols == 0) {
        throw ArgumentError("sample_gaussian_matrix: dimensions must be positive");
    }
    auto gen = rng.engine();
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out(r, c) = normal(gen);
        }
    }
    return out;
}

std::vector<double> sample_chi(std::size_t d, std::size_t n, const RngStream& rng) {
    if (d == 0) throw ArgumentError("sample_chi: degrees of freedom must be >= 1");
    if (n == 0) throw ArgumentError("sample_chi: sample count must be >= 1");
    auto gen = rng.engine();
    std::chi_squared_distribution<double> chi2(static_cast<double>(d));
    std::vector<double> out(n);
    for (auto& x : out) {
        double s = 0.0;
        // A zero draw has probability zero but would break positivity.
        do {
            s = chi2(gen);
        } while (!(s > 0.0));
        x = std::sqrt(s);
    }
    return out;
}

Matrix haar_orthogonal(std::size_t d, const RngStream& rng) {
    if (d == 0) throw ArgumentError("haar_orthogonal: dimension must be >= 1");
    RngStream current = rng;
    for (std::uint64_t attempt = 0;; ++attempt) {
        const Matrix g = sample_gaussian_matrix(d, d, current);
        Eigen::HouseholderQR<Matrix> qr(g);
        const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        const double scale = g.cwiseAbs().maxCoeff();
        bool degenerate = false;
        for (std::size_t i = 0; i < d; ++i) {
            if (std::abs(r(i, i)) <= 1e-12 * scale * static_cast<double>(d)) degenerate = true;
        }
        if (!degenerate) {
            Matrix q = qr.householderQ();
            for (std::size_t i = 0; i < d; ++i) {
                if (r(i, i) < 0.0) q.col(i) = -q.col(i);
            }
            return q;
        }
        current = rng.substream(attempt + 1);
    }
}

std::vector<int> sample_rademacher(std::size_t n, const RngStream& rng) {
    auto gen = rng.engine();
    std::bernoulli_distribution coin(0.5);
    std::vector<int> out(n);
    for (auto& s : out) s = coin(gen) ? 1 : -1;
    return out;
}

Matrix sample_unit_directions(std::size_t n, std::size_t d, const RngStream& rng) {
    Matrix g = sample_gaussian_matrix(n, d, rng);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        double norm = g.row(i).norm();
        std::uint64_t retry = 0;
        while (!(norm > 0.0)) {
            g.row(i) = sample_gaussian_matrix(1, d, rng.substream(0xD1EC7 + retry++ + 31 * i));
            norm = g.row(i).norm();
        }
        g.row(i) /= norm;
    }
    return g;
}

}  // namespace simrf
