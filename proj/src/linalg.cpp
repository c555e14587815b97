#include "simrf/linalg.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "simrf/errors.hpp"

namespace simrf {

Vector fwht(const Vector& x, bool normalize) {
    const auto n = static_cast<std::size_t>(x.size());
    if (!is_power_of_two(n)) {
        throw ArgumentError("fwht: length " + std::to_string(n) + " is not a power of two");
    }
    Vector y = x;
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = y[j];
                const double b = y[j + h];
                y[j] = a + b;
                y[j + h] = a - b;
            }
        }
    }
    if (normalize) y /= std::sqrt(static_cast<double>(n));
    return y;
}

Matrix dense_hadamard(std::size_t dim) {
    if (!is_power_of_two(dim)) {
        throw ArgumentError("dense_hadamard: dimension must be a power of two");
    }
    Matrix h = Matrix::Ones(1, 1);
    while (static_cast<std::size_t>(h.rows()) < dim) {
        const Eigen::Index n = h.rows();
        Matrix next(2 * n, 2 * n);
        next << h, h, h, -h;
        h = std::move(next);
    }
    return h / std::sqrt(static_cast<double>(dim));
}

HdProduct::HdProduct(std::size_t dim, std::vector<std::vector<int>> diagonals)
    : dim_(dim), diagonals_(std::move(diagonals)) {
    if (!is_power_of_two(dim_)) {
        throw ArgumentError("HdProduct: dimension " + std::to_string(dim_) +
                            " is not a power of two");
    }
    for (const auto& diag : diagonals_) {
        if (diag.size() != dim_) throw ArgumentError("HdProduct: diagonal length mismatch");
        for (int s : diag) {
            if (s != 1 && s != -1) throw ArgumentError("HdProduct: diagonal entries must be +-1");
        }
    }
}

HdProduct HdProduct::sample(std::size_t dim, std::size_t k, const RngStream& rng) {
    std::vector<std::vector<int>> diagonals;
    diagonals.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        diagonals.push_back(sample_rademacher(dim, rng.substream(i)));
    }
    return HdProduct(dim, std::move(diagonals));
}

Matrix HdProduct::dense() const {
    const Matrix h = dense_hadamard(dim_);
    Matrix out = Matrix::Identity(dim_, dim_);
    for (const auto& diag : diagonals_) {
        Matrix block = h;
        for (std::size_t c = 0; c < dim_; ++c) block.col(c) *= diag[c];
        out = out * block;
    }
    return out;
}

Vector hd_apply(const Vector& x, const HdProduct& hd) {
    if (static_cast<std::size_t>(x.size()) != hd.dim()) {
        throw ArgumentError("hd_apply: vector length " + std::to_string(x.size()) +
                            " does not match HD dimension " + std::to_string(hd.dim()));
    }
    Vector y = x;
    const auto& diags = hd.diagonals();
    for (auto it = diags.rbegin(); it != diags.rend(); ++it) {
        for (std::size_t i = 0; i < hd.dim(); ++i) y[i] *= (*it)[i];
        y = fwht(y, true);
    }
    return y;
}

Matrix simplex_matrix(std::size_t d) {
    if (d < 2) throw ArgumentError("simplex_matrix: dimension must be >= 2");
    const double dd = static_cast<double>(d);
    const double diag = std::sqrt(dd / (dd - 1.0));
    const double shift = (std::sqrt(dd) + 1.0) / std::pow(dd - 1.0, 1.5);
    Matrix s = Matrix::Zero(d, d);
    for (std::size_t i = 0; i + 1 < d; ++i) {
        for (std::size_t j = 0; j + 1 < d; ++j) s(i, j) = -shift;
        s(i, i) += diag;
    }
    for (std::size_t j = 0; j + 1 < d; ++j) s(d - 1, j) = 1.0 / std::sqrt(dd - 1.0);
    return s;
}

Vector simplex_apply(const Vector& x) {
    const auto d = static_cast<std::size_t>(x.size());
    if (d < 2) throw ArgumentError("simplex_apply: dimension must be >= 2");
    const double dd = static_cast<double>(d);
    const double diag = std::sqrt(dd / (dd - 1.0));
    const double shift = (std::sqrt(dd) + 1.0) / std::pow(dd - 1.0, 1.5);
    const double head_sum = x.head(d - 1).sum();
    Vector y(d);
    for (std::size_t i = 0; i + 1 < d; ++i) y[i] = diag * x[i] - shift * head_sum;
    y[d - 1] = head_sum / std::sqrt(dd - 1.0);
    return y;
}

}  // namespace simrf
