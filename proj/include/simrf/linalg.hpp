#pragma once

#include <cstddef>
#include <vector>

#include "simrf/rng.hpp"

namespace simrf {

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Walsh-Hadamard transform in O(d log d).
///
/// With `normalize` set the result equals H x for the orthonormal Hadamard
/// matrix H (entries +-1/sqrt(d)), so fwht(fwht(x)) == x. Without it the
/// +-1 Sylvester matrix is applied. The input is never modified.
Vector fwht(const Vector& x, bool normalize = true);

// Dense orthonormal Hadamard matrix from the Sylvester recursion.
Matrix dense_hadamard(std::size_t dim);

/// Product of k normalized-Hadamard / Rademacher-diagonal blocks:
///   R = (H D_1)(H D_2) ... (H D_k).
/// Each diagonal holds +-1 entries; dim is a power of two.
class HdProduct {
public:
    HdProduct(std::size_t dim, std::vector<std::vector<int>> diagonals);

    static HdProduct sample(std::size_t dim, std::size_t k, const RngStream& rng);

    std::size_t dim() const { return dim_; }
    std::size_t blocks() const { return diagonals_.size(); }
    const std::vector<std::vector<int>>& diagonals() const { return diagonals_; }

    Matrix dense() const;

private:
    std::size_t dim_;
    std::vector<std::vector<int>> diagonals_;
};

// R x for the HD product, applied right-to-left (D_k first).
Vector hd_apply(const Vector& x, const HdProduct& hd);

// Rows are unit vectors pointing at the vertices of a regular simplex that
// lies in the first d-1 coordinates; pairwise dot products are -1/(d-1).
Matrix simplex_matrix(std::size_t d);

// simplex_matrix(d) * x in O(d) without forming the matrix.
Vector simplex_apply(const Vector& x);

}  // namespace simrf
