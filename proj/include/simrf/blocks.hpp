#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simrf/linalg.hpp"
#include "simrf/rng.hpp"

namespace simrf {

enum class CouplingKind { IID, ORF, SimRF, SimRFPlus };
enum class RotationKind { HaarExact, HdProduct };

struct SimplexPlusSettings {
    std::size_t max_passes = 10;
    double tol = 1e-8;  // max angular residual, radians
};

/// How the directions inside one d x d block are correlated, and how the
/// random rotation is realised.
struct CouplingScheme {
    CouplingKind kind = CouplingKind::IID;
    RotationKind rotation = RotationKind::HaarExact;
    std::size_t hd_blocks = 3;  // k, used when rotation == HdProduct
    SimplexPlusSettings plus{};

    static CouplingScheme iid() { return {CouplingKind::IID}; }
    static CouplingScheme orf() { return {CouplingKind::ORF}; }
    static CouplingScheme simrf() { return {CouplingKind::SimRF}; }
    static CouplingScheme simrf_plus() { return {CouplingKind::SimRFPlus}; }
    [[nodiscard]] CouplingScheme fast(std::size_t k = 3) const;

    bool is_fast() const { return rotation == RotationKind::HdProduct; }
    bool uses_simplex() const {
        return kind == CouplingKind::SimRF || kind == CouplingKind::SimRFPlus;
    }
    // Fast SimRF+ still pays O(d^3) for the direction optimisation.
    bool flagged() const { return kind == CouplingKind::SimRFPlus && is_fast(); }

    std::string label() const;
    static CouplingScheme parse(std::string_view text);

    friend bool operator==(const CouplingScheme& a, const CouplingScheme& b) {
        return a.kind == b.kind && a.rotation == b.rotation &&
               (a.rotation == RotationKind::HaarExact || a.hd_blocks == b.hd_blocks);
    }
};

std::string to_string(CouplingKind kind);

struct SimplexPlusResult {
    Matrix directions;  // unit rows
    std::size_t passes = 0;
    double residual = 0.0;  // max angle between w_i and minus the resultant of the rest
    bool converged = false;
};

/// Iteratively points each direction away from the norm-weighted resultant
/// of all the others (Gauss-Seidel sweeps, i = 1..n in order).
///
/// Rows whose resultant vanishes are left unchanged for that sweep.
SimplexPlusResult simplex_plus_directions(const std::vector<double>& norms,
                                          const Matrix& init_directions,
                                          std::size_t max_passes = 10, double tol = 1e-8);

// Max over i of the angle between w_i and -(sum_{j != i} w_j); zero resultants are skipped.
double simplex_plus_residual(const std::vector<double>& norms, const Matrix& directions);

struct EnsembleBlock {
    std::size_t rows = 0;
    Vector norms;               // all `dim` chi draws; the first `rows` are used
    Matrix dense;               // rows x dim, empty for structured blocks
    std::optional<HdProduct> hd;
    Matrix plus_directions;     // dim x dim, SimRF+ with a structured rotation only
};

/// m projection vectors in R^padded_dim grouped into independent blocks.
class ProjectionEnsemble {
public:
    ProjectionEnsemble(CouplingScheme scheme, std::size_t d, std::size_t m,
                       std::size_t padded_dim, std::uint64_t seed,
                       std::vector<EnsembleBlock> blocks);

    const CouplingScheme& scheme() const { return scheme_; }
    std::size_t d() const { return d_; }
    std::size_t m() const { return m_; }
    std::size_t padded_dim() const { return padded_dim_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<EnsembleBlock>& blocks() const { return blocks_; }

    Matrix dense_block(std::size_t b) const;
    // All m rows stacked, m x padded_dim.
    Matrix dense() const;
    std::vector<double> row_norms() const;

private:
    CouplingScheme scheme_;
    std::size_t d_;
    std::size_t m_;
    std::size_t padded_dim_;
    std::uint64_t seed_;
    std::vector<EnsembleBlock> blocks_;
};

// A single d x d block (materialised densely even for HD rotations).
Matrix build_block(const CouplingScheme& scheme, std::size_t d, const RngStream& rng);

ProjectionEnsemble build_ensemble(const CouplingScheme& scheme, std::size_t d, std::size_t m,
                                  const RngStream& rng);

// W x for x in R^d; zero-pads to padded_dim when the rotation is structured.
Vector project(const ProjectionEnsemble& ensemble, const Vector& x);

// Row-wise projection of a point set: n x d in, n x m out.
Matrix project_rows(const ProjectionEnsemble& ensemble, const Matrix& points);

}  // namespace simrf
