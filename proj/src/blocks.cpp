#include "simrf/blocks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <utility>

#include "simrf/errors.hpp"

namespace simrf {
namespace {

// Sub-stream layout inside one block: norms and rotation are drawn from
// fixed children so that every scheme sees the same norms for a given key.
constexpr std::uint64_t kNormStream = 1;
constexpr std::uint64_t kRotationStream = 2;
constexpr std::uint64_t kDirectionStream = 3;

double chord_angle(const Vector& a, const Vector& b) {
    // Angle between unit vectors, accurate near zero.
    const double chord = (a - b).norm();
    return 2.0 * std::asin(std::min(1.0, chord / 2.0));
}

void check_dim(const CouplingScheme& scheme, std::size_t d) {
    if (d == 0) throw ArgumentError("coupling block: dimension must be >= 1");
    if (scheme.uses_simplex() && d < 2) {
        throw ArgumentError("coupling block: " + scheme.label() + " needs d >= 2");
    }
    if (scheme.is_fast() && scheme.hd_blocks == 0) {
        throw ArgumentError("coupling block: HD product needs at least one block");
    }
}

EnsembleBlock make_block(const CouplingScheme& scheme, std::size_t dim, std::size_t rows,
                         const RngStream& rng) {
    EnsembleBlock block;
    block.rows = rows;
    const std::vector<double> norms = sample_chi(dim, dim, rng.substream(kNormStream));
    block.norms = Eigen::Map<const Vector>(norms.data(), static_cast<Eigen::Index>(dim));

    if (scheme.kind == CouplingKind::IID) {
        Matrix dirs = sample_unit_directions(dim, dim, rng.substream(kDirectionStream));
        block.dense = block.norms.head(rows).asDiagonal() * dirs.topRows(rows);
        return block;
    }

    Matrix geometry;  // directions before rotation; empty means identity (ORF)
    if (scheme.kind == CouplingKind::SimRF) {
        geometry = simplex_matrix(dim);
    } else if (scheme.kind == CouplingKind::SimRFPlus) {
        geometry = simplex_plus_directions(norms, simplex_matrix(dim), scheme.plus.max_passes,
                                           scheme.plus.tol)
                       .directions;
    }

    if (scheme.rotation == RotationKind::HaarExact) {
        const Matrix r = haar_orthogonal(dim, rng.substream(kRotationStream));
        const Matrix dirs = geometry.size() == 0 ? r : Matrix(geometry * r);
        block.dense = block.norms.head(rows).asDiagonal() * dirs.topRows(rows);
    } else {
        block.hd = HdProduct::sample(dim, scheme.hd_blocks, rng.substream(kRotationStream));
        if (scheme.kind == CouplingKind::SimRFPlus) block.plus_directions = std::move(geometry);
    }
    return block;
}

Vector project_block(const CouplingScheme& scheme, const EnsembleBlock& block,
                     const Vector& xp) {
    if (block.dense.size() != 0) return block.dense * xp;
    const Vector rx = hd_apply(xp, *block.hd);
    Vector dir;
    switch (scheme.kind) {
        case CouplingKind::ORF: dir = rx; break;
        case CouplingKind::SimRF: dir = simplex_apply(rx); break;
        case CouplingKind::SimRFPlus: dir = block.plus_directions * rx; break;
        case CouplingKind::IID: throw ComputationError("IID block without dense storage");
    }
    const auto rows = static_cast<Eigen::Index>(block.rows);
    return block.norms.head(rows).cwiseProduct(dir.head(rows));
}

}  // namespace

std::string to_string(CouplingKind kind) {
    switch (kind) {
        case CouplingKind::IID: return "IID";
        case CouplingKind::ORF: return "ORF";
        case CouplingKind::SimRF: return "SimRF";
        case CouplingKind::SimRFPlus: return "SimRF+";
    }
    return "?";
}

CouplingScheme CouplingScheme::fast(std::size_t k) const {
    CouplingScheme out = *this;
    out.rotation = RotationKind::HdProduct;
    out.hd_blocks = k;
    return out;
}

std::string CouplingScheme::label() const {
    std::string base = to_string(kind);
    if (rotation == RotationKind::HdProduct) {
        return "fast" + std::to_string(hd_blocks) + "-" + base;
    }
    return base;
}

CouplingScheme CouplingScheme::parse(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    CouplingScheme out;
    if (s.rfind("fast", 0) == 0) {
        const auto dash = s.find('-');
        if (dash == std::string::npos) throw ArgumentError("unknown coupling scheme '" + s + "'");
        const std::string k = s.substr(4, dash - 4);
        out.rotation = RotationKind::HdProduct;
        if (!k.empty()) {
            if (!std::all_of(k.begin(), k.end(), ::isdigit) || std::stoul(k) == 0) {
                throw ArgumentError("bad HD block count in scheme '" + s + "'");
            }
            out.hd_blocks = std::stoul(k);
        }
        s = s.substr(dash + 1);
    }
    if (s == "iid") {
        out.kind = CouplingKind::IID;
    } else if (s == "orf") {
        out.kind = CouplingKind::ORF;
    } else if (s == "simrf") {
        out.kind = CouplingKind::SimRF;
    } else if (s == "simrf+" || s == "simrfplus" || s == "simrf-plus") {
        out.kind = CouplingKind::SimRFPlus;
    } else {
        throw ArgumentError("unknown coupling scheme '" + std::string(text) + "'");
    }
    return out;
}

double simplex_plus_residual(const std::vector<double>& norms, const Matrix& directions) {
    Vector total = Vector::Zero(directions.cols());
    for (std::size_t i = 0; i < norms.size(); ++i) {
        total += norms[i] * directions.row(static_cast<Eigen::Index>(i)).transpose();
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const Vector u = directions.row(static_cast<Eigen::Index>(i)).transpose();
        const Vector rest = total - norms[i] * u;
        const double len = rest.norm();
        if (!(len > 0.0)) continue;
        worst = std::max(worst, chord_angle(u, -rest / len));
    }
    return worst;
}

SimplexPlusResult simplex_plus_directions(const std::vector<double>& norms,
                                          const Matrix& init_directions, std::size_t max_passes,
                                          double tol) {
    const std::size_t n = norms.size();
    if (static_cast<std::size_t>(init_directions.rows()) != n) {
        throw ArgumentError("simplex_plus_directions: " + std::to_string(n) + " norms but " +
                            std::to_string(init_directions.rows()) + " directions");
    }
    bool any_positive = false;
    for (double w : norms) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ArgumentError("simplex_plus_directions: norms must be finite and nonnegative");
        }
        any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) throw ArgumentError("simplex_plus_directions: all norms are zero");
    for (Eigen::Index i = 0; i < init_directions.rows(); ++i) {
        if (std::abs(init_directions.row(i).norm() - 1.0) > 1e-8) {
            throw ArgumentError("simplex_plus_directions: initial directions must be unit vectors");
        }
    }

    SimplexPlusResult out;
    out.directions = init_directions;
    out.residual = simplex_plus_residual(norms, out.directions);
    if (out.residual <= tol) {
        out.converged = true;
        return out;
    }

    Vector total = out.directions.transpose() * Eigen::Map<const Vector>(norms.data(), n);
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            const Vector old = out.directions.row(row).transpose();
            const Vector rest = total - norms[i] * old;
            const double len = rest.norm();
            if (!(len > 0.0)) continue;
            const Vector updated = -rest / len;
            out.directions.row(row) = updated.transpose();
            total = rest + norms[i] * updated;
        }
        out.passes = pass + 1;
        out.residual = simplex_plus_residual(norms, out.directions);
        if (out.residual <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

ProjectionEnsemble::ProjectionEnsemble(CouplingScheme scheme, std::size_t d, std::size_t m,
                                       std::size_t padded_dim, std::uint64_t seed,
                                       std::vector<EnsembleBlock> blocks)
    : scheme_(scheme), d_(d), m_(m), padded_dim_(padded_dim), seed_(seed),
      blocks_(std::move(blocks)) {}

Matrix ProjectionEnsemble::dense_block(std::size_t b) const {
    const EnsembleBlock& block = blocks_.at(b);
    if (block.dense.size() != 0) return block.dense;
    Matrix out(block.rows, padded_dim_);
    for (std::size_t c = 0; c < padded_dim_; ++c) {
        out.col(static_cast<Eigen::Index>(c)) =
            project_block(scheme_, block, Vector::Unit(padded_dim_, c));
    }
    return out;
}

Matrix ProjectionEnsemble::dense() const {
    Matrix out(m_, padded_dim_);
    Eigen::Index row = 0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const Matrix block = dense_block(b);
        out.middleRows(row, block.rows()) = block;
        row += block.rows();
    }
    return out;
}

std::vector<double> ProjectionEnsemble::row_norms() const {
    std::vector<double> out;
    out.reserve(m_);
    for (const auto& block : blocks_) {
        for (std::size_t i = 0; i < block.rows; ++i) out.push_back(block.norms[i]);
    }
    return out;
}

Matrix build_block(const CouplingScheme& scheme, std::size_t d, const RngStream& rng) {
    check_dim(scheme, d);
    if (scheme.is_fast() && !is_power_of_two(d)) {
        throw ArgumentError("build_block: HD rotation needs a power-of-two dimension");
    }
    const EnsembleBlock block = make_block(scheme, d, d, rng);
    ProjectionEnsemble single(scheme, d, d, d, rng.seed, {block});
    return single.dense_block(0);
}

ProjectionEnsemble build_ensemble(const CouplingScheme& scheme, std::size_t d, std::size_t m,
                                  const RngStream& rng) {
    check_dim(scheme, d);
    if (m == 0) throw ArgumentError("build_ensemble: m must be >= 1");
    const std::size_t dim = scheme.is_fast() ? next_power_of_two(d) : d;
    if (scheme.uses_simplex() && dim < 2) {
        throw ArgumentError("build_ensemble: simplex coupling needs dimension >= 2");
    }
    const std::size_t count = (m + dim - 1) / dim;
    std::vector<EnsembleBlock> blocks;
    blocks.reserve(count);
    for (std::size_t b = 0; b < count; ++b) {
        const std::size_t rows = std::min(dim, m - b * dim);
        blocks.push_back(make_block(scheme, dim, rows, rng.substream(b)));
    }
    return ProjectionEnsemble(scheme, d, m, dim, rng.seed, std::move(blocks));
}

Vector project(const ProjectionEnsemble& ensemble, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != ensemble.d()) {
        throw ArgumentError("project: input has length " + std::to_string(x.size()) +
                            ", ensemble expects " + std::to_string(ensemble.d()));
    }
    Vector xp = Vector::Zero(ensemble.padded_dim());
    xp.head(x.size()) = x;
    Vector out(ensemble.m());
    Eigen::Index row = 0;
    for (const auto& block : ensemble.blocks()) {
        const auto rows = static_cast<Eigen::Index>(block.rows);
        out.segment(row, rows) = project_block(ensemble.scheme(), block, xp);
        row += rows;
    }
    return out;
}

Matrix project_rows(const ProjectionEnsemble& ensemble, const Matrix& points) {
    if (static_cast<std::size_t>(points.cols()) != ensemble.d()) {
        throw ArgumentError("project_rows: points have " + std::to_string(points.cols()) +
                            " columns, ensemble expects " + std::to_string(ensemble.d()));
    }
    Matrix out(points.rows(), ensemble.m());
    Eigen::Index col = 0;
    for (const auto& block : ensemble.blocks()) {
        const auto rows = static_cast<Eigen::Index>(block.rows);
        if (block.dense.size() != 0) {
            out.middleCols(col, rows) =
                points * block.dense.leftCols(points.cols()).transpose();
        } else {
            Vector xp = Vector::Zero(ensemble.padded_dim());
            for (Eigen::Index i = 0; i < points.rows(); ++i) {
                xp.head(points.cols()) = points.row(i).transpose();
                out.row(i).segment(col, rows) =
                    project_block(ensemble.scheme(), block, xp).transpose();
            }
        }
        col += rows;
    }
    return out;
}

}  // namespace simrf
