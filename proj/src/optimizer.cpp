#include "simrf/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "simrf/blocks.hpp"
#include "simrf/errors.hpp"
#include "simrf/stats.hpp"

namespace simrf {
namespace {

constexpr std::size_t kIidCouplings = 100;

// d/ds of pair_conformity(s, v, d). With a = v^2 s / 4 the derivative series is
// g_1 = v^2 / (2d), g_{k+1} = g_k a / (k (k + d/2)).
double pair_conformity_slope(double s, double v, std::size_t d, const SeriesControl& ctl) {
    const double half_d = static_cast<double>(d) / 2.0;
    const double a = v * v * s / 4.0;
    double term = v * v / (2.0 * static_cast<double>(d));
    if (term == 0.0) return 0.0;
    double sum = term;
    int small = 0;
    for (std::size_t k = 1; k < ctl.max_terms; ++k) {
        const double kk = static_cast<double>(k);
        term *= a / (kk * (kk + half_d));
        sum += term;
        small = (term <= ctl.rel_tol * sum) ? small + 1 : 0;
        if (small >= 3) return sum;
    }
    throw ComputationError("pair_conformity_slope: series did not converge");
}

std::size_t dim_from_angles(std::size_t count) {
    const auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
    if (root * root != count || root == 0) {
        throw ArgumentError("angle vector length must be (d-1)^2 with d >= 2");
    }
    return root + 1;
}

Matrix directions_from_angles(const Vector& angles, std::size_t d) {
    Matrix dirs = Matrix::Zero(d, d);
    dirs(0, 0) = 1.0;
    const auto per = static_cast<Eigen::Index>(d - 1);
    for (std::size_t i = 1; i < d; ++i) {
        dirs.row(i) = hyperspherical_to_unit(angles.segment((i - 1) * per, per)).transpose();
    }
    return dirs;
}

Matrix scale_rows(const Matrix& dirs, const std::vector<double>& norms) {
    return Eigen::Map<const Vector>(norms.data(), static_cast<Eigen::Index>(norms.size()))
               .asDiagonal() *
           dirs;
}

// Reflect the configuration so the first direction becomes e_1, then convert to angles.
Vector angles_from_directions(const Matrix& dirs) {
    const auto d = dirs.cols();
    Matrix aligned = dirs;
    const Vector e1 = Vector::Unit(d, 0);
    const Vector h = dirs.row(0).transpose() - e1;
    const double hh = h.squaredNorm();
    if (hh > 1e-30) aligned = dirs - 2.0 * (dirs * h) * h.transpose() / hh;
    Vector angles((d - 1) * (d - 1));
    for (Eigen::Index i = 1; i < d; ++i) {
        const Vector u = aligned.row(i).transpose().normalized();
        angles.segment((i - 1) * (d - 1), d - 1) = unit_to_hyperspherical(u);
    }
    return angles;
}

struct LocalResult {
    Vector angles;
    double rho = 0.0;
    double start = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

LocalResult bfgs(const std::vector<double>& norms, Vector x, double v,
                 const OptimizerSettings& settings, const SeriesControl& ctl) {
    const auto n = x.size();
    LocalResult out;
    double f = conformity_of_angles(norms, x, v, ctl);
    out.start = f;
    Vector g = conformity_gradient(norms, x, v, ctl);
    Matrix h = Matrix::Identity(n, n);
    std::size_t iter = 0;
    for (; iter < settings.max_iters; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < settings.gradient_tol) {
            out.converged = true;
            break;
        }
        Vector p = -h * g;
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            h.setIdentity();
            p = -g;
            slope = -g.squaredNorm();
        }
        double step = 1.0;
        Vector trial = x + step * p;
        double f_trial = conformity_of_angles(norms, trial, v, ctl);
        while (f_trial > f + settings.armijo * step * slope) {
            step *= settings.shrink;
            if (step < 1e-16) break;
            trial = x + step * p;
            f_trial = conformity_of_angles(norms, trial, v, ctl);
        }
        if (!(f_trial <= f)) break;  // line search stalled at rounding level
        const Vector g_new = conformity_gradient(norms, trial, v, ctl);
        const Vector s = trial - x;
        const Vector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            const Vector hy = h * y;
            const double yhy = y.dot(hy);
            h += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
                 (hy * s.transpose() + s * hy.transpose()) / sy;
        }
        x = trial;
        f = f_trial;
        g = g_new;
    }
    out.angles = x;
    out.rho = f;
    out.iterations = iter;
    return out;
}

ConformityReport make_report(const std::string& scheme, const Matrix& rows, double v,
                             std::uint64_t seed, const SeriesControl& ctl) {
    ConformityReport r;
    r.scheme = scheme;
    r.empirical = conformity_empirical(rows, v, ctl);
    r.truncated = truncated_conformity(rows, v);
    r.v = v;
    r.d = static_cast<std::size_t>(rows.cols());
    r.m = static_cast<std::size_t>(rows.rows());
    r.seed = seed;
    return r;
}

}  // namespace

void OptimizerSettings::validate() const {
    if (restarts == 0) throw ArgumentError("optimizer: restarts must be >= 1");
    if (max_iters == 0) throw ArgumentError("optimizer: max_iters must be >= 1");
    if (!(gradient_tol > 0.0)) throw ArgumentError("optimizer: gradient_tol must be > 0");
    if (!(armijo > 0.0 && armijo < 1.0)) throw ArgumentError("optimizer: armijo must lie in (0, 1)");
    if (!(shrink > 0.0 && shrink < 1.0)) throw ArgumentError("optimizer: shrink must lie in (0, 1)");
}

Vector hyperspherical_to_unit(const Vector& angles) {
    const auto n = angles.size();
    Vector u(n + 1);
    double prefix = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        u[k] = prefix * std::cos(angles[k]);
        prefix *= std::sin(angles[k]);
    }
    u[n] = prefix;
    return u;
}

Vector unit_to_hyperspherical(const Vector& u) {
    const auto n = u.size() - 1;
    if (n < 1) throw ArgumentError("unit_to_hyperspherical: need length >= 2");
    Vector angles(n);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        angles[k] = std::atan2(u.tail(u.size() - k - 1).norm(), u[k]);
    }
    angles[n - 1] = std::atan2(u[n], u[n - 1]);
    return angles;
}

double conformity_of_angles(const std::vector<double>& norms, const Vector& angles, double v,
                            const SeriesControl& ctl) {
    const std::size_t d = dim_from_angles(static_cast<std::size_t>(angles.size()));
    if (norms.size() != d) throw ArgumentError("conformity_of_angles: need d norms");
    return conformity_empirical(scale_rows(directions_from_angles(angles, d), norms), v, ctl);
}

Vector conformity_gradient(const std::vector<double>& norms, const Vector& angles, double v,
                           const SeriesControl& ctl) {
    const std::size_t d = dim_from_angles(static_cast<std::size_t>(angles.size()));
    if (norms.size() != d) throw ArgumentError("conformity_gradient: need d norms");
    const Matrix w = scale_rows(directions_from_angles(angles, d), norms);
    const double pair_weight = 2.0 / static_cast<double>(d * (d - 1));

    Matrix grad_w = Matrix::Zero(d, d);  // d rho / d w_i, one row per vector
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const Vector sum = (w.row(i) + w.row(j)).transpose();
            const double slope = pair_conformity_slope(sum.squaredNorm(), v, d, ctl);
            const Vector g = pair_weight * slope * 2.0 * sum;
            grad_w.row(i) += g.transpose();
            grad_w.row(j) += g.transpose();
        }
    }

    const auto per = static_cast<Eigen::Index>(d - 1);
    Vector out(angles.size());
    for (std::size_t i = 1; i < d; ++i) {
        const Vector theta = angles.segment((i - 1) * per, per);
        const Vector gu = norms[i] * grad_w.row(i).transpose();
        for (Eigen::Index k = 0; k < per; ++k) {
            // d u / d theta_k, component by component.
            double acc = 0.0;
            for (Eigen::Index j = k; j <= per; ++j) {
                double prod = 1.0;
                for (Eigen::Index l = 0; l < j && l < per; ++l) {
                    prod *= (l == k) ? std::cos(theta[l]) : std::sin(theta[l]);
                }
                double du = 0.0;
                if (j == k) {
                    du = -prod * std::sin(theta[k]);
                } else {
                    du = j < per ? prod * std::cos(theta[j]) : prod;
                }
                acc += gu[j] * du;
            }
            out[(i - 1) * per + k] = acc;
        }
    }
    return out;
}

OptimizedDirections optimize_directions(const std::vector<double>& norms, double v,
                                        const OptimizerSettings& settings,
                                        const RngStream& rng, const SeriesControl& ctl) {
    settings.validate();
    ctl.validate();
    const std::size_t d = norms.size();
    if (d < 2) throw ArgumentError("optimize_directions: need d >= 2");
    if (!(v >= 0.0)) throw ArgumentError("optimize_directions: v must be >= 0");
    for (double w : norms) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ArgumentError("optimize_directions: norms must be positive");
        }
    }

    OptimizedDirections best;
    best.rho = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (std::size_t r = 0; r < settings.restarts; ++r) {
        Matrix start;
        if (r == 0 && settings.structured_starts) {
            start = simplex_matrix(d);
        } else if (r == 1 && settings.structured_starts) {
            start = simplex_plus_directions(norms, simplex_matrix(d)).directions;
        } else {
            start = sample_unit_directions(d, d, rng.substream(r));
        }
        const LocalResult local = bfgs(norms, angles_from_directions(start), v, settings, ctl);
        if (r == 0) best.start_rho = local.start;
        any_converged = any_converged || local.converged;
        if (local.rho < best.rho) {
            best.rho = local.rho;
            best.directions = directions_from_angles(local.angles, d);
            best.best_restart = r;
            best.iterations = local.iterations;
        }
    }
    best.converged = any_converged;
    return best;
}

std::vector<ConformityReport> conformity_comparison(std::size_t d, double v,
                                                   const RngStream& rng,
                                                   bool include_numerical,
                                                   const OptimizerSettings& settings,
                                                   const SeriesControl& ctl) {
    if (d < 2) throw ArgumentError("conformity_comparison: need d >= 2");
    if (!(v >= 0.0)) throw ArgumentError("conformity_comparison: v must be >= 0");
    // Same sub-stream layout as an ensemble block: 1 = norms, 2 = rotation, 3 = directions.
    const std::vector<double> norms = sample_chi(d, d, rng.substream(1));
    const Vector w = Eigen::Map<const Vector>(norms.data(), static_cast<Eigen::Index>(d));
    std::vector<ConformityReport> out;

    std::vector<double> iid_rho;
    std::vector<double> iid_trunc;
    for (std::size_t k = 0; k < kIidCouplings; ++k) {
        const Matrix rows = w.asDiagonal() * sample_unit_directions(d, d, rng.substream(3).substream(k));
        iid_rho.push_back(conformity_empirical(rows, v, ctl));
        iid_trunc.push_back(truncated_conformity(rows, v));
    }
    const SampleStats iid = summarize(iid_rho);
    ConformityReport iid_report;
    iid_report.scheme = "IID";
    iid_report.analytic = conformity_iid(v, d);
    iid_report.empirical = iid.mean;
    iid_report.empirical_std = std::sqrt(iid.variance);
    iid_report.truncated = summarize(iid_trunc).mean;
    iid_report.v = v;
    iid_report.d = d;
    iid_report.m = d;
    iid_report.seed = rng.seed;
    out.push_back(iid_report);

    const Matrix rotation = haar_orthogonal(d, rng.substream(2));
    ConformityReport orf = make_report("ORF", w.asDiagonal() * rotation, v, rng.seed, ctl);
    orf.analytic = conformity_orf(v, d, ctl);
    out.push_back(orf);

    const Matrix simplex = simplex_matrix(d);
    ConformityReport sim = make_report("SimRF", w.asDiagonal() * simplex * rotation, v, rng.seed, ctl);
    sim.analytic = conformity_simrf(v, d, ctl);
    out.push_back(sim);

    const Matrix plus = simplex_plus_directions(norms, simplex).directions;
    out.push_back(make_report("SimRF+", w.asDiagonal() * plus * rotation, v, rng.seed, ctl));

    if (include_numerical) {
        const OptimizedDirections opt = optimize_directions(norms, v, settings, rng.substream(4), ctl);
        out.push_back(make_report("numerical", w.asDiagonal() * opt.directions, v, rng.seed, ctl));
    }
    return out;
}

}  // namespace simrf
