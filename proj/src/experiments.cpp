#include "simrf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simrf/errors.hpp"
#include "simrf/parallel.hpp"

namespace simrf {
namespace {

void check_trials(std::size_t trials, const char* what) {
    if (trials < 2) throw ArgumentError(std::string(what) + ": need at least two trials");
}

int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    int best = 0;
    for (Eigen::Index c = 1; c < row.size(); ++c) {
        if (row[c] > row[best]) best = static_cast<int>(c);
    }
    return best;
}

Predictions finish(Matrix numer, const Vector& denom) {
    Predictions out;
    const auto n = numer.rows();
    const auto classes = numer.cols();
    out.classes.resize(n);
    out.fallback.assign(n, 0);
    for (Eigen::Index q = 0; q < n; ++q) {
        bool uniform = !(denom[q] > 0.0) || !std::isfinite(denom[q]);
        if (!uniform) {
            numer.row(q) = numer.row(q).cwiseMax(0.0);
            const double total = numer.row(q).sum();
            uniform = !(total > 0.0);
            if (!uniform) numer.row(q) /= total;
        }
        if (uniform) {
            numer.row(q).setConstant(1.0 / static_cast<double>(classes));
            out.fallback[q] = 1;
        }
        out.classes[q] = argmax(numer.row(q));
    }
    out.distribution = std::move(numer);
    return out;
}

Predictions predict_exact(const Matrix& train_x, const Matrix& train_y, const Matrix& queries,
                          double sigma) {
    Matrix numer(queries.rows(), train_y.cols());
    Vector denom(queries.rows());
    Vector logw(train_x.rows());
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        for (Eigen::Index j = 0; j < train_x.rows(); ++j) {
            logw[j] = -0.5 * sigma * sigma * (queries.row(q) - train_x.row(j)).squaredNorm();
        }
        const Vector w = (logw.array() - logw.maxCoeff()).exp();
        numer.row(q) = w.transpose() * train_y;
        denom[q] = w.sum();
    }
    return finish(std::move(numer), denom);
}

Predictions predict_prf(const Matrix& train_x, const Matrix& train_y, const Matrix& queries,
                        double sigma, const ProjectionEnsemble& ens) {
    // log phi_i(x) up to the common -log(m)/2, per row.
    auto log_features = [&](const Matrix& pts) {
        Matrix l = project_rows(ens, sigma * pts);
        const Vector sq = (sigma * sigma) * pts.rowwise().squaredNorm();
        l.colwise() -= sq;
        return l;
    };
    const Matrix lt = log_features(train_x);
    const Eigen::RowVectorXd shift = lt.colwise().maxCoeff();
    const Matrix et = (lt.rowwise() - shift).array().exp().matrix();
    const Matrix a = et.transpose() * train_y;        // m x classes
    const Vector b = et.transpose() * Vector::Ones(et.rows());

    Matrix tq = log_features(queries);
    tq.rowwise() += shift;
    const Vector qmax = tq.rowwise().maxCoeff();
    tq.colwise() -= qmax;
    const Matrix eq = tq.array().exp().matrix();
    return finish(eq * a, eq * b);
}

Predictions predict_rff(const Matrix& train_x, const Matrix& train_y, const Matrix& queries,
                        double sigma, const ProjectionEnsemble& ens) {
    const Matrix ft = feature_rows(sigma * train_x, ens, FeatureMapKind::RFF);
    const Matrix fq = feature_rows(sigma * queries, ens, FeatureMapKind::RFF);
    const Matrix a = ft.transpose() * train_y;
    const Vector b = ft.transpose() * Vector::Ones(ft.rows());
    return finish(fq * a, fq * b);
}

}  // namespace

std::vector<RatioRow> mse_ratio_curve(std::size_t d, const std::vector<double>& v_grid,
                                      std::size_t m, const SeriesControl& ctl) {
    if (d < 2) throw ArgumentError("mse_ratio_curve: need d >= 2");
    if (m == 0 || m > d) throw ArgumentError("mse_ratio_curve: need 1 <= m <= d");
    std::vector<RatioRow> rows;
    for (double v : v_grid) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("mse_ratio_curve: v must be >= 0");
        RatioRow row;
        row.v = v;
        if (v == 0.0) {
            row.orf_ratio = 1.0;
            row.simrf_ratio = simrf_small_v_ratio_limit(d, m);
            row.limit = true;
        } else {
            const double iid = mse_prf(conformity_iid(v, d), 0.0, 0.0, v, m);
            row.orf_ratio = mse_prf(conformity_orf(v, d, ctl), 0.0, 0.0, v, m) / iid;
            row.simrf_ratio = mse_prf(conformity_simrf(v, d, ctl), 0.0, 0.0, v, m) / iid;
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<MseEstimate> monte_carlo_mse_paired(const std::vector<KernelPair>& pairs,
                                                const std::vector<CouplingScheme>& schemes,
                                                FeatureMapKind map, std::size_t m,
                                                std::size_t trials, const RngStream& rng,
                                                std::size_t threads) {
    check_trials(trials, "monte_carlo_mse");
    if (pairs.empty() || schemes.empty()) throw ArgumentError("monte_carlo_mse: nothing to estimate");
    const std::size_t d = pairs.front().dim();
    for (const auto& p : pairs) {
        if (p.dim() != d) throw ArgumentError("monte_carlo_mse: pairs differ in dimension");
    }
    for (const auto& s : schemes) check_supported(s, map);

    const std::size_t cells = pairs.size() * schemes.size();
    std::vector<double> estimates(trials * cells);
    parallel_for(trials, threads, [&](std::size_t t) {
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            const auto ens = build_ensemble(schemes[s], d, m, rng.substream(t));
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                estimates[t * cells + p * schemes.size() + s] = estimate_kernel(pairs[p], ens, map);
            }
        }
    });

    std::vector<MseEstimate> out;
    out.reserve(cells);
    std::vector<double> values(trials);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            MseEstimate e;
            e.scheme = schemes[s].label();
            e.map = map;
            e.v = pairs[p].v();
            e.z = pairs[p].z();
            e.exact = gaussian_kernel(pairs[p]);
            e.squared_errors.resize(trials);
            for (std::size_t t = 0; t < trials; ++t) {
                values[t] = estimates[t * cells + p * schemes.size() + s];
                e.squared_errors[t] = (values[t] - e.exact) * (values[t] - e.exact);
            }
            e.estimate = summarize(values);
            e.squared_error = summarize(e.squared_errors);
            out.push_back(std::move(e));
        }
    }
    return out;
}

MseEstimate monte_carlo_mse(const KernelPair& pair, const CouplingScheme& scheme,
                            FeatureMapKind map, std::size_t m, std::size_t trials,
                            const RngStream& rng, std::size_t threads) {
    return monte_carlo_mse_paired({pair}, {scheme}, map, m, trials, rng, threads).front();
}

Matrix exact_gram(const Matrix& points) {
    const auto n = points.rows();
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            k(i, j) = std::exp(-0.5 * (points.row(i) - points.row(j)).squaredNorm());
        }
    }
    return k;
}

GramResult gram_frobenius(const Matrix& points, const CouplingScheme& scheme, std::size_t m,
                          std::size_t trials, const RngStream& rng, std::size_t threads) {
    if (points.rows() < 2) throw ArgumentError("gram_frobenius: need at least two points");
    check_trials(trials, "gram_frobenius");
    check_supported(scheme, FeatureMapKind::PRF);
    const Matrix exact = exact_gram(points);
    std::vector<double> errors(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        const auto ens = build_ensemble(scheme, static_cast<std::size_t>(points.cols()), m, rng.substream(t));
        const Matrix phi = feature_rows(points, ens, FeatureMapKind::PRF);
        errors[t] = (exact - phi * phi.transpose()).squaredNorm();
    });
    return {scheme.label(), m, summarize(errors)};
}

std::size_t Predictions::fallback_count() const {
    return static_cast<std::size_t>(std::count(fallback.begin(), fallback.end(), 1));
}

Predictions kernel_regression_predict(const Matrix& train_x, const Matrix& train_onehot,
                                      const Matrix& queries, double sigma,
                                      const RegressionMode& mode) {
    if (train_x.rows() == 0) throw ArgumentError("kernel regression: empty training set");
    if (train_onehot.rows() != train_x.rows()) {
        throw ArgumentError("kernel regression: label rows do not match training rows");
    }
    if (queries.cols() != train_x.cols()) {
        throw ArgumentError("kernel regression: query dimension does not match training data");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("kernel regression: sigma must be > 0");
    if (mode.exact) return predict_exact(train_x, train_onehot, queries, sigma);
    check_supported(mode.scheme, mode.map);
    const auto ens = build_ensemble(mode.scheme, static_cast<std::size_t>(train_x.cols()), mode.m, mode.rng);
    if (mode.map == FeatureMapKind::PRF) return predict_prf(train_x, train_onehot, queries, sigma, ens);
    return predict_rff(train_x, train_onehot, queries, sigma, ens);
}

Vector kernel_regression_predict(const Matrix& train_x, const Matrix& train_onehot,
                                 const Vector& query, double sigma, const RegressionMode& mode) {
    return kernel_regression_predict(train_x, train_onehot, Matrix(query.transpose()), sigma, mode)
        .distribution.row(0)
        .transpose();
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || truth.empty()) {
        throw ArgumentError("accuracy: label vectors must be non-empty and equal in length");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

SigmaTuning tune_sigma(const Dataset& data, const std::vector<double>& sigma_grid, std::size_t m,
                       std::size_t repeats, const RngStream& rng, const CouplingScheme& scheme,
                       std::size_t threads) {
    if (sigma_grid.empty()) throw ArgumentError("tune_sigma: empty sigma grid");
    if (data.train.empty()) throw ArgumentError("tune_sigma: empty training split");
    if (data.validation.empty()) throw ArgumentError("tune_sigma: empty validation split");
    if (repeats == 0) throw ArgumentError("tune_sigma: repeats must be >= 1");
    std::vector<double> grid = sigma_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const Matrix train_x = data.rows(data.train);
    const Matrix train_y = data.one_hot_rows(data.train);
    const Matrix val_x = data.rows(data.validation);
    const std::vector<int> truth = data.labels_of(data.validation);

    std::vector<double> acc(grid.size() * repeats);
    parallel_for(acc.size(), threads, [&](std::size_t k) {
        const std::size_t g = k / repeats;
        const std::size_t r = k % repeats;
        const auto mode = RegressionMode::features(scheme, FeatureMapKind::PRF, m, rng.substream(r));
        acc[k] = accuracy(kernel_regression_predict(train_x, train_y, val_x, grid[g], mode).classes, truth);
    });

    SigmaTuning out;
    double best = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const std::vector<double> slice(acc.begin() + g * repeats, acc.begin() + (g + 1) * repeats);
        SigmaRow row{grid[g], summarize(slice)};
        if (row.accuracy.mean > best) {
            best = row.accuracy.mean;
            out.best_sigma = grid[g];
        }
        out.table.push_back(row);
    }
    return out;
}

ClassificationResult classification_experiment(const Dataset& data,
                                               const std::vector<CouplingScheme>& schemes,
                                               const std::vector<std::size_t>& m_grid,
                                               std::size_t trials, double sigma,
                                               const RngStream& rng, FeatureMapKind map,
                                               std::size_t threads) {
    data.validate();
    if (data.train.empty() || data.test.empty()) {
        throw ArgumentError("classification: dataset needs non-empty train and test splits");
    }
    if (schemes.empty() || m_grid.empty()) throw ArgumentError("classification: nothing to run");
    check_trials(trials, "classification");
    for (const auto& s : schemes) check_supported(s, map);

    const Matrix train_x = data.rows(data.train);
    const Matrix train_y = data.one_hot_rows(data.train);
    const Matrix test_x = data.rows(data.test);
    const std::vector<int> truth = data.labels_of(data.test);

    ClassificationResult out;
    out.dataset = data.name;
    out.sigma = sigma;
    out.map = map;
    out.exact_accuracy = accuracy(
        kernel_regression_predict(train_x, train_y, test_x, sigma, RegressionMode::exact_kernel()).classes,
        truth);

    for (std::size_t mi = 0; mi < m_grid.size(); ++mi) {
        std::vector<double> acc(trials * schemes.size());
        std::vector<std::size_t> fallbacks(trials * schemes.size());
        parallel_for(trials, threads, [&](std::size_t t) {
            const RngStream stream = rng.substream(mi).substream(t);
            for (std::size_t s = 0; s < schemes.size(); ++s) {
                const auto mode = RegressionMode::features(schemes[s], map, m_grid[mi], stream);
                const Predictions p = kernel_regression_predict(train_x, train_y, test_x, sigma, mode);
                acc[t * schemes.size() + s] = accuracy(p.classes, truth);
                fallbacks[t * schemes.size() + s] = p.fallback_count();
            }
        });
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            std::vector<double> values(trials);
            std::size_t fb = 0;
            for (std::size_t t = 0; t < trials; ++t) {
                values[t] = acc[t * schemes.size() + s];
                fb += fallbacks[t * schemes.size() + s];
            }
            out.rows.push_back({schemes[s].label(), m_grid[mi], summarize(values), fb});
        }
    }
    return out;
}

}  // namespace simrf
