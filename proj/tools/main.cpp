#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "simrf/analytics.hpp"
#include "simrf/dataset.hpp"
#include "simrf/errors.hpp"
#include "simrf/experiments.hpp"
#include "simrf/optimizer.hpp"
#include "simrf/report.hpp"

namespace fs = std::filesystem;
using namespace simrf;

namespace {

constexpr const char* kOutEnv = "SIMRF_OUT_DIR";

struct RunConfig {
    std::string subcommand;
    std::uint64_t seed = 42;
    std::size_t threads = 0;
    std::string out_dir;
    double rel_tol = 1e-12;
    std::size_t max_terms = 10'000;

    std::size_t d = 0;
    std::size_t m = 0;
    std::vector<double> v_grid;
    std::vector<double> z_grid;
    std::vector<std::string> schemes;
    std::string map = "PRF";
    std::size_t trials = 0;

    bool numerical = false;
    std::size_t draws = 1;
    OptimizerSettings optimizer;
    std::vector<double> norms;

    double x_norm = -1.0;
    double y_norm = -1.0;

    std::size_t n_points = 64;
    double point_sigma = 0.1;
    std::vector<std::size_t> m_grid;

    std::string data_path;
    std::string synthetic;
    std::string csv_delimiter = ",";
    CsvOptions csv;
    double sigma = 1.0;
    bool tune_sigma = false;
    std::vector<double> sigma_grid;
    std::size_t tune_repeats = 10;

    double w_max = 0.0;
    std::size_t points = 200;
    bool quick = false;
    std::string kind;
    std::string file;

    SeriesControl series() const { return {rel_tol, max_terms}; }
    RngStream rng() const { return RngStream(seed); }

    Json to_json() const {
        Json j = Json::object();
        j["subcommand"] = subcommand;
        j["seed"] = seed;
        j["threads"] = threads;
        j["out_dir"] = out_dir;
        j["series"] = {{"rel_tol", rel_tol}, {"max_terms", max_terms}};
        j["d"] = d;
        j["m"] = m;
        j["v"] = v_grid;
        j["z"] = z_grid;
        j["schemes"] = schemes;
        j["map"] = map;
        j["trials"] = trials;
        j["numerical"] = numerical;
        j["draws"] = draws;
        j["optimizer"] = {{"restarts", optimizer.restarts},
                          {"max_iters", optimizer.max_iters},
                          {"gradient_tol", optimizer.gradient_tol}};
        j["norms"] = norms;
        j["x_norm"] = x_norm;
        j["y_norm"] = y_norm;
        j["n_points"] = n_points;
        j["point_sigma"] = point_sigma;
        j["m_grid"] = m_grid;
        j["dataset"] = {{"path", data_path},
                        {"synthetic", synthetic},
                        {"label_column", csv.label_column},
                        {"delimiter", csv_delimiter},
                        {"header", csv.header},
                        {"train_fraction", csv.train_fraction},
                        {"validation_fraction", csv.validation_fraction},
                        {"split_seed", csv.split_seed},
                        {"standardize", csv.standardize}};
        j["sigma"] = sigma;
        j["tune_sigma"] = tune_sigma;
        j["sigma_grid"] = sigma_grid;
        j["tune_repeats"] = tune_repeats;
        j["w_max"] = w_max;
        j["points"] = points;
        j["quick"] = quick;
        j["kind"] = kind;
        j["file"] = file;
        return j;
    }

    void validate() const {
        series().validate();
        optimizer.validate();
        if (csv_delimiter.size() != 1) throw ArgumentError("--delimiter must be a single character");
        for (double v : v_grid) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("--v values must be >= 0");
        }
        for (double z : z_grid) {
            if (!(z >= 0.0) || !std::isfinite(z)) throw ArgumentError("--z values must be >= 0");
        }
        for (const auto& s : schemes) (void)CouplingScheme::parse(s);
        (void)parse_feature_map(map);
        if (sigma <= 0.0) throw ArgumentError("--sigma must be > 0");
        for (double s : sigma_grid) {
            if (!(s > 0.0)) throw ArgumentError("--sigma-grid values must be > 0");
        }
    }
};

std::vector<CouplingScheme> parse_schemes(const std::vector<std::string>& names) {
    std::vector<CouplingScheme> out;
    for (const auto& n : names) out.push_back(CouplingScheme::parse(n));
    return out;
}

fs::path output_path(const RunConfig& cfg, const std::string& name) { return fs::path(cfg.out_dir) / name; }

void emit(const RunConfig& cfg, const std::string& name, const CsvTable& table,
          ExperimentReport& report) {
    const fs::path path = output_path(cfg, name);
    write_csv(path, cfg.to_json(), table);
    report.files.push_back(path.string());
}

void finish(const RunConfig& cfg, ExperimentReport& report) {
    report.kind = cfg.subcommand;
    report.config = cfg.to_json();
    const fs::path path = output_path(cfg, cfg.subcommand + ".json");
    report.files.push_back(path.string());
    report.write(path);
    for (const auto& f : report.files) std::cout << "wrote " << f << '\n';
}

std::string opt_double(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

// ---- subcommands ---------------------------------------------------------

int run_conformity(const RunConfig& cfg) {
    if (cfg.d < 2) throw ArgumentError("--d must be >= 2");
    CsvTable table({"draw", "scheme", "v", "d", "m", "analytic", "empirical", "empirical_std", "truncated"});
    ExperimentReport report;
    for (double v : cfg.v_grid) {
        for (std::size_t draw = 0; draw < cfg.draws; ++draw) {
            const auto rows = conformity_comparison(cfg.d, v, cfg.rng().substream(draw), cfg.numerical,
                                                    cfg.optimizer, cfg.series());
            for (const auto& r : rows) {
                table.add_row({std::to_string(draw), r.scheme, format_double(v), std::to_string(r.d),
                               std::to_string(r.m), opt_double(r.analytic), format_double(r.empirical),
                               opt_double(r.empirical_std), format_double(r.truncated)});
                Json s = {{"draw", draw}, {"scheme", r.scheme}, {"v", v}, {"empirical", r.empirical},
                          {"truncated", r.truncated}, {"trials", 1}};
                if (r.analytic) s["analytic"] = *r.analytic;
                if (r.empirical_std) {
                    s["empirical_std"] = *r.empirical_std;
                    s["trials"] = 100;
                }
                report.statistics.push_back(s);
                std::cout << "v=" << v << " draw=" << draw << "  " << r.scheme
                          << "  rho=" << format_double(r.empirical)
                          << (r.analytic ? "  analytic=" + format_double(*r.analytic) : "") << '\n';
            }
        }
    }
    emit(cfg, "conformity.csv", table, report);
    finish(cfg, report);
    return 0;
}

int run_mse_curve(const RunConfig& cfg) {
    const std::size_t m = cfg.m == 0 ? cfg.d : cfg.m;
    const auto rows = mse_ratio_curve(cfg.d, cfg.v_grid, m, cfg.series());
    CsvTable table({"v", "orf_ratio", "simrf_ratio", "limit"});
    ExperimentReport report;
    for (const auto& r : rows) {
        table.add_row({format_double(r.v), format_double(r.orf_ratio), format_double(r.simrf_ratio),
                       r.limit ? "1" : "0"});
        report.statistics.push_back({{"v", r.v}, {"orf_ratio", r.orf_ratio},
                                     {"simrf_ratio", r.simrf_ratio}, {"limit", r.limit}, {"trials", 0}});
        std::cout << "v=" << format_double(r.v) << "  ORF/IID=" << format_double(r.orf_ratio)
                  << "  SimRF/IID=" << format_double(r.simrf_ratio) << (r.limit ? "  (limit)" : "")
                  << '\n';
    }
    emit(cfg, "mse_curve.csv", table, report);
    finish(cfg, report);
    return 0;
}

int run_gap(const RunConfig& cfg) {
    const std::size_t m = cfg.m == 0 ? cfg.d : cfg.m;
    const FeatureMapKind map = parse_feature_map(cfg.map);
    ExperimentReport report;
    const bool mc = cfg.trials > 0;
    if (map == FeatureMapKind::PRF) {
        CsvTable table({"v", "x_norm", "y_norm", "mse_iid", "mse_orf", "gap", "mc_gap", "mc_gap_sem", "trials"});
        for (double v : cfg.v_grid) {
            const double xn = cfg.x_norm >= 0.0 ? cfg.x_norm : v / 2.0;
            const double yn = cfg.y_norm >= 0.0 ? cfg.y_norm : v / 2.0;
            if (v > xn + yn + 1e-12 || v < std::abs(xn - yn) - 1e-12) {
                throw ArgumentError("--v inconsistent with --x-norm/--y-norm (triangle inequality)");
            }
            const double iid = mse_prf(conformity_iid(v, cfg.d), xn, yn, v, m);
            const double orf = mse_prf(conformity_orf(v, cfg.d, cfg.series()), xn, yn, v, m);
            const double gap = prf_orthogonality_gap(xn, yn, v, cfg.d, m, cfg.series());
            std::string mc_gap, mc_sem;
            if (mc) {
                // x and y in a common plane with the requested norms and |x + y| = v.
                const double cos_xy = xn > 0 && yn > 0 ? std::clamp((v * v - xn * xn - yn * yn) / (2 * xn * yn), -1.0, 1.0) : 1.0;
                Vector x = Vector::Zero(cfg.d);
                Vector y = Vector::Zero(cfg.d);
                x[0] = xn;
                y[0] = yn * cos_xy;
                y[1] = yn * std::sqrt(std::max(0.0, 1.0 - cos_xy * cos_xy));
                const auto est = monte_carlo_mse_paired({KernelPair(x, y)}, {CouplingScheme::iid(), CouplingScheme::orf()},
                                                        map, m, cfg.trials, cfg.rng(), cfg.threads);
                const SampleStats diff = summarize(paired_difference(est[0].squared_errors, est[1].squared_errors));
                mc_gap = format_double(diff.mean);
                mc_sem = format_double(diff.sem);
            }
            table.add_row({format_double(v), format_double(xn), format_double(yn), format_double(iid),
                           format_double(orf), format_double(gap), mc_gap, mc_sem, std::to_string(cfg.trials)});
            report.statistics.push_back({{"v", v}, {"gap", gap}, {"mse_iid", iid}, {"mse_orf", orf}, {"trials", cfg.trials}});
            std::cout << "v=" << format_double(v) << "  gap=" << format_double(gap)
                      << (mc ? "  mc=" + mc_gap + " +- " + mc_sem : "") << '\n';
        }
        emit(cfg, "gap.csv", table, report);
    } else {
        CsvTable table({"z", "mse_iid", "mse_orf", "gap", "exact_ratio", "asymptotic_ratio", "mc_gap", "mc_gap_sem", "trials"});
        for (double z : cfg.z_grid) {
            const double iid = mse_rff_iid(z, m);
            const double gap = rff_orthogonality_gap(z, cfg.d, m, cfg.series());
            const double exact_ratio = z > 0.0 ? 1.0 - gap / iid : 1.0;
            const std::string asym = z > 0.0 ? format_double(rff_asymptotic_ratio(z, cfg.d, m)) : "";
            std::string mc_gap, mc_sem;
            if (mc) {
                const Vector x = Vector::Zero(cfg.d);
                const Vector y = z * Vector::Unit(cfg.d, 0);
                const auto est = monte_carlo_mse_paired({KernelPair(x, y)}, {CouplingScheme::iid(), CouplingScheme::orf()},
                                                        map, m, cfg.trials, cfg.rng(), cfg.threads);
                const SampleStats diff = summarize(paired_difference(est[0].squared_errors, est[1].squared_errors));
                mc_gap = format_double(diff.mean);
                mc_sem = format_double(diff.sem);
            }
            table.add_row({format_double(z), format_double(iid), format_double(iid - gap), format_double(gap),
                           format_double(exact_ratio), asym, mc_gap, mc_sem, std::to_string(cfg.trials)});
            report.statistics.push_back({{"z", z}, {"gap", gap}, {"exact_ratio", exact_ratio}, {"trials", cfg.trials}});
            std::cout << "z=" << format_double(z) << "  gap=" << format_double(gap)
                      << "  ratio=" << format_double(exact_ratio) << (mc ? "  mc=" + mc_gap + " +- " + mc_sem : "")
                      << '\n';
        }
        emit(cfg, "gap.csv", table, report);
    }
    finish(cfg, report);
    return 0;
}

int run_gram(const RunConfig& cfg) {
    if (cfg.trials < 2) throw ArgumentError("--trials must be >= 2");
    const Matrix points = gaussian_points(cfg.n_points, cfg.d, cfg.point_sigma, cfg.rng().substream(0));
    CsvTable table({"scheme", "m", "trials", "mean_error", "sem"});
    ExperimentReport report;
    for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
        for (const auto& scheme : parse_schemes(cfg.schemes)) {
            const GramResult r = gram_frobenius(points, scheme, cfg.m_grid[mi], cfg.trials,
                                                cfg.rng().substream(1).substream(mi), cfg.threads);
            table.add_row({r.scheme, std::to_string(r.m), std::to_string(r.error.count),
                           format_double(r.error.mean), format_double(r.error.sem)});
            Json s = stats_json(r.error);
            s["scheme"] = r.scheme;
            s["m"] = r.m;
            report.statistics.push_back(s);
            std::cout << r.scheme << " m=" << r.m << "  error=" << format_double(r.error.mean) << " +- "
                      << format_double(r.error.sem) << '\n';
        }
    }
    emit(cfg, "gram.csv", table, report);
    finish(cfg, report);
    return 0;
}

Dataset dataset_for(const RunConfig& cfg) {
    Dataset data;
    if (!cfg.data_path.empty()) {
        CsvOptions opts = cfg.csv;
        opts.delimiter = cfg.csv_delimiter[0];
        return load_dataset(cfg.data_path, opts);
    }
    if (cfg.synthetic == "banknote") {
        data = make_banknote_like(cfg.rng().substream(77));
    } else if (cfg.synthetic == "wifi") {
        data = make_wifi_like(cfg.rng().substream(77));
    } else {
        throw ArgumentError("classify needs --data PATH or --synthetic banknote|wifi");
    }
    split_dataset(data, cfg.csv.train_fraction, cfg.csv.validation_fraction, cfg.csv.split_seed);
    if (cfg.csv.standardize) standardize_features(data);
    return data;
}

int run_classify(const RunConfig& cfg) {
    const Dataset data = dataset_for(cfg);
    const FeatureMapKind map = parse_feature_map(cfg.map);
    const std::vector<std::size_t> m_grid = cfg.m_grid.empty() ? std::vector<std::size_t>{data.dim()} : cfg.m_grid;
    ExperimentReport report;
    double sigma = cfg.sigma;
    if (cfg.tune_sigma) {
        const SigmaTuning tuning = tune_sigma(data, cfg.sigma_grid, data.dim(), cfg.tune_repeats,
                                              cfg.rng().substream(10), CouplingScheme::iid(), cfg.threads);
        sigma = tuning.best_sigma;
        CsvTable table({"sigma", "repeats", "mean_accuracy", "sem"});
        for (const auto& r : tuning.table) {
            table.add_row({format_double(r.sigma), std::to_string(r.accuracy.count),
                           format_double(r.accuracy.mean), format_double(r.accuracy.sem)});
        }
        emit(cfg, "sigma_tuning.csv", table, report);
        std::cout << "tuned sigma=" << format_double(sigma) << '\n';
    }
    const ClassificationResult res = classification_experiment(
        data, parse_schemes(cfg.schemes), m_grid, cfg.trials, sigma, cfg.rng().substream(20), map, cfg.threads);
    CsvTable table({"dataset", "scheme", "m", "trials", "mean_accuracy", "sem", "fallbacks", "sigma"});
    table.add_row({res.dataset, "exact", "0", "1", format_double(res.exact_accuracy), "0", "0", format_double(sigma)});
    std::cout << res.dataset << " exact kernel accuracy=" << format_double(res.exact_accuracy) << '\n';
    for (const auto& r : res.rows) {
        table.add_row({res.dataset, r.scheme, std::to_string(r.m), std::to_string(r.accuracy.count),
                       format_double(r.accuracy.mean), format_double(r.accuracy.sem), std::to_string(r.fallbacks),
                       format_double(sigma)});
        Json s = stats_json(r.accuracy);
        s["scheme"] = r.scheme;
        s["m"] = r.m;
        s["fallbacks"] = r.fallbacks;
        report.statistics.push_back(s);
        std::cout << r.scheme << " m=" << r.m << "  accuracy=" << format_double(r.accuracy.mean) << " +- "
                  << format_double(r.accuracy.sem) << '\n';
    }
    report.statistics.push_back({{"scheme", "exact"}, {"mean", res.exact_accuracy}, {"trials", 1}, {"sigma", sigma}});
    emit(cfg, "classify.csv", table, report);
    finish(cfg, report);
    return 0;
}

int run_optimize(const RunConfig& cfg) {
    std::vector<double> norms = cfg.norms;
    if (norms.empty()) {
        if (cfg.d < 2) throw ArgumentError("--d must be >= 2 when --norms is not given");
        norms = sample_chi(cfg.d, cfg.d, cfg.rng().substream(1));
    }
    const double v = cfg.v_grid.empty() ? 1.0 : cfg.v_grid.front();
    const OptimizedDirections opt = optimize_directions(norms, v, cfg.optimizer, cfg.rng().substream(4), cfg.series());
    std::vector<std::string> cols{"index", "norm"};
    for (std::size_t k = 0; k < norms.size(); ++k) cols.push_back("u" + std::to_string(k));
    CsvTable table(cols);
    for (std::size_t i = 0; i < norms.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), format_double(norms[i])};
        for (Eigen::Index k = 0; k < opt.directions.cols(); ++k) row.push_back(format_double(opt.directions(i, k)));
        table.add_row(row);
    }
    ExperimentReport report;
    report.statistics.push_back({{"rho", opt.rho}, {"start_rho", opt.start_rho}, {"best_restart", opt.best_restart},
                                 {"iterations", opt.iterations}, {"converged", opt.converged}, {"trials", 1}});
    std::cout << "rho=" << format_double(opt.rho) << "  simplex start=" << format_double(opt.start_rho)
              << "  restart=" << opt.best_restart << "  iterations=" << opt.iterations
              << (opt.converged ? "" : "  WARNING: not converged") << '\n';
    emit(cfg, "optimize.csv", table, report);
    finish(cfg, report);
    return 0;
}

int run_pdf(const RunConfig& cfg) {
    if (cfg.d < 2) throw ArgumentError("--d must be >= 2");
    if (cfg.points < 2) throw ArgumentError("--points must be >= 2");
    const double c = -1.0 / (static_cast<double>(cfg.d) - 1.0);
    const double w_max = cfg.w_max > 0.0 ? cfg.w_max : 2.0 * std::sqrt(2.0 * cfg.d) + 8.0;
    CsvTable table({"w", "pdf_iid", "pdf_orthogonal", "pdf_simplex", "cdf_iid", "cdf_orthogonal", "cdf_simplex"});
    for (std::size_t i = 0; i < cfg.points; ++i) {
        const double w = w_max * static_cast<double>(i) / static_cast<double>(cfg.points - 1);
        table.add_row({format_double(w), format_double(pdf_wij_iid(w, cfg.d)), format_double(pdf_wij_theta(w, cfg.d, 0.0)),
                       format_double(pdf_wij_theta(w, cfg.d, c)), format_double(cdf_wij_iid(w, cfg.d)),
                       format_double(cdf_wij_theta(w, cfg.d, 0.0)), format_double(cdf_wij_theta(w, cfg.d, c))});
    }
    ExperimentReport report;
    emit(cfg, "pdf.csv", table, report);
    finish(cfg, report);
    return 0;
}

int run_make_data(const RunConfig& cfg) {
    Dataset data;
    if (cfg.kind == "banknote") {
        data = make_banknote_like(cfg.rng().substream(77));
    } else if (cfg.kind == "wifi") {
        data = make_wifi_like(cfg.rng().substream(77));
    } else {
        throw ArgumentError("--kind must be banknote or wifi");
    }
    const fs::path path = cfg.file.empty() ? output_path(cfg, data.name + ".csv") : fs::path(cfg.file);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_dataset_csv(data, path);
    std::cout << "wrote " << path.string() << " (" << data.size() << " rows, " << data.dim() << " features, "
              << data.num_classes() << " classes)\n";
    return 0;
}

int run_selftest(const RunConfig& cfg) {
    const std::size_t trials = cfg.trials > 0 ? cfg.trials : (cfg.quick ? 20'000 : 100'000);
    CsvTable table({"check", "observed", "expected", "tolerance", "pass"});
    ExperimentReport report;
    bool all = true;
    auto record = [&](const std::string& name, double observed, double expected, double tol) {
        const bool pass = std::abs(observed - expected) <= tol;
        all = all && pass;
        table.add_row({name, format_double(observed), format_double(expected), format_double(tol), pass ? "1" : "0"});
        report.statistics.push_back({{"check", name}, {"observed", observed}, {"expected", expected},
                                     {"tolerance", tol}, {"pass", pass}, {"trials", trials}});
        std::cout << (pass ? "PASS  " : "FAIL  ") << name << "  observed=" << format_double(observed)
                  << "  expected=" << format_double(expected) << "  tol=" << format_double(tol) << '\n';
    };

    record("prefactor d=64", simrf_small_v_prefactor(64), 0.0078, 0.00005);
    const std::vector<CouplingScheme> schemes{CouplingScheme::iid(), CouplingScheme::orf(), CouplingScheme::simrf()};
    for (std::size_t d : {4u, 8u}) {
        std::vector<KernelPair> pairs;
        const std::vector<double> vs{0.5, 1.0};
        for (double v : vs) pairs.emplace_back(Vector::Unit(d, 0) * (v / 2), Vector::Unit(d, 0) * (v / 2));
        const auto est = monte_carlo_mse_paired(pairs, schemes, FeatureMapKind::PRF, d, trials,
                                                cfg.rng().substream(d), cfg.threads);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const double v = vs[p];
            const double rho[3] = {conformity_iid(v, d), conformity_orf(v, d, cfg.series()),
                                   conformity_simrf(v, d, cfg.series())};
            for (std::size_t s = 0; s < schemes.size(); ++s) {
                const auto& e = est[p * schemes.size() + s];
                const double analytic = mse_prf(rho[s], v / 2, v / 2, v, d);
                std::ostringstream name;
                name << "PRF MSE " << e.scheme << " d=" << d << " v=" << v;
                record(name.str(), e.squared_error.mean, analytic, 3.0 * e.squared_error.sem);
                record("unbiased " + name.str().substr(8), e.estimate.mean, e.exact, 3.0 * e.estimate.sem);
            }
        }
    }
    {
        const Vector x = Vector::Zero(8);
        const Vector y = Vector::Unit(8, 0);
        const auto est = monte_carlo_mse_paired({KernelPair(x, y)}, {CouplingScheme::iid(), CouplingScheme::orf()},
                                                FeatureMapKind::RFF, 8, trials, cfg.rng().substream(99), cfg.threads);
        const SampleStats diff = summarize(paired_difference(est[0].squared_errors, est[1].squared_errors));
        record("RFF gap d=8 z=1", diff.mean, rff_orthogonality_gap(1.0, 8, 8, cfg.series()), 3.0 * diff.sem);
    }
    emit(cfg, "selftest.csv", table, report);
    finish(cfg, report);
    return all ? 0 : 2;
}

std::string schema_text(const std::string& columns) { return "CSV columns: " + columns; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled random-feature estimators of the Gaussian kernel, with analytics and experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig base;
    std::map<std::string, RunConfig> configs;
    const char* env_out = std::getenv(kOutEnv);
    base.out_dir = env_out && *env_out ? env_out : "simrf-out";

    app.add_option("--seed", base.seed, "Base RNG seed")->capture_default_str();
    app.add_option("--threads", base.threads, "Worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--out", base.out_dir, std::string("Output directory (default from $") + kOutEnv + " or simrf-out)")
        ->capture_default_str();
    app.add_option("--rel-tol", base.rel_tol, "Series truncation tolerance")->capture_default_str();
    app.add_option("--max-terms", base.max_terms, "Series term limit")->capture_default_str();

    {
        RunConfig& cfg = configs["conformity"];
        auto* conformity = app.add_subcommand("conformity", "RF-conformity per scheme for single norm draws");
        conformity->add_option("--d", cfg.d, "Dimension")->default_val(6);
        conformity->add_option("--v", cfg.v_grid, "v values, comma separated")->delimiter(',')->default_val("1");
        conformity->add_option("--draws", cfg.draws, "Independent norm draws")->default_val(1);
        conformity->add_flag("--numerical", cfg.numerical, "Include the numerically optimised configuration");
        conformity->add_option("--restarts", cfg.optimizer.restarts, "Optimizer restarts")->default_val(4);
        conformity->add_option("--max-iters", cfg.optimizer.max_iters, "Optimizer iterations per restart")->default_val(2000);
        conformity->add_option("--gradient-tol", cfg.optimizer.gradient_tol, "Optimizer gradient tolerance")->default_val(1e-7);
        conformity->footer(schema_text("draw,scheme,v,d,m,analytic,empirical,empirical_std,truncated"));

    }
    {
        RunConfig& cfg = configs["mse-curve"];
        auto* curve = app.add_subcommand("mse-curve", "Analytic MSE ratios ORF/IID and SimRF/IID for PRFs");
        curve->add_option("--d", cfg.d, "Dimension")->default_val(64);
        curve->add_option("--m", cfg.m, "Number of features, <= d (0 = d)")->default_val(0);
        curve->add_option("--v", cfg.v_grid, "v values, comma separated")->delimiter(',')
            ->default_val("0,0.25,0.5,0.75,1,1.25,1.5,1.75,2");
        curve->footer(schema_text("v,orf_ratio,simrf_ratio,limit (limit=1 marks the analytic v->0 value)"));

    }
    {
        RunConfig& cfg = configs["gap"];
        auto* gap = app.add_subcommand("gap", "Orthogonality gap MSE_IID - MSE_ORF (PRF or RFF)");
        gap->add_option("--map", cfg.map, "PRF or RFF")->default_val("PRF");
        gap->add_option("--d", cfg.d, "Dimension")->default_val(8);
        gap->add_option("--m", cfg.m, "Number of features, <= d (0 = d)")->default_val(0);
        gap->add_option("--v", cfg.v_grid, "PRF: v values")->delimiter(',')->default_val("0.5,1,2");
        gap->add_option("--z", cfg.z_grid, "RFF: z values")->delimiter(',')->default_val("0.5,1,2");
        gap->add_option("--x-norm", cfg.x_norm, "PRF: |x| (default v/2)");
        gap->add_option("--y-norm", cfg.y_norm, "PRF: |y| (default v/2)");
        gap->add_option("--trials", cfg.trials, "Monte Carlo trials for a simulated gap column (0 = off)")->default_val(0);
        gap->footer(schema_text("PRF: v,x_norm,y_norm,mse_iid,mse_orf,gap,mc_gap,mc_gap_sem,trials; "
                                "RFF: z,mse_iid,mse_orf,gap,exact_ratio,asymptotic_ratio,mc_gap,mc_gap_sem,trials"));

    }
    {
        RunConfig& cfg = configs["gram"];
        auto* gram = app.add_subcommand("gram", "Frobenius error of PRF Gram-matrix approximations");
        gram->add_option("--n", cfg.n_points, "Number of points")->default_val(64);
        gram->add_option("--d", cfg.d, "Dimension")->default_val(64);
        gram->add_option("--point-sigma", cfg.point_sigma, "Coordinate standard deviation of the points")->default_val(0.1);
        gram->add_option("--m", cfg.m_grid, "Feature counts, comma separated")->delimiter(',')
            ->default_val("8,16,32,64,128");
        gram->add_option("--schemes", cfg.schemes, "Schemes, comma separated")->delimiter(',')->default_val("IID,ORF,SimRF");
        gram->add_option("--trials", cfg.trials, "Trials per (scheme, m)")->default_val(200);
        gram->footer(schema_text("scheme,m,trials,mean_error,sem"));

    }
    {
        RunConfig& cfg = configs["classify"];
        auto* classify = app.add_subcommand("classify", "Kernel-regression classification accuracy");
        classify->add_option("--data", cfg.data_path, "CSV dataset");
        classify->add_option("--synthetic", cfg.synthetic, "Built-in synthetic dataset: banknote or wifi");
        classify->add_option("--label-column", cfg.csv.label_column, "Label column, negative counts from the end")->default_val(-1);
        classify->add_option("--delimiter", cfg.csv_delimiter, "Field delimiter")->default_val(",");
        classify->add_flag("--header", cfg.csv.header, "First line is a header");
        classify->add_option("--train-fraction", cfg.csv.train_fraction, "Training fraction")->default_val(0.6);
        classify->add_option("--validation-fraction", cfg.csv.validation_fraction, "Validation fraction")->default_val(0.2);
        classify->add_option("--split-seed", cfg.csv.split_seed, "Seed of the train/validation/test split")->default_val(0);
        classify->add_flag("--standardize", cfg.csv.standardize, "Standardize features using training statistics");
        classify->add_option("--schemes", cfg.schemes, "Schemes, comma separated")->delimiter(',')
            ->default_val("IID,ORF,SimRF,SimRF+");
        classify->add_option("--m", cfg.m_grid, "Feature counts (default d)")->delimiter(',');
        classify->add_option("--map", cfg.map, "PRF or RFF")->default_val("PRF");
        classify->add_option("--trials", cfg.trials, "Trials per (scheme, m)")->default_val(500);
        classify->add_option("--sigma", cfg.sigma, "Kernel scale sigma")->default_val(1.0);
        classify->add_flag("--tune-sigma", cfg.tune_sigma, "Pick sigma by IID-PRF validation accuracy");
        classify->add_option("--sigma-grid", cfg.sigma_grid, "Sigma grid for tuning")->delimiter(',')
            ->default_val("0.05,0.1,0.2,0.3,0.5,0.7,1,1.5,2,3");
        classify->add_option("--tune-repeats", cfg.tune_repeats, "Ensembles averaged per sigma")->default_val(10);
        classify->footer(schema_text("dataset,scheme,m,trials,mean_accuracy,sem,fallbacks,sigma; "
                                     "sigma_tuning.csv: sigma,repeats,mean_accuracy,sem"));

    }
    {
        RunConfig& cfg = configs["optimize"];
        auto* optimize = app.add_subcommand("optimize", "Numerically minimise the conformity over directions");
        optimize->add_option("--d", cfg.d, "Dimension (norms drawn from chi_d)")->default_val(6);
        optimize->add_option("--norms", cfg.norms, "Explicit norms, comma separated")->delimiter(',');
        optimize->add_option("--v", cfg.v_grid, "v")->delimiter(',')->default_val("1");
        optimize->add_option("--restarts", cfg.optimizer.restarts, "Restarts")->default_val(4);
        optimize->add_option("--max-iters", cfg.optimizer.max_iters, "Iterations per restart")->default_val(2000);
        optimize->add_option("--gradient-tol", cfg.optimizer.gradient_tol, "Gradient tolerance")->default_val(1e-7);
        optimize->footer(schema_text("index,norm,u0..u{d-1}"));

    }
    {
        RunConfig& cfg = configs["pdf"];
        auto* pdf = app.add_subcommand("pdf", "Densities and CDFs of |w_i + w_j|");
        pdf->add_option("--d", cfg.d, "Dimension")->default_val(8);
        pdf->add_option("--w-max", cfg.w_max, "Upper end of the w grid (0 = automatic)")->default_val(0.0);
        pdf->add_option("--points", cfg.points, "Grid points")->default_val(200);
        pdf->footer(schema_text("w,pdf_iid,pdf_orthogonal,pdf_simplex,cdf_iid,cdf_orthogonal,cdf_simplex"));

    }
    {
        RunConfig& cfg = configs["selftest"];
        auto* selftest = app.add_subcommand("selftest", "Analytics versus simulation closure checks");
        selftest->add_flag("--quick", cfg.quick, "Fewer trials");
        selftest->add_option("--trials", cfg.trials, "Override the trial count")->default_val(0);
        selftest->footer(schema_text("check,observed,expected,tolerance,pass"));

    }
    {
        RunConfig& cfg = configs["make-data"];
        auto* make_data = app.add_subcommand("make-data", "Write a synthetic dataset as CSV");
        make_data->add_option("--kind", cfg.kind, "banknote or wifi")->required();
        make_data->add_option("--file", cfg.file, "Output path (default OUT/<name>.csv)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    RunConfig cfg = configs.at(name);
    cfg.subcommand = name;
    cfg.seed = base.seed;
    cfg.threads = base.threads;
    cfg.out_dir = base.out_dir;
    cfg.rel_tol = base.rel_tol;
    cfg.max_terms = base.max_terms;
    try {
        cfg.validate();
        if (cfg.subcommand == "conformity") return run_conformity(cfg);
        if (cfg.subcommand == "mse-curve") return run_mse_curve(cfg);
        if (cfg.subcommand == "gap") return run_gap(cfg);
        if (cfg.subcommand == "gram") return run_gram(cfg);
        if (cfg.subcommand == "classify") return run_classify(cfg);
        if (cfg.subcommand == "optimize") return run_optimize(cfg);
        if (cfg.subcommand == "pdf") return run_pdf(cfg);
        if (cfg.subcommand == "selftest") return run_selftest(cfg);
        if (cfg.subcommand == "make-data") return run_make_data(cfg);
    } catch (const ArgumentError& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return 1;
    } catch (const ComputationError& e) {
        std::cerr << "computation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
