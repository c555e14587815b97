#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "simrf/errors.hpp"
#include "simrf/experiments.hpp"
#include "simrf/report.hpp"

using namespace simrf;

namespace {

// Nadaraya-Watson prediction written out term by term.
Matrix naive_regression(const Matrix& train_x, const Matrix& onehot, const Matrix& queries, double sigma) {
    Matrix out(queries.rows(), onehot.cols());
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        Eigen::RowVectorXd score = Eigen::RowVectorXd::Zero(onehot.cols());
        double total = 0.0;
        for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
            const double k = std::exp(-0.5 * sigma * sigma * (train_x.row(i) - queries.row(q)).squaredNorm());
            score += k * onehot.row(i);
            total += k;
        }
        out.row(q) = score / total;
    }
    return out;
}

Dataset toy_dataset() {
    std::istringstream in("# toy\n0.0,0.0,a\n1.0,0.5,b\n\n0.2,0.1,a\n1.1,0.9,b\n");
    CsvOptions opts;
    opts.train_fraction = 0.5;
    opts.validation_fraction = 0.25;
    return parse_dataset(in, "toy", opts);
}

}  // namespace

TEST_CASE("MSE ratio curve: limits, flag and ordering") {
    const auto rows = mse_ratio_curve(64, {0.0, 0.001, 0.5, 1.0, 2.0}, 64);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].limit);
    CHECK(rows[0].orf_ratio == 1.0);
    CHECK(rows[0].simrf_ratio == doctest::Approx(0.0077817464144574883).epsilon(1e-9));
    CHECK(std::round(rows[0].simrf_ratio * 1e4) / 1e4 == doctest::Approx(0.0078));
    CHECK_FALSE(rows[1].limit);
    CHECK(rows[1].simrf_ratio == doctest::Approx(rows[0].simrf_ratio).epsilon(1e-4));
    CHECK(rows[1].orf_ratio == doctest::Approx(1.0).epsilon(1e-5));
    for (std::size_t i = 2; i < rows.size(); ++i) {
        CHECK(rows[i].simrf_ratio < rows[i].orf_ratio);
        CHECK(rows[i].orf_ratio < 1.0);
    }
    CHECK_THROWS_AS(mse_ratio_curve(8, {1.0}, 9), ArgumentError);
    CHECK_THROWS_AS(mse_ratio_curve(8, {-1.0}, 8), ArgumentError);
}

TEST_CASE("IID PRF MSE closed form against direct variance") {
    // Each feature product exp(w.(x+y) - |x|^2 - |y|^2) has second moment exp(2v^2 - 2|x|^2 - 2|y|^2).
    const double xn = 0.4, yn = 0.7, v = 0.9;
    const double k = std::exp(0.5 * v * v - xn * xn - yn * yn);
    const double direct = (std::exp(2 * v * v - 2 * xn * xn - 2 * yn * yn) - k * k) / 5.0;
    CHECK(mse_prf(conformity_iid(v, 8), xn, yn, v, 5) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("Monte Carlo MSE agrees with the analytic value at small scale") {
    const std::size_t d = 4;
    const KernelPair pair(Vector::Unit(d, 0) * 0.5, Vector::Unit(d, 1) * 0.5);
    const double v = pair.v();
    const std::vector<CouplingScheme> schemes{CouplingScheme::iid(), CouplingScheme::orf(), CouplingScheme::simrf()};
    const auto est = monte_carlo_mse_paired({pair}, schemes, FeatureMapKind::PRF, d, 20'000, RngStream(5), 2);
    const double rho[3] = {conformity_iid(v, d), conformity_orf(v, d), conformity_simrf(v, d)};
    for (std::size_t s = 0; s < 3; ++s) {
        const double analytic = mse_prf(rho[s], 0.5, 0.5, v, d);
        CHECK(std::abs(est[s].squared_error.mean - analytic) < 4.0 * est[s].squared_error.sem);
        CHECK(std::abs(est[s].estimate.mean - est[s].exact) < 4.0 * est[s].estimate.sem);
        CHECK(est[s].squared_errors.size() == 20'000);
    }
    CHECK(est[0].exact == doctest::Approx(std::exp(-0.25)));
}

TEST_CASE("two trials give a finite standard error, one trial is rejected") {
    const KernelPair pair(Vector::Unit(3, 0), Vector::Unit(3, 2));
    const auto est = monte_carlo_mse(pair, CouplingScheme::iid(), FeatureMapKind::RFF, 3, 2, RngStream(1));
    CHECK(std::isfinite(est.squared_error.sem));
    CHECK(est.squared_error.count == 2);
    CHECK_THROWS_AS(monte_carlo_mse(pair, CouplingScheme::iid(), FeatureMapKind::RFF, 3, 1, RngStream(1)),
                    ArgumentError);
    CHECK_THROWS_AS(monte_carlo_mse(pair, CouplingScheme::simrf(), FeatureMapKind::RFF, 3, 2, RngStream(1)),
                    UnsupportedCombination);
}

TEST_CASE("MC results do not depend on the thread count") {
    const KernelPair pair(Vector::Unit(6, 0) * 0.3, Vector::Unit(6, 3) * 0.6);
    const auto a = monte_carlo_mse(pair, CouplingScheme::simrf(), FeatureMapKind::PRF, 6, 300, RngStream(9), 1);
    const auto b = monte_carlo_mse(pair, CouplingScheme::simrf(), FeatureMapKind::PRF, 6, 300, RngStream(9), 3);
    CHECK(a.squared_errors == b.squared_errors);
}

TEST_CASE("Gram error: exact Gram matrix and determinism") {
    const Matrix pts = gaussian_points(10, 5, 0.3, RngStream(2));
    const Matrix g = exact_gram(pts);
    for (int i = 0; i < 10; ++i) {
        CHECK(g(i, i) == doctest::Approx(1.0));
        for (int j = 0; j < 10; ++j) {
            CHECK(g(i, j) == doctest::Approx(std::exp(-0.5 * (pts.row(i) - pts.row(j)).squaredNorm())));
        }
    }
    const auto a = gram_frobenius(pts, CouplingScheme::orf(), 5, 40, RngStream(3), 1);
    const auto b = gram_frobenius(pts, CouplingScheme::orf(), 5, 40, RngStream(3), 2);
    CHECK(a.error.mean == b.error.mean);
    CHECK(a.error.sem > 0.0);
    CHECK(a.scheme == "ORF");
    const auto more = gram_frobenius(pts, CouplingScheme::orf(), 50, 40, RngStream(3), 1);
    CHECK(more.error.mean < a.error.mean);
}

TEST_CASE("kernel regression: exact mode matches the direct sum") {
    const Matrix x = gaussian_points(30, 3, 1.0, RngStream(4));
    Matrix onehot = Matrix::Zero(30, 3);
    for (int i = 0; i < 30; ++i) onehot(i, i % 3) = 1.0;
    const Matrix q = gaussian_points(7, 3, 1.0, RngStream(5));
    const auto pred = kernel_regression_predict(x, onehot, q, 0.8, RegressionMode::exact_kernel());
    CHECK((pred.distribution - naive_regression(x, onehot, q, 0.8)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(pred.fallback_count() == 0);
    const Vector single = kernel_regression_predict(x, onehot, Vector(q.row(2).transpose()), 0.8, RegressionMode::exact_kernel());
    CHECK((single.transpose() - pred.distribution.row(2)).cwiseAbs().maxCoeff() < 1e-15);
    // Far queries would underflow a direct evaluation; the log-domain form stays finite.
    const Matrix far = Matrix::Constant(1, 3, 60.0);
    const auto p = kernel_regression_predict(x, onehot, far, 1.0, RegressionMode::exact_kernel());
    CHECK(p.distribution.allFinite());
    CHECK(p.distribution.row(0).sum() == doctest::Approx(1.0));
}

TEST_CASE("kernel regression: a single training point predicts its own label") {
    Matrix x(1, 4);
    x << 0.1, -0.2, 0.3, 0.0;
    Matrix onehot = Matrix::Zero(1, 3);
    onehot(0, 2) = 1.0;
    const Matrix q = gaussian_points(5, 4, 1.0, RngStream(6));
    for (const auto& mode : {RegressionMode::exact_kernel(),
                             RegressionMode::features(CouplingScheme::simrf(), FeatureMapKind::PRF, 4, RngStream(1)),
                             RegressionMode::features(CouplingScheme::iid(), FeatureMapKind::PRF, 8, RngStream(2))}) {
        const auto pred = kernel_regression_predict(x, onehot, q, 1.0, mode);
        for (int i = 0; i < 5; ++i) {
            CHECK(pred.classes[i] == 2);
            CHECK(pred.distribution(i, 2) == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("kernel regression: agreement with the exact kernel grows with m") {
    const Matrix x = gaussian_points(40, 4, 1.0, RngStream(7));
    Matrix onehot = Matrix::Zero(40, 2);
    for (int i = 0; i < 40; ++i) onehot(i, x(i, 0) > 0 ? 1 : 0) = 1.0;
    const Matrix q = gaussian_points(20, 4, 1.0, RngStream(8));
    const Matrix exact = kernel_regression_predict(x, onehot, q, 0.7, RegressionMode::exact_kernel()).distribution;
    auto gap = [&](std::size_t m, FeatureMapKind map) {
        double total = 0.0;
        for (std::uint64_t s = 0; s < 30; ++s) {
            const auto mode = RegressionMode::features(CouplingScheme::iid(), map, m, RngStream(100, s));
            total += (kernel_regression_predict(x, onehot, q, 0.7, mode).distribution - exact).cwiseAbs().mean();
        }
        return total / 30.0;
    };
    CHECK(gap(256, FeatureMapKind::PRF) < gap(4, FeatureMapKind::PRF));
    CHECK(gap(256, FeatureMapKind::RFF) < gap(4, FeatureMapKind::RFF));
}

TEST_CASE("kernel regression: RFF rows are valid distributions") {
    const Matrix x = gaussian_points(15, 2, 2.0, RngStream(9));
    Matrix onehot = Matrix::Zero(15, 3);
    for (int i = 0; i < 15; ++i) onehot(i, i % 3) = 1.0;
    const Matrix q = gaussian_points(50, 2, 2.0, RngStream(10));
    const auto pred = kernel_regression_predict(
        x, onehot, q, 1.5, RegressionMode::features(CouplingScheme::orf(), FeatureMapKind::RFF, 2, RngStream(3)));
    for (int i = 0; i < 50; ++i) {
        CHECK(pred.distribution.row(i).minCoeff() >= 0.0);
        CHECK(pred.distribution.row(i).sum() == doctest::Approx(1.0));
        if (pred.fallback[i]) CHECK(pred.distribution(i, 0) == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("accuracy") {
    CHECK(accuracy({0, 1, 1, 2}, {0, 1, 2, 2}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(accuracy({0}, {0, 1}), ArgumentError);
}

TEST_CASE("sigma tuning") {
    Dataset data = make_banknote_like(RngStream(11));
    split_dataset(data, 0.6, 0.2, 11);
    standardize_features(data);
    const auto one = tune_sigma(data, {0.7}, 4, 2, RngStream(1), CouplingScheme::iid(), 1);
    CHECK(one.best_sigma == 0.7);
    REQUIRE(one.table.size() == 1);
    CHECK(one.table[0].accuracy.count == 2);
    const auto a = tune_sigma(data, {1.0, 0.3, 0.3}, 4, 3, RngStream(2), CouplingScheme::iid(), 1);
    const auto b = tune_sigma(data, {0.3, 1.0}, 4, 3, RngStream(2), CouplingScheme::iid(), 2);
    REQUIRE(a.table.size() == 2);
    CHECK(a.table[0].sigma == 0.3);
    CHECK(a.best_sigma == b.best_sigma);
    CHECK(a.table[1].accuracy.mean == b.table[1].accuracy.mean);
    CHECK_THROWS_AS(tune_sigma(data, {}, 4, 3, RngStream(2)), ArgumentError);
}

TEST_CASE("classification experiment layout and determinism") {
    Dataset data = make_banknote_like(RngStream(12));
    split_dataset(data, 0.6, 0.2, 12);
    standardize_features(data);
    const std::vector<CouplingScheme> schemes{CouplingScheme::iid(), CouplingScheme::simrf_plus()};
    const auto a = classification_experiment(data, schemes, {2, 4}, 4, 1.0, RngStream(3), FeatureMapKind::PRF, 1);
    const auto b = classification_experiment(data, schemes, {2, 4}, 4, 1.0, RngStream(3), FeatureMapKind::PRF, 2);
    REQUIRE(a.rows.size() == 4);
    CHECK(a.rows[0].m == 2);
    CHECK(a.rows[1].scheme == "SimRF+");
    CHECK(a.rows[3].m == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.rows[i].accuracy.mean == b.rows[i].accuracy.mean);
        CHECK(a.rows[i].accuracy.mean >= 0.0);
        CHECK(a.rows[i].accuracy.mean <= 1.0);
    }
    CHECK(a.exact_accuracy > 0.8);
}

TEST_CASE("dataset parsing") {
    const Dataset toy = toy_dataset();
    CHECK(toy.size() == 4);
    CHECK(toy.dim() == 2);
    CHECK(toy.class_names == std::vector<std::string>{"a", "b"});
    CHECK(toy.labels == std::vector<int>{0, 1, 0, 1});
    CHECK(toy.train.size() == 2);
    CHECK(toy.validation.size() == 1);
    CHECK(toy.test.size() == 1);
    CHECK(toy_dataset().train == toy.train);

    std::istringstream first_label("x,1.0,2.0\ny,3.0,4.0\n");
    CsvOptions opts;
    opts.label_column = 0;
    const Dataset lf = parse_dataset(first_label, "lf", opts);
    CHECK(lf.features(1, 0) == 3.0);

    std::istringstream with_header("f1;f2;cls\n1;2;p\n3;4;q\n5;6;p\n");
    CsvOptions semi;
    semi.delimiter = ';';
    semi.header = true;
    CHECK(parse_dataset(with_header, "semi", semi).size() == 3);

    std::istringstream bad_label("1,2,a\n3,4,b\n");
    CsvOptions out_of_range;
    out_of_range.label_column = 5;
    CHECK_THROWS_AS(parse_dataset(bad_label, "r", out_of_range), ArgumentError);

    std::istringstream bad_value("1,2,a\n3,oops,b\n");
    try {
        parse_dataset(bad_value, "bad", CsvOptions{});
        FAIL("expected an error");
    } catch (const ArgumentError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("oops") != std::string::npos);
        CHECK(msg.find("column 1") != std::string::npos);
    }

    std::istringstream ragged("1,2,a\n3,b\n");
    CHECK_THROWS_AS(parse_dataset(ragged, "ragged", CsvOptions{}), ArgumentError);
    CHECK_THROWS_AS(load_dataset("/nonexistent/data.csv", CsvOptions{}), ArgumentError);
}

TEST_CASE("splits are seeded permutations") {
    Dataset a = make_wifi_like(RngStream(13));
    Dataset b = a;
    split_dataset(a, 0.6, 0.2, 5);
    split_dataset(b, 0.6, 0.2, 5);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.train.size() == 1200);
    CHECK(a.validation.size() == 400);
    CHECK(a.test.size() == 400);
    std::vector<char> seen(a.size(), 0);
    for (const auto* part : {&a.train, &a.validation, &a.test}) {
        for (auto i : *part) ++seen[i];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](char c) { return c == 1; }));
    split_dataset(b, 0.6, 0.2, 6);
    CHECK(a.train != b.train);
    CHECK_THROWS_AS(split_dataset(b, 0.9, 0.2, 1), ArgumentError);
}

TEST_CASE("standardization uses training statistics") {
    Dataset data = make_wifi_like(RngStream(14));
    split_dataset(data, 0.6, 0.2, 1);
    standardize_features(data);
    const Matrix train = data.rows(data.train);
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        const double mean = train.col(c).mean();
        CHECK(std::abs(mean) < 1e-12);
        const double var = (train.col(c).array() - mean).square().sum() / static_cast<double>(train.rows() - 1);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("synthetic datasets have the expected shape") {
    const Dataset bank = make_banknote_like(RngStream(15));
    CHECK(bank.size() == 1372);
    CHECK(bank.dim() == 4);
    CHECK(bank.num_classes() == 2);
    const Dataset wifi = make_wifi_like(RngStream(15));
    CHECK(wifi.size() == 2000);
    CHECK(wifi.dim() == 7);
    CHECK(wifi.num_classes() == 4);
    CHECK(wifi.features.maxCoeff() < 0.0);
    CHECK(make_wifi_like(RngStream(15)).features == wifi.features);
}

TEST_CASE("zero padding and CSV round trip") {
    Dataset wifi = make_wifi_like(RngStream(16));
    split_dataset(wifi, 0.6, 0.2, 3);
    const Dataset padded = zero_pad(wifi, 8);
    CHECK(padded.dim() == 8);
    CHECK(padded.features.col(7).cwiseAbs().maxCoeff() == 0.0);
    CHECK(padded.features.leftCols(7) == wifi.features);
    CHECK(padded.train == wifi.train);
    CHECK_THROWS_AS(zero_pad(wifi, 6), ArgumentError);

    const auto path = std::filesystem::temp_directory_path() / "simrf_test_wifi.csv";
    write_dataset_csv(wifi, path);
    CsvOptions opts;
    opts.split_seed = 3;
    const Dataset back = load_dataset(path, opts);
    CHECK(back.features == wifi.features);
    CHECK(back.labels == wifi.labels);
    CHECK(back.train == wifi.train);
    std::filesystem::remove(path);
}

TEST_CASE("report formats") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CsvTable table({"a", "b"});
    table.add_row({"1", "x"});
    CHECK(table.body() == "a,b\n1,x\n");
    CHECK_THROWS_AS(table.add_row({"only one"}), ArgumentError);

    const auto dir = std::filesystem::temp_directory_path() / "simrf_report_test";
    std::filesystem::remove_all(dir);
    Json config = {{"seed", 7}, {"d", 4}};
    write_csv(dir / "t.csv", config, table);
    std::ifstream in(dir / "t.csv");
    std::string line;
    std::getline(in, line);
    REQUIRE(line.rfind("# ", 0) == 0);
    const Json header = Json::parse(line.substr(2));
    CHECK(header.begin().key() == "config");
    CHECK(header["config"]["seed"] == 7);
    CHECK(header["version"] == kVersion);
    std::getline(in, line);
    CHECK(line == "a,b");

    ExperimentReport report;
    report.kind = "unit";
    report.config = config;
    report.statistics.push_back(stats_json(summarize({1.0, 2.0, 3.0})));
    const Json j = report.to_json();
    CHECK(j.begin().key() == "config");
    CHECK(j["statistics"][0]["mean"] == 2.0);
    CHECK(j["statistics"][0]["trials"] == 3);
    report.write(dir / "r.json");
    std::ifstream rin(dir / "r.json");
    CHECK(Json::parse(rin) == j);
    std::filesystem::remove_all(dir);
}
