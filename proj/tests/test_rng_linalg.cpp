#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "simrf/errors.hpp"
#include "simrf/linalg.hpp"
#include "simrf/rng.hpp"
#include "simrf/stats.hpp"

using namespace simrf;

namespace {

Vector random_vector(std::size_t n, std::uint64_t seed) {
    return sample_gaussian_matrix(n, 1, RngStream(seed, 99)).col(0);
}

}  // namespace

TEST_CASE("gaussian sampler is deterministic per stream") {
    const Matrix a = sample_gaussian_matrix(2, 2, RngStream(7));
    const Matrix b = sample_gaussian_matrix(2, 2, RngStream(7));
    CHECK(a == b);
    CHECK(a != sample_gaussian_matrix(2, 2, RngStream(7, 1)));
    CHECK(RngStream(7).substream(3) == RngStream(7).substream(3));
    CHECK(RngStream(7).substream(3) != RngStream(7).substream(4));
    CHECK_THROWS_AS(sample_gaussian_matrix(0, 3, RngStream(1)), ArgumentError);
}

TEST_CASE("gaussian moments") {
    const Matrix g = sample_gaussian_matrix(1000, 1000, RngStream(11));
    const std::vector<double> xs(g.data(), g.data() + g.size());
    const SampleStats s = summarize(xs);
    CHECK(std::abs(s.mean) < 4.0 / 1000.0);
    CHECK(std::abs(s.variance - 1.0) < 0.01);
}

TEST_CASE("chi sampler") {
    const auto xs = sample_chi(8, 1'000'000, RngStream(5));
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK_FALSE(xs[i] <= 0.0);
        sq[i] = xs[i] * xs[i];
    }
    const SampleStats s = summarize(sq);
    CHECK(std::abs(s.mean - 8.0) < 0.05);
    CHECK(std::abs(s.mean - 8.0) < 5.0 * s.sem);

    // d = 1 is the half-normal law.
    const auto half = sample_chi(1, 20'000, RngStream(6));
    const double ks = ks_statistic(half, [](double x) { return std::erf(x / std::sqrt(2.0)); });
    CHECK(ks_pvalue(ks, half.size()) > 0.01);
    CHECK_THROWS_AS(sample_chi(0, 3, RngStream(1)), ArgumentError);
}

TEST_CASE("haar orthogonal matrices") {
    int plus = 0;
    for (int i = 0; i < 10000; ++i) {
        const Matrix r = haar_orthogonal(1, RngStream(3, i));
        CHECK(std::abs(std::abs(r(0, 0)) - 1.0) < 1e-15);
        plus += r(0, 0) > 0 ? 1 : 0;
    }
    CHECK(std::abs(plus / 10000.0 - 0.5) < 0.01);

    for (std::size_t d : {2u, 64u, 1024u}) {
        const Matrix r = haar_orthogonal(d, RngStream(4));
        CHECK((r.transpose() * r - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    }

    Vector mean = Vector::Zero(4);
    for (int i = 0; i < 100000; ++i) mean += haar_orthogonal(4, RngStream(8, i)).row(0).transpose();
    mean /= 100000.0;
    CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("fwht") {
    Vector x(2);
    x << 1, 0;
    const Vector h = fwht(x);
    CHECK(std::abs(h[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(h[1] - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(x[0] == 1.0);
    CHECK_THROWS_AS(fwht(Vector::Ones(6)), ArgumentError);

    for (std::size_t d : {2u, 4u, 8u, 64u, 256u}) {
        const Matrix dense = dense_hadamard(d);
        for (int t = 0; t < 100; ++t) {
            const Vector v = random_vector(d, 1000 * d + t);
            CHECK((fwht(v) - dense * v).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((fwht(fwht(v)) - v).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("dense hadamard follows the Sylvester recursion") {
    Matrix h(1, 1);
    h << 1.0;
    for (std::size_t d = 2; d <= 16; d *= 2) {
        Matrix next(d, d);
        next << h, h, h, -h;
        h = next / std::sqrt(2.0);
        CHECK((dense_hadamard(d) - h).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("hd products") {
    const std::size_t d = 8;
    const Vector x = random_vector(d, 17);
    const HdProduct ones(d, {std::vector<int>(d, 1)});
    CHECK((hd_apply(x, ones) - fwht(x)).cwiseAbs().maxCoeff() < 1e-15);

    const HdProduct hd = HdProduct::sample(d, 3, RngStream(21));
    Matrix dense = Matrix::Identity(d, d);
    for (const auto& diag : hd.diagonals()) {
        Vector dv(d);
        for (std::size_t i = 0; i < d; ++i) dv[i] = diag[i];
        dense = dense * dense_hadamard(d) * dv.asDiagonal();
    }
    CHECK((hd_apply(x, hd) - dense * x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((hd.dense() - dense).cwiseAbs().maxCoeff() < 1e-12);

    const HdProduct big = HdProduct::sample(64, 3, RngStream(22));
    const Vector y = random_vector(64, 23);
    CHECK(std::abs(hd_apply(y, big).norm() - y.norm()) < 1e-10 * y.norm());

    for (std::size_t n : {2u, 8u, 64u, 256u}) {
        const HdProduct p = HdProduct::sample(n, 3, RngStream(24, n));
        const Matrix pd = p.dense();
        for (int t = 0; t < 100; ++t) {
            const Vector v = random_vector(n, 7000 + 100 * n + t);
            CHECK((hd_apply(v, p) - pd * v).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    CHECK_THROWS_AS(hd_apply(Vector::Ones(4), big), ArgumentError);
    CHECK_THROWS_AS(HdProduct(4, {{1, -1, 2, 1}}), ArgumentError);
    CHECK_THROWS_AS(HdProduct(6, {{1, 1, 1, 1, 1, 1}}), ArgumentError);
}

TEST_CASE("simplex matrix geometry") {
    const Matrix s2 = simplex_matrix(2);
    CHECK(std::abs(s2(0, 0) + 1.0) < 1e-15);
    CHECK(std::abs(s2(1, 0) - 1.0) < 1e-15);
    CHECK(s2(0, 1) == 0.0);
    CHECK(s2(1, 1) == 0.0);
    for (std::size_t d : {2u, 3u, 7u, 64u}) {
        const Matrix s = simplex_matrix(d);
        for (std::size_t i = 0; i < d; ++i) {
            CHECK(std::abs(s.row(i).norm() - 1.0) < 1e-12);
            CHECK(s(i, d - 1) == 0.0);
            for (std::size_t j = i + 1; j < d; ++j) {
                CHECK(std::abs(s.row(i).dot(s.row(j)) + 1.0 / (d - 1.0)) < 1e-12);
            }
        }
        CHECK(s.colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK_THROWS_AS(simplex_matrix(1), ArgumentError);
}

TEST_CASE("fast simplex product") {
    CHECK(simplex_apply(Vector::Unit(5, 4)).cwiseAbs().maxCoeff() == 0.0);
    Vector x(3);
    x << 1, 1, 0;
    CHECK((simplex_apply(x) - simplex_matrix(3) * x).cwiseAbs().maxCoeff() < 1e-12);
    for (std::size_t d : {2u, 8u, 64u, 256u, 257u}) {
        const Matrix s = simplex_matrix(d);
        for (int t = 0; t < 100; ++t) {
            const Vector v = random_vector(d, 50000 + 100 * d + t);
            CHECK((simplex_apply(v) - s * v).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    CHECK_THROWS_AS(simplex_apply(Vector::Ones(1)), ArgumentError);
}
