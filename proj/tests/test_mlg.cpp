#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "socmap/mlg.hpp"
#include "socmap/rng.hpp"

using namespace socmap;
using testutil::digamma;
using testutil::trigamma;

namespace {

MLGParams scalar_mlg(double mu, double v, double alpha, double kappa) {
    MLGParams p;
    p.mu = VectorXd::Constant(1, mu);
    p.V = MatrixXd::Constant(1, 1, v);
    p.alpha = VectorXd::Constant(1, alpha);
    p.kappa = VectorXd::Constant(1, kappa);
    return p;
}

std::vector<double> draw_scalar(const MLGParams& p, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& x : out) x = sample_mlg(p, rng)[0];
    return out;
}

}  // namespace

TEST_CASE("scalar standard draw has the log-gamma mean") {
    const auto xs = draw_scalar(scalar_mlg(0.0, 1.0, 1.0, 1.0), 100000, 7);
    const auto m = testutil::moments(xs);
    CHECK(std::abs(m.mean - digamma(1.0)) < 3.0 * m.se_mean());
    CHECK(std::abs(m.var - trigamma(1.0)) < 0.05);
}

TEST_CASE("mu is an exact location shift") {
    MLGParams p0;
    p0.mu = VectorXd::Zero(2);
    p0.V.resize(2, 2);
    p0.V << 1.0, 0.5, 0.25, 2.0;
    p0.alpha = (VectorXd(2) << 1.0, 2.0).finished();
    p0.kappa = (VectorXd(2) << 1.0, 0.5).finished();
    MLGParams p1 = p0;
    p1.mu = (VectorXd(2) << 0.75, -1.25).finished();

    Rng r0(11), r1(11);
    for (int i = 0; i < 50; ++i) {
        const VectorXd base = sample_mlg(p0, r0);
        const VectorXd shifted = sample_mlg(p1, r1);
        CHECK(shifted[0] == base[0] + p1.mu[0]);
        CHECK(shifted[1] == base[1] + p1.mu[1]);
    }
}

TEST_CASE("large shape approaches the standard normal") {
    const double a = 1000.0;
    const auto xs = draw_scalar(scalar_mlg(0.0, std::sqrt(a), a, a), 100000, 3);
    const double d = testutil::ks_statistic(xs, testutil::normal_cdf);
    CHECK(d < 0.01);
}

TEST_CASE("normal approximation improves monotonically in the shape") {
    std::vector<double> ks;
    for (double a : {1.0, 10.0, 100.0, 1000.0}) {
        auto xs = draw_scalar(scalar_mlg(0.0, std::sqrt(a), a, a), 100000, 5);
        const double mean = std::sqrt(a) * (digamma(a) - std::log(a));
        const double sd = std::sqrt(a * trigamma(a));
        for (auto& x : xs) x = (x - mean) / sd;
        ks.push_back(testutil::ks_statistic(xs, testutil::normal_cdf));
    }
    for (std::size_t i = 1; i < ks.size(); ++i) CHECK(ks[i] < ks[i - 1]);
}

TEST_CASE("log density at the standard origin") {
    const auto p = scalar_mlg(0.0, 1.0, 1.0, 1.0);
    CHECK(mlg_log_density(VectorXd::Zero(1), p) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("scalar density integrates to one") {
    const auto p1 = scalar_mlg(0.0, 1.0, 1.0, 1.0);
    const double i1 = testutil::simpson(
        [&](double y) { return std::exp(mlg_log_density(VectorXd::Constant(1, y), p1)); },
        -20.0, 5.0, 20000);
    CHECK(i1 == doctest::Approx(1.0).epsilon(1e-6));

    const auto p2 = scalar_mlg(0.3, 0.8, 2.0, 1.5);
    const double i2 = testutil::simpson(
        [&](double y) { return std::exp(mlg_log_density(VectorXd::Constant(1, y), p2)); },
        -15.0, 6.0, 20000);
    CHECK(i2 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("density is a location family") {
    MLGParams p;
    p.mu = (VectorXd(2) << 0.25, 0.5).finished();
    p.V.resize(2, 2);
    p.V << 1.0, 0.5, 0.25, 2.0;
    p.alpha = (VectorXd(2) << 1.0, 2.0).finished();
    p.kappa = (VectorXd(2) << 1.0, 0.5).finished();
    const VectorXd y = (VectorXd(2) << 0.75, -1.5).finished();

    const double c = 0.5;
    MLGParams shifted = p;
    shifted.mu.array() -= c;
    CHECK(mlg_log_density(y, p) ==
          mlg_log_density(VectorXd(y.array() - c), shifted));
}

TEST_CASE("sample moments match the digamma/trigamma formulas") {
    MLGParams p;
    p.mu = (VectorXd(3) << 0.5, -1.0, 2.0).finished();
    p.V.resize(3, 3);
    p.V << 1.0, 0.3, 0.0, -0.2, 1.5, 0.4, 0.1, 0.0, 0.8;
    p.alpha = (VectorXd(3) << 1.0, 3.0, 0.7).finished();
    p.kappa = (VectorXd(3) << 1.0, 2.0, 0.5).finished();

    const VectorXd mean_true =
        p.mu + p.V * (p.alpha.unaryExpr([](double a) { return digamma(a); }) -
                      p.kappa.array().log().matrix());
    const MatrixXd cov_true =
        p.V *
        p.alpha.unaryExpr([](double a) { return trigamma(a); }).asDiagonal() *
        p.V.transpose();

    // 100 batches of 2000 draws give an empirical Monte Carlo SE for every
    // moment entry, which stays honest for the skewed small-shape case.
    const int n_batch = 100, batch = 2000;
    Rng rng(13);
    std::vector<VectorXd> batch_mean;
    std::vector<MatrixXd> batch_cov;
    for (int bi = 0; bi < n_batch; ++bi) {
        MatrixXd draws(batch, 3);
        for (int i = 0; i < batch; ++i) draws.row(i) = sample_mlg(p, rng).transpose();
        const VectorXd m = draws.colwise().mean();
        const MatrixXd centered = draws.rowwise() - m.transpose();
        batch_mean.push_back(m);
        batch_cov.push_back(centered.transpose() * centered / (batch - 1.0));
    }
    VectorXd mean_hat = VectorXd::Zero(3);
    MatrixXd cov_hat = MatrixXd::Zero(3, 3);
    for (int bi = 0; bi < n_batch; ++bi) {
        mean_hat += batch_mean[bi];
        cov_hat += batch_cov[bi];
    }
    mean_hat /= n_batch;
    cov_hat /= n_batch;
    VectorXd mean_se = VectorXd::Zero(3);
    MatrixXd cov_se = MatrixXd::Zero(3, 3);
    for (int bi = 0; bi < n_batch; ++bi) {
        mean_se += (batch_mean[bi] - mean_hat).cwiseAbs2();
        cov_se += (batch_cov[bi] - cov_hat).cwiseAbs2();
    }
    mean_se = (mean_se / (n_batch - 1.0) / n_batch).cwiseSqrt();
    cov_se = (cov_se / (n_batch - 1.0) / n_batch).cwiseSqrt();

    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(mean_hat[i] - mean_true[i]) < 4.0 * mean_se(i));
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(cov_hat(i, j) - cov_true(i, j)) < 4.0 * cov_se(i, j));
    }
}

TEST_CASE("sampler histogram matches the density") {
    const auto p = scalar_mlg(0.3, 0.8, 2.0, 1.5);
    const double lo = -3.2, hi = 2.8;
    const int n_bins = 50, n_draws = 1000000;

    std::vector<double> expected(n_bins);
    const double width = (hi - lo) / n_bins;
    for (int bi = 0; bi < n_bins; ++bi)
        expected[bi] = testutil::simpson(
            [&](double y) { return std::exp(mlg_log_density(VectorXd::Constant(1, y), p)); },
            lo + bi * width, lo + (bi + 1) * width, 64);

    std::vector<long> counts(n_bins, 0);
    Rng rng(17);
    for (int i = 0; i < n_draws; ++i) {
        const double y = sample_mlg(p, rng)[0];
        if (y < lo || y >= hi) continue;
        ++counts[static_cast<std::size_t>((y - lo) / width)];
    }
    for (int bi = 0; bi < n_bins; ++bi) {
        const double pe = expected[bi];
        const double se = std::sqrt(n_draws * pe * (1.0 - pe));
        CHECK(std::abs(counts[bi] - n_draws * pe) <= 3.0 * se + 1.0);
    }
}

TEST_CASE("mlg sampling is reproducible") {
    MLGParams p;
    p.mu = (VectorXd(2) << 1.0, -1.0).finished();
    p.V.resize(2, 2);
    p.V << 2.0, 0.0, 0.3, 1.0;
    p.alpha = (VectorXd(2) << 0.5, 4.0).finished();
    p.kappa = (VectorXd(2) << 2.0, 1.0).finished();
    Rng r1(99), r2(99);
    for (int i = 0; i < 20; ++i) {
        const VectorXd a = sample_mlg(p, r1), b = sample_mlg(p, r2);
        CHECK(a == b);
    }
}

TEST_CASE("mlg parameter validation") {
    auto p = scalar_mlg(0.0, 1.0, 1.0, 1.0);
    SUBCASE("dimension mismatch") {
        p.alpha = VectorXd::Ones(2);
        Rng rng(1);
        CHECK_THROWS_AS(sample_mlg(p, rng), parameter_error);
        CHECK_THROWS_AS(mlg_log_density(VectorXd::Zero(1), p), parameter_error);
    }
    SUBCASE("non-positive shape or rate") {
        p.alpha[0] = 0.0;
        Rng rng(1);
        CHECK_THROWS_AS(sample_mlg(p, rng), parameter_error);
        p.alpha[0] = 1.0;
        p.kappa[0] = -2.0;
        CHECK_THROWS_AS(sample_mlg(p, rng), parameter_error);
    }
    SUBCASE("singular V") {
        MLGParams q;
        q.mu = VectorXd::Zero(2);
        q.V = MatrixXd::Ones(2, 2);
        q.alpha = VectorXd::Ones(2);
        q.kappa = VectorXd::Ones(2);
        Rng rng(1);
        CHECK_THROWS_AS(sample_mlg(q, rng), parameter_error);
    }
    SUBCASE("wrong y length") {
        CHECK_THROWS_AS(mlg_log_density(VectorXd::Zero(2), p), parameter_error);
    }
}

TEST_CASE("identity-H conditional draw reduces to the unconditional sampler") {
    CMLGParams c;
    c.H = MatrixXd::Identity(3, 3);
    c.alpha = (VectorXd(3) << 1.0, 2.0, 0.5).finished();
    c.kappa = (VectorXd(3) << 1.0, 0.5, 2.0).finished();
    MLGParams m;
    m.mu = VectorXd::Zero(3);
    m.V = MatrixXd::Identity(3, 3);
    m.alpha = c.alpha;
    m.kappa = c.kappa;

    Rng r1(23), r2(23);
    for (int i = 0; i < 20; ++i) {
        const VectorXd qc = sample_cmlg(c, r1);
        const VectorXd qm = sample_mlg(m, r2);
        CHECK((qc - qm).lpNorm<Eigen::Infinity>() < 1e-14);
    }
}

TEST_CASE("rank-one projection averages the stacked draws") {
    CMLGParams c;
    c.H = MatrixXd::Ones(2, 1);
    c.alpha = VectorXd::Ones(2);
    c.kappa = VectorXd::Ones(2);
    Rng rng(29);
    const int N = 100000;
    std::vector<double> xs(N);
    for (auto& x : xs) x = sample_cmlg(c, rng)[0];
    const auto m = testutil::moments(xs);
    CHECK(std::abs(m.mean - digamma(1.0)) < 3.0 * m.se_mean());
    CHECK(m.var == doctest::Approx(trigamma(1.0) / 2.0).epsilon(0.05));
}

TEST_CASE("scaling H rescales the draw exactly") {
    CMLGParams c;
    c.H.resize(3, 2);
    c.H << 1.0, 0.5, 0.25, 2.0, -0.5, 1.0;
    c.alpha = (VectorXd(3) << 1.0, 2.0, 3.0).finished();
    c.kappa = (VectorXd(3) << 1.0, 0.5, 2.0).finished();

    for (double scale : {2.0, 3.0}) {
        CMLGParams cs = c;
        cs.H *= scale;
        Rng r1(31), r2(31);
        for (int i = 0; i < 20; ++i) {
            const VectorXd q = sample_cmlg(c, r1);
            const VectorXd qs = sample_cmlg(cs, r2);
            CHECK((qs * scale - q).lpNorm<Eigen::Infinity>() < 1e-12);
        }
    }
}

TEST_CASE("cmlg unnormalized log density hand value") {
    CMLGParams c;
    c.H = MatrixXd::Ones(2, 1);
    c.alpha = (VectorXd(2) << 1.0, 2.0).finished();
    c.kappa = (VectorXd(2) << 1.0, 0.5).finished();
    const double expected = 1.5 - 1.5 * std::exp(0.5);
    CHECK(cmlg_log_unnormalized(VectorXd::Constant(1, 0.5), c) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("cmlg validation") {
    CMLGParams c;
    c.H = MatrixXd::Ones(1, 2);  // r > n
    c.alpha = VectorXd::Ones(1);
    c.kappa = VectorXd::Ones(1);
    Rng rng(1);
    CHECK_THROWS_AS(sample_cmlg(c, rng), parameter_error);

    c.H = MatrixXd::Ones(2, 2);  // rank deficient
    c.alpha = VectorXd::Ones(2);
    c.kappa = VectorXd::Ones(2);
    CHECK_THROWS_AS(sample_cmlg(c, rng), parameter_error);
    CHECK_THROWS_AS(c.validate(), parameter_error);
}

TEST_CASE("inverse gamma sampler") {
    InverseGammaParams ig{3.0, 2.0};
    Rng rng(37);
    const int N = 100000;
    std::vector<double> xs(N);
    for (auto& x : xs) {
        x = sample_inverse_gamma(ig, rng);
        REQUIRE(x > 0.0);
    }
    const auto m = testutil::moments(xs);
    // mean = scale/(shape-1) = 1, var = 1
    CHECK(std::abs(m.mean - 1.0) < 3.0 * m.se_mean());

    Rng r1(41), r2(41);
    for (int i = 0; i < 20; ++i)
        CHECK(sample_inverse_gamma(ig, r1) == sample_inverse_gamma(ig, r2));

    CHECK_THROWS_AS(sample_inverse_gamma({0.0, 1.0}, rng), parameter_error);
    CHECK_THROWS_AS(sample_inverse_gamma({1.0, -1.0}, rng), parameter_error);
}

TEST_CASE("truncated scalar draws are positive") {
    CMLGParams c;
    c.H.resize(3, 1);
    c.H << 0.02, -0.01, 1.0;
    c.alpha = (VectorXd(3) << 1000.0, 1000.0, 1000.0).finished();
    c.kappa = (VectorXd(3) << 1000.0, 1000.0, 1000.0).finished();
    Rng rng(43);
    for (int i = 0; i < 10000; ++i) CHECK(sample_truncated_scalar_cmlg(c, rng) > 0.0);
}

TEST_CASE("truncation is free when the positive mass is near one") {
    CMLGParams c;
    c.H = MatrixXd::Ones(1, 1);
    c.alpha = VectorXd::Constant(1, 2.0);
    c.kappa = VectorXd::Constant(1, 0.001);
    Rng r1(47), r2(47);
    for (int i = 0; i < 50; ++i)
        CHECK(sample_truncated_scalar_cmlg(c, r1) == sample_cmlg(c, r2)[0]);
}

TEST_CASE("truncated sampler matches a rejection oracle") {
    CMLGParams c;
    c.H = MatrixXd::Ones(1, 1);
    c.alpha = VectorXd::Ones(1);
    c.kappa = VectorXd::Ones(1);

    Rng oracle_rng(53);
    std::vector<double> kept;
    for (int i = 0; i < 200000; ++i) {
        const double q = sample_cmlg(c, oracle_rng)[0];
        if (q > 0.0) kept.push_back(q);
    }
    const auto mo = testutil::moments(kept);

    Rng rng(59);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = sample_truncated_scalar_cmlg(c, rng);
    const auto mt = testutil::moments(xs);

    CHECK(std::abs(mt.mean - mo.mean) < 3.0 * (mt.se_mean() + mo.se_mean()));
}

TEST_CASE("degenerate truncation raises after exhausting attempts") {
    CMLGParams c;
    c.H = MatrixXd::Ones(1, 1);
    c.alpha = VectorXd::Ones(1);
    c.kappa = VectorXd::Constant(1, 1e9);
    Rng rng(61);
    CHECK_THROWS_AS(sample_truncated_scalar_cmlg(c, rng), degenerate_truncation_error);
}

TEST_CASE("truncated sampler requires a scalar system") {
    CMLGParams c;
    c.H = MatrixXd::Identity(2, 2);
    c.alpha = VectorXd::Ones(2);
    c.kappa = VectorXd::Ones(2);
    Rng rng(1);
    CHECK_THROWS_AS(sample_truncated_scalar_cmlg(c, rng), parameter_error);
}

TEST_CASE("safe_exp clamps and counts") {
    long sat = 0;
    CHECK(safe_exp(1.0, &sat) == std::exp(1.0));
    CHECK(sat == 0);
    CHECK(safe_exp(800.0, &sat) == std::exp(700.0));
    CHECK(sat == 1);
    CHECK(safe_exp(-800.0, &sat) == std::exp(-700.0));
    CHECK(sat == 2);
}
