#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "socmap/rng.hpp"
#include "socmap/spectra.hpp"

using namespace socmap;

namespace {

/// Rank-3 data: three orthonormal disjoint-support profiles with random
/// coefficients, plus a constant offset.
MatrixXd rank3_data(int n, int W, std::uint64_t seed) {
    MatrixXd profiles = MatrixXd::Zero(3, W);
    const int block = W / 3;
    for (int k = 0; k < 3; ++k)
        profiles.row(k).segment(k * block, block).setConstant(1.0 / std::sqrt(block));
    Rng rng(seed);
    MatrixXd data(n, W);
    for (int i = 0; i < n; ++i) {
        VectorXd row = VectorXd::Constant(W, 0.4);
        for (int k = 0; k < 3; ++k) row += rng.normal() * (k + 1.0) * profiles.row(k).transpose();
        data.row(i) = row;
    }
    return data;
}

}  // namespace

TEST_CASE("rank-3 input is explained exactly by three components") {
    const MatrixXd data = rank3_data(12, 30, 3);
    const SpectralBasis basis = fit_pca(data, 3, 350, 379);
    CHECK(basis.cumulative_explained() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_FALSE(basis.variance_warning);
    for (int i = 0; i < data.rows(); ++i) {
        const VectorXd rec = reconstruct(project(data.row(i), basis), basis);
        CHECK((rec - data.row(i).transpose()).lpNorm<Eigen::Infinity>() < 1e-8);
    }
}

TEST_CASE("two symmetric points load on their normalized difference") {
    MatrixXd data(2, 4);
    data.row(0) << 1.0, 0.0, 2.0, -1.0;
    data.row(1) << 3.0, 4.0, 0.0, 1.0;
    const SpectralBasis basis = fit_pca(data, 1, 350, 353);
    const VectorXd diff = (data.row(1) - data.row(0)).normalized();
    const double dot = basis.loadings.row(0).dot(diff.transpose());
    CHECK(std::abs(std::abs(dot) - 1.0) < 1e-12);
    CHECK(basis.explained_variance_ratio[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loading signs follow the largest-coordinate convention") {
    Rng rng(11);
    MatrixXd data(20, 8);
    for (Eigen::Index i = 0; i < data.size(); ++i) data(i / 8, i % 8) = rng.normal();
    const SpectralBasis basis = fit_pca(data, 4, 350, 357);
    for (int k = 0; k < basis.K(); ++k) {
        Eigen::Index imax = 0;
        basis.loadings.row(k).cwiseAbs().maxCoeff(&imax);
        CHECK(basis.loadings(k, imax) >= 0.0);
    }
}

TEST_CASE("projection of the mean spectrum is zero") {
    const MatrixXd data = rank3_data(10, 30, 5);
    const SpectralBasis basis = fit_pca(data, 3, 350, 379);
    const VectorXd at_mean = project(basis.mean_spectrum, basis);
    CHECK(at_mean.lpNorm<Eigen::Infinity>() < 1e-10);

    const VectorXd shifted = basis.mean_spectrum + 2.0 * basis.loadings.row(0).transpose();
    const VectorXd coeffs = project(shifted, basis);
    CHECK(coeffs[0] == doctest::Approx(2.0).epsilon(1e-10));
    for (int k = 1; k < basis.K(); ++k) CHECK(std::abs(coeffs[k]) < 1e-10);
}

TEST_CASE("residual after reconstruction is orthogonal to the loadings") {
    Rng rng(13);
    MatrixXd data(15, 12);
    for (Eigen::Index i = 0; i < data.size(); ++i) data(i / 12, i % 12) = rng.normal();
    const SpectralBasis basis = fit_pca(data, 3, 350, 361);
    for (int i = 0; i < data.rows(); ++i) {
        const VectorXd resid =
            data.row(i).transpose() - reconstruct(project(data.row(i), basis), basis);
        CHECK((basis.loadings * resid).lpNorm<Eigen::Infinity>() < 1e-8);
    }
}

TEST_CASE("loadings are orthonormal") {
    Rng rng(17);
    MatrixXd data(25, 10);
    for (Eigen::Index i = 0; i < data.size(); ++i) data(i / 10, i % 10) = rng.normal();
    const SpectralBasis basis = fit_pca(data, 5, 350, 359);
    const MatrixXd gram = basis.loadings * basis.loadings.transpose();
    CHECK((gram - MatrixXd::Identity(5, 5)).lpNorm<Eigen::Infinity>() < 1e-8);
    double prev = 2.0;
    for (int k = 0; k < 5; ++k) {
        CHECK(basis.explained_variance_ratio[k] <= prev);
        prev = basis.explained_variance_ratio[k];
    }
}

TEST_CASE("reconstruction error is non-increasing in K and projection is idempotent") {
    Rng rng(19);
    MatrixXd data(20, 10);
    for (Eigen::Index i = 0; i < data.size(); ++i) data(i / 10, i % 10) = rng.normal();
    double prev = std::numeric_limits<double>::infinity();
    for (int K = 1; K <= 6; ++K) {
        const SpectralBasis basis = fit_pca(data, K, 350, 359);
        double err = 0.0;
        for (int i = 0; i < data.rows(); ++i)
            err += (data.row(i).transpose() -
                    reconstruct(project(data.row(i), basis), basis))
                       .squaredNorm();
        CHECK(err <= prev + 1e-9);
        prev = err;

        for (int i = 0; i < 3; ++i) {
            const VectorXd c1 = project(data.row(i), basis);
            const VectorXd c2 = project(reconstruct(c1, basis), basis);
            CHECK((c1 - c2).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }
}

TEST_CASE("pca input validation") {
    const MatrixXd data = rank3_data(5, 30, 23);
    CHECK_THROWS_AS(fit_pca(data, 5, 350, 379), parameter_error);  // n <= K
    CHECK_THROWS_AS(fit_pca(data, 0, 350, 379), parameter_error);
    const MatrixXd flat = MatrixXd::Constant(6, 10, 0.7);
    CHECK_THROWS_AS(fit_pca(flat, 2, 350, 359), data_error);

    const SpectralBasis basis = fit_pca(data, 2, 350, 379);
    CHECK_THROWS_AS(project(VectorXd::Zero(7), basis), parameter_error);
    CHECK_THROWS_AS(reconstruct(VectorXd::Zero(3), basis), parameter_error);
}

TEST_CASE("nearest-neighbor coefficients") {
    const std::vector<Location> refs{{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}};
    MatrixXd coeffs(3, 2);
    coeffs << 1.0, 10.0, 2.0, 20.0, 3.0, 30.0;

    SUBCASE("coincident target returns that row exactly") {
        const VectorXd c = knn_predict_coeffs({2.0, 0.0}, refs, coeffs, 1);
        CHECK(c[0] == 2.0);
        CHECK(c[1] == 20.0);
    }
    SUBCASE("equidistant tie goes to the smaller index") {
        const VectorXd c = knn_predict_coeffs({2.0, 2.0}, refs, coeffs, 1);
        CHECK(c[0] == 2.0);  // sites 1 and 2 tie at distance 2; site 1 wins
        CHECK(c[1] == 20.0);
        const VectorXd c0 = knn_predict_coeffs({0.0, 0.0}, refs, coeffs, 1);
        CHECK(c0[0] == 1.0);
    }
    SUBCASE("k equal to the reference count returns the mean") {
        const VectorXd c = knn_predict_coeffs({50.0, 50.0}, refs, coeffs, 3);
        CHECK(c[0] == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(c[1] == doctest::Approx(20.0).epsilon(1e-15));
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(knn_predict_coeffs({0, 0}, {}, MatrixXd(0, 2), 1), parameter_error);
        CHECK_THROWS_AS(knn_predict_coeffs({0, 0}, refs, coeffs, 0), parameter_error);
        CHECK_THROWS_AS(knn_predict_coeffs({0, 0}, refs, coeffs, 4), parameter_error);
        CHECK_THROWS_AS(knn_predict_coeffs({0, 0}, refs, MatrixXd::Zero(2, 2), 1),
                        parameter_error);
    }
}

TEST_CASE("spectrum grid validation") {
    Spectrum s;
    s.w_min = 350;
    s.w_max = 360;
    s.reflectance = VectorXd::Constant(11, 0.5);
    CHECK_NOTHROW(s.validate());
    s.reflectance = VectorXd::Constant(10, 0.5);
    CHECK_THROWS_AS(s.validate(), parameter_error);
    s.w_max = 350;
    CHECK_THROWS_AS(s.validate(), parameter_error);
    s.w_max = 360;
    s.reflectance = VectorXd::Constant(11, 0.5);
    s.reflectance[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(s.validate(), parameter_error);
}
