#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "socmap/basis.hpp"
#include "socmap/rng.hpp"

using namespace socmap;

namespace {
const Bbox kBox{0.0, 0.0, 10.0, 10.0};
}

TEST_CASE("2x2 grid puts knots at the corners with R = 15") {
    const BasisSet b = generate_knots(kBox, {{2, 2}});
    REQUIRE(b.size() == 4);
    CHECK(b.knots[0].u.lon == 0.0);
    CHECK(b.knots[0].u.lat == 0.0);
    CHECK(b.knots[1].u.lon == 10.0);
    CHECK(b.knots[1].u.lat == 0.0);
    CHECK(b.knots[2].u.lon == 0.0);
    CHECK(b.knots[2].u.lat == 10.0);
    CHECK(b.knots[3].u.lon == 10.0);
    CHECK(b.knots[3].u.lat == 10.0);
    for (const auto& k : b.knots) CHECK(k.R == 15.0);
    for (int id : b.resolution_ids) CHECK(id == 0);
}

TEST_CASE("default two-resolution basis has 76 knots") {
    const BasisSet b = generate_knots(kBox, {{3, 2}, {10, 7}});
    REQUIRE(b.size() == 76);
    CHECK(std::count(b.resolution_ids.begin(), b.resolution_ids.end(), 0) == 6);
    CHECK(std::count(b.resolution_ids.begin(), b.resolution_ids.end(), 1) == 70);
    // coarse resolution: x spacing 5, y spacing 10 -> R = 15
    CHECK(b.knots[0].R == 15.0);
    CHECK(b.knots[1].u.lon == 5.0);
    CHECK(b.knots[1].u.lat == 0.0);
    // fine resolution: x spacing 10/9, y spacing 10/6 -> R = 2.5
    CHECK(b.knots[6].R == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(b.knots[6].u.lon == 0.0);
    CHECK(b.knots[6].u.lat == 0.0);
}

TEST_CASE("single-knot dimension is centered with full-extent spacing") {
    const BasisSet b = generate_knots(kBox, {{1, 1}});
    REQUIRE(b.size() == 1);
    CHECK(b.knots[0].u.lon == 5.0);
    CHECK(b.knots[0].u.lat == 5.0);
    CHECK(b.knots[0].R == 15.0);
}

TEST_CASE("bisquare kernel values") {
    const Knot k{{0.0, 0.0}, 2.0};
    CHECK(bisquare({0.0, 0.0}, k) == 1.0);
    CHECK(bisquare({2.0, 0.0}, k) == 0.0);
    CHECK(bisquare({3.0, 0.0}, k) == 0.0);
    CHECK(bisquare({1.0, 0.0}, k) == doctest::Approx(0.5625).epsilon(1e-15));
    CHECK(bisquare({0.0, 1.0}, k) == doctest::Approx(0.5625).epsilon(1e-15));
}

TEST_CASE("kernel is bounded and non-increasing in distance") {
    const Knot k{{3.0, -2.0}, 4.0};
    double prev = 1.1;
    for (int i = 0; i <= 100; ++i) {
        const double d = 6.0 * i / 100.0;
        const double v = bisquare({3.0 + d, -2.0}, k);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("basis matrix matches per-entry kernel evaluations") {
    BasisSet b;
    b.knots = {{{0.0, 0.0}, 2.0}, {{5.0, 5.0}, 2.0}, {{1.2, 0.5}, 1.0}};
    b.resolution_ids = {0, 0, 0};
    const std::vector<Location> sites{{0.0, 0.0}, {1.2, 0.5}};
    const MatrixXd Phi = basis_matrix(sites, b);
    REQUIRE(Phi.rows() == 2);
    REQUIRE(Phi.cols() == 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) CHECK(Phi(i, j) == bisquare(sites[i], b.knots[j]));
    CHECK(Phi(0, 0) == 1.0);  // site coincides with knot
    CHECK(Phi(1, 2) == 1.0);
    CHECK(Phi(0, 2) == 0.0);  // d = 1.3 >= R = 1
}

TEST_CASE("sites outside every kernel are reported") {
    const BasisSet b = generate_knots(kBox, {{3, 3}});
    const std::vector<Location> sites{{5.0, 5.0}, {100.0, 100.0}, {0.0, 0.0}};
    const MatrixXd Phi = basis_matrix(sites, b);
    const auto zero = zero_basis_rows(Phi);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0] == 1);
    CHECK(zero_basis_rows(MatrixXd::Ones(3, 2)).empty());
}

TEST_CASE("interaction basis places rows in land-use blocks") {
    const MatrixXd Phi = MatrixXd::Identity(2, 2);
    const std::vector<Landuse> lu{Landuse::C, Landuse::F};
    const MatrixXd X = interaction_basis(Phi, lu);
    REQUIRE(X.rows() == 2);
    REQUIRE(X.cols() == 8);
    const VectorXd row0 = (VectorXd(8) << 1, 0, 0, 0, 0, 0, 0, 0).finished();
    const VectorXd row1 = (VectorXd(8) << 0, 0, 0, 1, 0, 0, 0, 0).finished();
    CHECK(X.row(0).transpose() == row0);
    CHECK(X.row(1).transpose() == row1);
}

TEST_CASE("uniform land use leaves the other blocks zero") {
    Rng rng(5);
    MatrixXd Phi(4, 3);
    for (Eigen::Index i = 0; i < Phi.size(); ++i) Phi(i / 3, i % 3) = rng.uniform();
    const std::vector<Landuse> lu(4, Landuse::C);
    const MatrixXd X = interaction_basis(Phi, lu);
    CHECK(X.leftCols(3) == Phi);
    CHECK(X.rightCols(9).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("interaction preserves row sums and collapses back to the basis") {
    Rng rng(7);
    const int n = 10, J = 4;
    MatrixXd Phi(n, J);
    for (Eigen::Index i = 0; i < Phi.size(); ++i) Phi(i / J, i % J) = rng.uniform();
    std::vector<Landuse> lu;
    for (int i = 0; i < n; ++i) lu.push_back(static_cast<Landuse>(i % kNumLanduse));
    const MatrixXd X = interaction_basis(Phi, lu);
    REQUIRE(X.cols() == kNumLanduse * J);
    for (int i = 0; i < n; ++i)
        CHECK(X.row(i).sum() == doctest::Approx(Phi.row(i).sum()).epsilon(1e-15));
    MatrixXd collapsed = MatrixXd::Zero(n, J);
    for (int b = 0; b < kNumLanduse; ++b) collapsed += X.middleCols(b * J, J);
    CHECK(collapsed == Phi);
}

TEST_CASE("interaction rejects unclassified rows") {
    const MatrixXd Phi = MatrixXd::Ones(2, 2);
    CHECK_THROWS_AS(interaction_basis(Phi, {Landuse::C, Landuse::NotApplicable}),
                    parameter_error);
    CHECK_THROWS_AS(interaction_basis(Phi, {Landuse::C}), parameter_error);
}

TEST_CASE("knot generation is deterministic and validates input") {
    const BasisSet a = generate_knots(kBox, {{3, 2}, {10, 7}});
    const BasisSet b = generate_knots(kBox, {{3, 2}, {10, 7}});
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) {
        CHECK(a.knots[i].u.lon == b.knots[i].u.lon);
        CHECK(a.knots[i].u.lat == b.knots[i].u.lat);
        CHECK(a.knots[i].R == b.knots[i].R);
    }
    CHECK_THROWS_AS(generate_knots(kBox, {}), parameter_error);
    CHECK_THROWS_AS(generate_knots(kBox, {{0, 2}}), parameter_error);
    CHECK_THROWS_AS(generate_knots(Bbox{0, 0, 0, 10}, {{2, 2}}), parameter_error);
}
