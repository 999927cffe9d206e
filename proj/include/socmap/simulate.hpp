#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "socmap/basis.hpp"
#include "socmap/rng.hpp"
#include "socmap/types.hpp"

namespace socmap {

/// Generative settings for a synthetic data set following the full
/// heteroscedastic model: land-use categories from a thresholded smooth
/// random surface, spectral coefficients from smooth random fields, and
/// y(s) ~ N(mu(s), sigma2(s)) with both surfaces built from land-use
/// effects, coordinate trends, and bisquare basis expansions.
struct SyntheticSpec {
    long n = 750;
    Bbox bbox{0.0, 0.0, 10.0, 10.0};
    std::array<double, 4> proportions{0.3, 0.3, 0.2, 0.2};  // C, F, W, Oth
    int landuse_bumps = 60;       // bump count of the clustering surface
    double landuse_scale = 1.2;   // its correlation length
    std::vector<GridDims> basis_dims{{4, 3}};
    int K = 3;

    // mean surface
    std::array<double, 4> gamma{1.0, 1.9, 1.4, 0.7};  // land-use intercepts
    double trend_lon = 0.02, trend_lat = 0.05;
    double eta1_sd = 2.2;    // basis coefficients
    double kappa_sd = 0.5;   // land-use x basis interaction coefficients
    std::vector<double> chi{0.9, -0.7, 0.5};  // spectral coefficient effects

    // spectral coefficient fields
    int coeff_bumps = 60;
    double coeff_scale = 0.9;
    std::vector<double> coeff_amp{1.5, 1.1, 0.8};
    double coeff_noise_sd = 0.0;

    // -log sigma^2 surface
    std::array<double, 4> zeta{0.2, 0.7, 0.0, 0.45};
    double vtrend_lon = 0.01, vtrend_lat = 0.02;
    double alpha_sd = 0.3;

    // synthetic reflectance construction (rank K, orthonormal curves)
    int w_min = 350, w_max = 2500;
    bool emit_spectra = true;

    std::uint64_t seed = 0;

    void validate() const;
};

/// Heavier variant used by the closed-loop recovery benchmark: n = 2200
/// (2000 train + 200 evaluation), one 5x4 basis resolution, smoother
/// land-use regions, weaker basis coefficients.
SyntheticSpec recovery_benchmark_spec();

struct SyntheticTruth {
    VectorXd beta1;  // [gamma(4), trend_lon, trend_lat, chi(K)]
    VectorXd eta1;   // [basis coefs (J), interaction coefs (4J)]
    VectorXd beta2;  // [zeta(4), vtrend_lon, vtrend_lat]
    VectorXd eta2;   // variance basis coefs (J)
    VectorXd mu;     // per site
    VectorXd nlv;    // -log sigma^2 per site
};

struct SimulationResult {
    SiteTable sites;   // y and spectral coefficients filled
    MatrixXd spectra;  // n x W reflectance, empty unless emit_spectra
    int w_min = 0, w_max = 0;
    BasisSet basis;    // the generating basis
    SyntheticTruth truth;
};

/// Sum of n_bumps random-sign Gaussian bumps with the given length scale;
/// centers drawn uniformly in the bbox. A cheap stand-in for a smooth
/// Gaussian-process draw.
VectorXd bump_field(Rng& rng, const std::vector<Location>& points, const Bbox& bbox,
                    int n_bumps, double length_scale, double amplitude = 1.0);

SimulationResult simulate(const SyntheticSpec& spec);

}  // namespace socmap
