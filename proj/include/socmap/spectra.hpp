#pragma once

#include <vector>

#include "socmap/types.hpp"

namespace socmap {

/// Reflectance curve on a uniform 1 nm wavelength grid [w_min, w_max].
struct Spectrum {
    int w_min = 350;
    int w_max = 2500;
    VectorXd reflectance;
    int grid_size() const { return w_max - w_min + 1; }
    void validate() const;
};

struct SpectralBasis {
    VectorXd mean_spectrum;
    MatrixXd loadings;                 // K x W, rows orthonormal
    VectorXd explained_variance_ratio; // length K, non-increasing
    int w_min = 350;
    int w_max = 2500;
    bool variance_warning = false;     // cumulative explained < 0.99
    int K() const { return static_cast<int>(loadings.rows()); }
    double cumulative_explained() const { return explained_variance_ratio.sum(); }
};

/// Covariance PCA (SVD of the mean-centered matrix, no per-wavelength
/// standardization). One row per site. Loading signs are fixed so each
/// row's largest-magnitude coordinate is non-negative.
SpectralBasis fit_pca(const MatrixXd& spectra, int K, int w_min = 350, int w_max = 2500);

VectorXd project(const VectorXd& reflectance, const SpectralBasis& basis);

VectorXd reconstruct(const VectorXd& upsilon, const SpectralBasis& basis);

/// Coefficients of the k nearest reference sites (k=1: nearest site;
/// ties broken by smallest site index; k>1: unweighted mean).
VectorXd knn_predict_coeffs(const Location& target,
                            const std::vector<Location>& ref_locs,
                            const MatrixXd& ref_coeffs, int k = 1);

}  // namespace socmap
