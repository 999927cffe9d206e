#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "socmap/basis.hpp"
#include "socmap/design.hpp"
#include "socmap/gibbs.hpp"
#include "socmap/types.hpp"

namespace socmap {

struct MetricsRow {
    int model = 0;
    double mse = 0.0;
    double msev = 0.0;
    double cr = 0.0;
    double is_avg = 0.0;
    double es = 0.0;
};

struct FoldAssignment {
    std::vector<int> fold;  // fold index per site
    int k = 0;
};

struct SemivariogramBin {
    double center = 0.0;
    double semivariance = 0.0;  // meaningless when pairs == 0
    long pairs = 0;
};

struct SemivariogramTable {
    int category = -1;  // land-use code, -1 for all sites pooled
    std::vector<SemivariogramBin> bins;
};

enum class CoeffMode { Known, Knn };

double mse(const VectorXd& y, const VectorXd& yhat);

// (1/N) sum over sites of {(y - yhat)^2 - tau2hat}^2
double msev(const VectorXd& y, const VectorXd& yhat, const VectorXd& tau2hat);

// fraction of y inside the closed interval [lo, hi]
double coverage(const VectorXd& y, const VectorXd& lo, const VectorXd& hi);

// mean of (hi-lo) + (2/alpha)(lo-y) 1{y<lo} + (2/alpha)(y-hi) 1{y>hi}
double interval_score(const VectorXd& y, const VectorXd& lo, const VectorXd& hi,
                      double level_alpha = 0.05);

// Monte Carlo energy score over the held-out vector jointly:
// (1/T) sum_t ||x_t - y|| - (1/(2T^2)) sum_t sum_t' ||x_t - x_t'||
double energy_score(const VectorXd& y, const MatrixXd& predictive_draws);

// Seeded uniform partition into k folds with sizes differing by at most 1.
FoldAssignment kfold_split(Eigen::Index n, int k, std::uint64_t seed);

/// K-fold cross-validation: per fold, fit on the complement (per-fold chain
/// seeds derived from the root seed), draw the held-out posterior predictive,
/// then pool (y, yhat, tau2hat, interval) pairs across folds for MSE, MSEV,
/// CR, and IS; the energy score is computed per fold and averaged. In knn
/// mode the held-out sites' spectral coefficients are replaced by their
/// 1-nearest-neighbor prediction from the training sites before scoring.
MetricsRow cross_validate(int model, const SiteTable& sites, const BasisSet& basis,
                          const Hyperparams& hyper, const SamplerConfig& sampler_config,
                          int k, std::uint64_t seed, CoeffMode coeff_mode = CoeffMode::Known,
                          int threads = 1);

/// Classical semivariogram estimator over equal-width distance bins:
/// gamma(h) = (1/(2|N(h)|)) sum_{(i,j) in N(h)} (y_i - y_j)^2.
/// max_dist <= 0 selects the default of half the maximum pairwise distance
/// (computed over all sites so category tables share a common axis). With
/// by_category, one table per land-use code present; otherwise one pooled
/// table with category -1.
std::vector<SemivariogramTable> empirical_semivariogram(const SiteTable& sites,
                                                        const VectorXd& y, int n_bins,
                                                        double max_dist = 0.0,
                                                        bool by_category = false);

}  // namespace socmap
