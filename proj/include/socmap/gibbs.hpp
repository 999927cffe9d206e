#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "socmap/design.hpp"
#include "socmap/mlg.hpp"
#include "socmap/rng.hpp"
#include "socmap/types.hpp"

namespace socmap {

struct ChainState {
    VectorXd beta1, eta1, beta2, eta2;
    double sigma2_eta1 = 1.0;
    double sigma2_eta2 = 1.0;
};

struct SamplerConfig {
    int n_iter = 5000;
    int burn_in = 1000;
    int thin = 1;
    std::uint64_t seed = 0;
    void validate() const;
};

struct PosteriorDraws {
    MatrixXd draws;                   // one row per stored iteration
    std::vector<std::string> labels;  // per column
    std::vector<int> iterations;
    Eigen::Index p1 = 0, r1 = 0, p2 = 0, r2 = 0;

    Eigen::Index count() const { return draws.rows(); }
    auto beta1() const { return draws.middleCols(0, p1); }
    auto eta1() const { return draws.middleCols(p1, r1); }
    auto beta2() const { return draws.middleCols(p1 + r1, p2); }
    auto eta2() const { return draws.middleCols(p1 + r1 + p2, r2); }
    auto sigma2_eta1() const { return draws.col(p1 + r1 + p2 + r2); }
    auto sigma2_eta2() const { return draws.col(p1 + r1 + p2 + r2 + 1); }
};

struct BlockTimers {
    // beta1, eta1, beta2, eta2, sigma2_eta1, inv_sigma_eta2
    std::array<double, 6> seconds{};
};

struct DiagnosticsRow {
    std::string label;
    double rhat;
    double ess;
};

struct ChainDiagnostics {
    std::vector<DiagnosticsRow> rows;
    BlockTimers timers;
    double seconds_total = 0.0;
    long exp_saturations = 0;
    std::vector<int> zero_basis_sites;  // mean-side basis rows that are all zero
};

struct FitResult {
    PosteriorDraws draws;
    ChainDiagnostics diagnostics;
};

/// Precision of sigma^2(s_i) under the current state:
/// omega_i = exp(x2_i'b2 + psi2_i'e2), exponent clamped.
VectorXd omega_y(const ChainState& state, const DesignSet& d, long* saturations = nullptr);

/// Natural parameters (precision A, offset b) of a Gaussian conditional
/// N(A^{-1} b, A^{-1}).
struct GaussianSystem {
    MatrixXd precision;
    VectorXd rhs;
};

/// The exact systems each block conditional samples from. The cMLG systems
/// stack data rows (design block, shape 1/2, rate 1/2 resid_i^2 e^{offset_i})
/// over prior rows (alpha^{-1/2}/prior_sd on the diagonal, shape = rate =
/// alpha); data rows whose rate is exactly zero are dropped.
GaussianSystem beta1_system(const ChainState& state, const VectorXd& y, const DesignSet& d,
                            const Hyperparams& hyper);
GaussianSystem eta1_system(const ChainState& state, const VectorXd& y, const DesignSet& d);
CMLGParams beta2_system(const ChainState& state, const VectorXd& y, const DesignSet& d,
                        const Hyperparams& hyper, long* saturations = nullptr);
CMLGParams eta2_system(const ChainState& state, const VectorXd& y, const DesignSet& d,
                       const Hyperparams& hyper, long* saturations = nullptr);
CMLGParams inv_sigma_eta2_system(const ChainState& state, const Hyperparams& hyper);

/// Draw from N(A^{-1} b, A^{-1}) for SPD A, with escalating diagonal jitter
/// on factorization failure.
VectorXd spd_gaussian_draw(MatrixXd precision, const VectorXd& rhs, Rng& rng);

VectorXd sample_beta1(const ChainState& state, const VectorXd& y, const DesignSet& d,
                      const Hyperparams& hyper, Rng& rng);
VectorXd sample_eta1(const ChainState& state, const VectorXd& y, const DesignSet& d,
                     const Hyperparams& hyper, Rng& rng);
VectorXd sample_beta2(const ChainState& state, const VectorXd& y, const DesignSet& d,
                      const Hyperparams& hyper, Rng& rng, long* saturations = nullptr);
VectorXd sample_eta2(const ChainState& state, const VectorXd& y, const DesignSet& d,
                     const Hyperparams& hyper, Rng& rng, long* saturations = nullptr);
double sample_sigma2_eta1(const ChainState& state, const Hyperparams& hyper, Rng& rng);
/// Draws 1/sigma_eta2 from its truncated scalar conditional and returns it;
/// callers store sigma2_eta2 = 1/draw^2.
double sample_inv_sigma_eta2(const ChainState& state, const Hyperparams& hyper, Rng& rng);

/// One full scan: beta1, eta1, beta2, eta2, sigma2_eta1, 1/sigma_eta2, with
/// the linear predictors recomputed from the freshest state between updates.
ChainState gibbs_step(const ChainState& state, const VectorXd& y, const DesignSet& d,
                      const Hyperparams& hyper, Rng& rng,
                      BlockTimers* timers = nullptr, long* saturations = nullptr);

FitResult run_chain(const VectorXd& y, const DesignSet& d, const Hyperparams& hyper,
                    const SamplerConfig& config);

/// Split-half potential scale reduction and Geyer initial-positive-sequence
/// effective sample size for one stored column.
DiagnosticsRow column_diagnostics(const std::string& label,
                                  const Eigen::Ref<const VectorXd>& column);

}  // namespace socmap
