#pragma once

#include "socmap/rng.hpp"
#include "socmap/types.hpp"

namespace socmap {

/// exp with the argument clamped to [-700, 700]; clamping is counted in
/// *saturations when given. Data terms like (y-mu)^2 * exp(x'b) overflow
/// easily early in a chain without this guard.
double safe_exp(double x, long* saturations = nullptr);

/// Parameters of MLG(mu, V, alpha, kappa): the law of V*log(g) + mu with
/// g_i ~ Gamma(alpha_i, rate kappa_i) independent.
struct MLGParams {
    VectorXd mu;
    MatrixXd V;
    VectorXd alpha;
    VectorXd kappa;
    void validate() const;
};

/// Conditional MLG over q, density proportional to
/// exp{alpha'Hq - kappa'exp(Hq)}. Any centering mu* is pre-absorbed by the
/// caller as kappa <- kappa .* exp(-mu*).
struct CMLGParams {
    MatrixXd H;  // n x r, full column rank
    VectorXd alpha;
    VectorXd kappa;
    void validate() const;
};

struct InverseGammaParams {
    double shape = 1.0;
    double scale = 1.0;
    void validate() const;
};

VectorXd sample_mlg(const MLGParams& params, Rng& rng);

double mlg_log_density(const VectorXd& y, const MLGParams& params);

/// Projection sampler: draws Y ~ MLG(0, I_n, alpha, kappa) and returns
/// (H'H)^{-1} H'Y.
VectorXd sample_cmlg(const CMLGParams& params, Rng& rng);

/// Unnormalized log density of the conditional MLG (for oracle checks).
double cmlg_log_unnormalized(const VectorXd& q, const CMLGParams& params);

double sample_inverse_gamma(const InverseGammaParams& params, Rng& rng);

/// Scalar conditional MLG restricted to (0, inf) via rejection.
double sample_truncated_scalar_cmlg(const CMLGParams& params, Rng& rng);

}  // namespace socmap
