#include "socmap/mlg.hpp"

#include <cmath>
#include <limits>

namespace socmap {

double safe_exp(double x, long* saturations) {
    if (x > 700.0 || x < -700.0) {
        if (saturations) ++*saturations;
        x = x > 0.0 ? 700.0 : -700.0;
    }
    return std::exp(x);
}

namespace {

void check_positive(const VectorXd& v, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!(v[i] > 0.0) || !std::isfinite(v[i]))
            throw parameter_error(std::string(name) + " must be strictly positive and finite");
}

}  // namespace

void MLGParams::validate() const {
    const auto n = mu.size();
    if (alpha.size() != n || kappa.size() != n || V.rows() != n || V.cols() != n)
        throw parameter_error("MLGParams: inconsistent dimensions");
    check_positive(alpha, "MLGParams.alpha");
    check_positive(kappa, "MLGParams.kappa");
    Eigen::FullPivLU<MatrixXd> lu(V);
    if (!lu.isInvertible())
        throw parameter_error("MLGParams: V is not invertible");
}

void CMLGParams::validate() const {
    const auto n = H.rows();
    const auto r = H.cols();
    if (r < 1 || r > n) throw parameter_error("CMLGParams: need 1 <= r <= n");
    if (alpha.size() != n || kappa.size() != n)
        throw parameter_error("CMLGParams: inconsistent dimensions");
    check_positive(alpha, "CMLGParams.alpha");
    check_positive(kappa, "CMLGParams.kappa");
    if (Eigen::ColPivHouseholderQR<MatrixXd>(H).rank() < r)
        throw parameter_error("CMLGParams: H is rank deficient");
}

void InverseGammaParams::validate() const {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw parameter_error("InverseGammaParams: shape and scale must be positive");
}

VectorXd sample_mlg(const MLGParams& params, Rng& rng) {
    params.validate();
    const auto n = params.mu.size();
    VectorXd logg(n);
    for (Eigen::Index i = 0; i < n; ++i)
        logg[i] = rng.log_gamma(params.alpha[i], params.kappa[i]);
    return params.V * logg + params.mu;
}

double mlg_log_density(const VectorXd& y, const MLGParams& params) {
    params.validate();
    if (y.size() != params.mu.size())
        throw parameter_error("mlg_log_density: y has wrong length");
    const auto n = y.size();
    Eigen::PartialPivLU<MatrixXd> lu(params.V);
    const VectorXd z = lu.solve(y - params.mu);
    double logdet_v = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        logdet_v += std::log(std::abs(lu.matrixLU()(i, i)));
    double out = -logdet_v;  // -1/2 log det(VV') = -log|det V|
    for (Eigen::Index i = 0; i < n; ++i) {
        out += params.alpha[i] * std::log(params.kappa[i]) - std::lgamma(params.alpha[i]);
        out += params.alpha[i] * z[i] - params.kappa[i] * safe_exp(z[i]);
    }
    return out;
}

namespace {

void check_cmlg_shape(const CMLGParams& params) {
    const auto n = params.H.rows();
    const auto r = params.H.cols();
    if (r < 1 || r > n) throw parameter_error("CMLGParams: need 1 <= r <= n");
    if (params.alpha.size() != n || params.kappa.size() != n)
        throw parameter_error("CMLGParams: inconsistent dimensions");
    check_positive(params.alpha, "CMLGParams.alpha");
    check_positive(params.kappa, "CMLGParams.kappa");
}

VectorXd cmlg_draw(const CMLGParams& params, const Eigen::LLT<MatrixXd>& gram_llt,
                   Rng& rng) {
    const auto n = params.H.rows();
    VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w[i] = rng.log_gamma(params.alpha[i], params.kappa[i]);
    return gram_llt.solve(params.H.transpose() * w);
}

/// Cholesky of H'H with a relative pivot guard: LLT alone reports success on
/// exactly duplicated columns because the zero pivot rounds to a tiny
/// positive value.
Eigen::LLT<MatrixXd> gram_llt(const MatrixXd& H, const char* who) {
    Eigen::LLT<MatrixXd> llt(MatrixXd(H.transpose() * H));
    if (llt.info() == Eigen::Success) {
        const VectorXd piv = MatrixXd(llt.matrixLLT()).diagonal();
        const double pmin = piv.minCoeff(), pmax = piv.maxCoeff();
        const double eps = std::numeric_limits<double>::epsilon();
        if (pmin > 0.0 && pmin * pmin > 4.0 * eps * pmax * pmax) return llt;
    }
    throw parameter_error(std::string(who) + ": H is rank deficient");
}

}  // namespace

VectorXd sample_cmlg(const CMLGParams& params, Rng& rng) {
    check_cmlg_shape(params);
    return cmlg_draw(params, gram_llt(params.H, "sample_cmlg"), rng);
}

double cmlg_log_unnormalized(const VectorXd& q, const CMLGParams& params) {
    const VectorXd hq = params.H * q;
    double out = 0.0;
    for (Eigen::Index i = 0; i < hq.size(); ++i)
        out += params.alpha[i] * hq[i] - params.kappa[i] * safe_exp(hq[i]);
    return out;
}

double sample_inverse_gamma(const InverseGammaParams& params, Rng& rng) {
    params.validate();
    return 1.0 / rng.gamma(params.shape, params.scale);
}

double sample_truncated_scalar_cmlg(const CMLGParams& params, Rng& rng) {
    if (params.H.cols() != 1)
        throw parameter_error("sample_truncated_scalar_cmlg: r must be 1");
    check_cmlg_shape(params);
    const Eigen::LLT<MatrixXd> llt = gram_llt(params.H, "sample_truncated_scalar_cmlg");
    constexpr long kMaxAttempts = 10'000'000;
    for (long attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const double q = cmlg_draw(params, llt, rng)[0];
        if (q > 0.0) return q;
    }
    throw degenerate_truncation_error(
        "truncated scalar cMLG: no positive draw in 1e7 attempts");
}

}  // namespace socmap
