#include "socmap/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "socmap/basis.hpp"
#include "socmap/mlg.hpp"

namespace socmap {

void SamplerConfig::validate() const {
    if (n_iter < 1) throw parameter_error("SamplerConfig: n_iter must be >= 1");
    if (burn_in < 0 || burn_in >= n_iter)
        throw parameter_error("SamplerConfig: need 0 <= burn_in < n_iter");
    if (thin < 1) throw parameter_error("SamplerConfig: thin must be >= 1");
}

VectorXd omega_y(const ChainState& state, const DesignSet& d, long* saturations) {
    VectorXd lin = VectorXd::Zero(d.n());
    if (d.p2() > 0) lin += d.X2 * state.beta2;
    if (d.r2() > 0) lin += d.Psi2 * state.eta2;
    VectorXd out(lin.size());
    for (Eigen::Index i = 0; i < lin.size(); ++i) out[i] = safe_exp(lin[i], saturations);
    return out;
}

/// Interaction bases can be near-collinear for rare land-use/region
/// combinations, hence the jitter ladder.
VectorXd spd_gaussian_draw(MatrixXd precision, const VectorXd& rhs, Rng& rng) {
    const double mean_diag = precision.diagonal().mean();
    double jitter = 0.0;
    Eigen::LLT<MatrixXd> llt(precision);
    while (llt.info() != Eigen::Success) {
        jitter = jitter == 0.0 ? 1e-10 * mean_diag : jitter * 10.0;
        if (jitter > 1e-6 * mean_diag * 1.0000001)
            throw numerical_error("SPD factorization failed beyond jitter budget");
        llt.compute(precision + jitter * MatrixXd::Identity(precision.rows(), precision.cols()));
    }
    const VectorXd mean = llt.solve(rhs);
    VectorXd z(precision.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + llt.matrixU().solve(z);
}

namespace {

VectorXd mu_of(const ChainState& state, const DesignSet& d) {
    VectorXd mu = VectorXd::Zero(d.n());
    if (d.p1() > 0) mu += d.X1 * state.beta1;
    if (d.r1() > 0) mu += d.Psi1 * state.eta1;
    return mu;
}

/// Stacked system shared by the beta2/eta2 conditionals: data rows (design
/// block, shape 1/2, rate = kappa_data) over prior rows (alpha^{-1/2}
/// (1/prior_sd) I, shape alpha, rate alpha). Data rows whose rate is exactly
/// zero carry no information and are dropped, so the draw then consumes the
/// same variates as a prior-only stream.
CMLGParams stacked_cmlg_system(const MatrixXd& design, const VectorXd& kappa_data,
                               double prior_sd, const Hyperparams& hyper) {
    const auto n = design.rows();
    const auto q = design.cols();
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(kappa_data[i]))
            throw numerical_error("stacked cMLG system: non-finite data rate");
        if (kappa_data[i] > 0.0) ++kept;
    }
    CMLGParams params;
    params.H.setZero(kept + q, q);
    params.alpha.resize(kept + q);
    params.kappa.resize(kept + q);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(kappa_data[i] > 0.0)) continue;
        params.H.row(row) = design.row(i);
        params.alpha[row] = 0.5;
        params.kappa[row] = kappa_data[i];
        ++row;
    }
    const double prior_scale = 1.0 / (std::sqrt(hyper.alpha_mlg) * prior_sd);
    for (Eigen::Index j = 0; j < q; ++j) {
        params.H(kept + j, j) = prior_scale;
        params.alpha[kept + j] = hyper.alpha_mlg;
        params.kappa[kept + j] = hyper.alpha_mlg;
    }
    return params;
}

VectorXd variance_rates(const ChainState& state, const VectorXd& y, const DesignSet& d,
                        const VectorXd& offset, long* saturations) {
    const VectorXd resid = y - mu_of(state, d);
    VectorXd kappa(d.n());
    for (Eigen::Index i = 0; i < d.n(); ++i)
        kappa[i] = 0.5 * resid[i] * resid[i] * safe_exp(offset[i], saturations);
    return kappa;
}

}  // namespace

GaussianSystem beta1_system(const ChainState& state, const VectorXd& y, const DesignSet& d,
                            const Hyperparams& hyper) {
    const VectorXd omega = omega_y(state, d);
    VectorXd resid = y;
    if (d.r1() > 0) resid -= d.Psi1 * state.eta1;
    GaussianSystem sys;
    sys.precision = d.X1.transpose() * omega.asDiagonal() * d.X1;
    sys.precision.diagonal().array() += 1.0 / hyper.sigma2_beta1;
    sys.rhs = d.X1.transpose() * (omega.cwiseProduct(resid));
    return sys;
}

GaussianSystem eta1_system(const ChainState& state, const VectorXd& y, const DesignSet& d) {
    const VectorXd omega = omega_y(state, d);
    VectorXd resid = y;
    if (d.p1() > 0) resid -= d.X1 * state.beta1;
    GaussianSystem sys;
    sys.precision = d.Psi1.transpose() * omega.asDiagonal() * d.Psi1;
    sys.precision.diagonal().array() += 1.0 / state.sigma2_eta1;
    sys.rhs = d.Psi1.transpose() * (omega.cwiseProduct(resid));
    return sys;
}

CMLGParams beta2_system(const ChainState& state, const VectorXd& y, const DesignSet& d,
                        const Hyperparams& hyper, long* saturations) {
    const VectorXd off = d.r2() > 0 ? VectorXd(d.Psi2 * state.eta2)
                                    : VectorXd(VectorXd::Zero(d.n()));
    const VectorXd kappa = variance_rates(state, y, d, off, saturations);
    return stacked_cmlg_system(d.X2, kappa, std::sqrt(hyper.sigma2_beta2), hyper);
}

CMLGParams eta2_system(const ChainState& state, const VectorXd& y, const DesignSet& d,
                       const Hyperparams& hyper, long* saturations) {
    const VectorXd off = d.p2() > 0 ? VectorXd(d.X2 * state.beta2)
                                    : VectorXd(VectorXd::Zero(d.n()));
    const VectorXd kappa = variance_rates(state, y, d, off, saturations);
    return stacked_cmlg_system(d.Psi2, kappa, std::sqrt(state.sigma2_eta2), hyper);
}

CMLGParams inv_sigma_eta2_system(const ChainState& state, const Hyperparams& hyper) {
    const auto r2 = state.eta2.size();
    CMLGParams params;
    params.H.resize(r2 + 1, 1);
    params.H.col(0).head(r2) = state.eta2 / std::sqrt(hyper.alpha_mlg);
    params.H(r2, 0) = 1.0;
    params.alpha = VectorXd::Constant(r2 + 1, hyper.alpha_mlg);
    params.kappa = VectorXd::Constant(r2 + 1, hyper.alpha_mlg);
    params.alpha[r2] = hyper.w;
    params.kappa[r2] = hyper.p;
    return params;
}

VectorXd sample_beta1(const ChainState& state, const VectorXd& y, const DesignSet& d,
                      const Hyperparams& hyper, Rng& rng) {
    GaussianSystem sys = beta1_system(state, y, d, hyper);
    return spd_gaussian_draw(std::move(sys.precision), sys.rhs, rng);
}

VectorXd sample_eta1(const ChainState& state, const VectorXd& y, const DesignSet& d,
                     const Hyperparams&, Rng& rng) {
    if (d.r1() == 0) return VectorXd(0);
    GaussianSystem sys = eta1_system(state, y, d);
    return spd_gaussian_draw(std::move(sys.precision), sys.rhs, rng);
}

VectorXd sample_beta2(const ChainState& state, const VectorXd& y, const DesignSet& d,
                      const Hyperparams& hyper, Rng& rng, long* saturations) {
    if (d.p2() == 0) return VectorXd(0);
    return sample_cmlg(beta2_system(state, y, d, hyper, saturations), rng);
}

VectorXd sample_eta2(const ChainState& state, const VectorXd& y, const DesignSet& d,
                     const Hyperparams& hyper, Rng& rng, long* saturations) {
    if (d.r2() == 0) return VectorXd(0);
    return sample_cmlg(eta2_system(state, y, d, hyper, saturations), rng);
}

double sample_sigma2_eta1(const ChainState& state, const Hyperparams& hyper, Rng& rng) {
    InverseGammaParams ig;
    ig.shape = hyper.a + 0.5 * static_cast<double>(state.eta1.size());
    ig.scale = hyper.b + 0.5 * state.eta1.squaredNorm();
    return sample_inverse_gamma(ig, rng);
}

double sample_inv_sigma_eta2(const ChainState& state, const Hyperparams& hyper, Rng& rng) {
    return sample_truncated_scalar_cmlg(inv_sigma_eta2_system(state, hyper), rng);
}

namespace {

struct ScopedTimer {
    explicit ScopedTimer(double* slot) : slot(slot), t0(std::chrono::steady_clock::now()) {}
    ~ScopedTimer() {
        if (slot)
            *slot += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    double* slot;
    std::chrono::steady_clock::time_point t0;
};

}  // namespace

ChainState gibbs_step(const ChainState& state, const VectorXd& y, const DesignSet& d,
                      const Hyperparams& hyper, Rng& rng,
                      BlockTimers* timers, long* saturations) {
    ChainState next = state;
    auto slot = [&](int i) { return timers ? &timers->seconds[i] : nullptr; };
    {
        ScopedTimer t(slot(0));
        next.beta1 = sample_beta1(next, y, d, hyper, rng);
    }
    {
        ScopedTimer t(slot(1));
        next.eta1 = sample_eta1(next, y, d, hyper, rng);
    }
    {
        ScopedTimer t(slot(2));
        next.beta2 = sample_beta2(next, y, d, hyper, rng, saturations);
    }
    {
        ScopedTimer t(slot(3));
        next.eta2 = sample_eta2(next, y, d, hyper, rng, saturations);
    }
    {
        ScopedTimer t(slot(4));
        next.sigma2_eta1 = sample_sigma2_eta1(next, hyper, rng);
    }
    {
        ScopedTimer t(slot(5));
        const double inv_sigma = sample_inv_sigma_eta2(next, hyper, rng);
        next.sigma2_eta2 = 1.0 / (inv_sigma * inv_sigma);
    }
    return next;
}

namespace {

ChainState initial_state(const VectorXd& y, const DesignSet& d) {
    ChainState s;
    s.beta1 = VectorXd::Zero(d.p1());
    s.eta1 = VectorXd::Zero(d.r1());
    s.beta2 = VectorXd::Zero(d.p2());
    s.eta2 = VectorXd::Zero(d.r2());
    double s2_pooled = 1.0;
    if (d.n() > 0 && d.p1() > 0) {
        s.beta1 = d.X1.colPivHouseholderQr().solve(y);
        const VectorXd resid = y - d.X1 * s.beta1;
        s2_pooled = resid.squaredNorm() / static_cast<double>(d.n());
        if (!(s2_pooled > 0.0)) s2_pooled = 1.0;
    }
    if (d.p2() > 0) s.beta2[0] = -std::log(s2_pooled);
    return s;
}

}  // namespace

FitResult run_chain(const VectorXd& y, const DesignSet& d, const Hyperparams& hyper,
                    const SamplerConfig& config) {
    config.validate();
    hyper.validate();
    if (y.size() != d.n()) throw parameter_error("run_chain: response length mismatch");

    const auto t0 = std::chrono::steady_clock::now();
    Rng rng = Rng(config.seed).stream("fit");
    ChainState state = initial_state(y, d);

    FitResult out;
    auto& draws = out.draws;
    draws.p1 = d.p1();
    draws.r1 = d.r1();
    draws.p2 = d.p2();
    draws.r2 = d.r2();
    const Eigen::Index n_cols = d.p1() + d.r1() + d.p2() + d.r2() + 2;
    const int n_keep = (config.n_iter - config.burn_in + config.thin - 1) / config.thin;
    draws.draws.resize(n_keep, n_cols);
    auto append_labels = [&draws](const char* prefix, const std::vector<std::string>& given,
                                  Eigen::Index count) {
        for (Eigen::Index j = 0; j < count; ++j) {
            const std::string base = static_cast<std::size_t>(j) < given.size()
                                         ? given[static_cast<std::size_t>(j)]
                                         : "c" + std::to_string(j + 1);
            draws.labels.push_back(std::string(prefix) + ":" + base);
        }
    };
    append_labels("beta1", d.labels_x1, d.p1());
    append_labels("eta1", d.labels_psi1, d.r1());
    append_labels("beta2", d.labels_x2, d.p2());
    append_labels("eta2", d.labels_psi2, d.r2());
    draws.labels.push_back("sigma2_eta1");
    draws.labels.push_back("sigma2_eta2");

    if (d.r1() > 0)
        out.diagnostics.zero_basis_sites = zero_basis_rows(d.Psi1);

    int kept = 0;
    for (int iter = 0; iter < config.n_iter; ++iter) {
        try {
            state = gibbs_step(state, y, d, hyper, rng, &out.diagnostics.timers,
                               &out.diagnostics.exp_saturations);
        } catch (const numerical_error& e) {
            throw numerical_error(e.what(), iter);
        } catch (const parameter_error& e) {
            // the design was validated up front, so a mid-chain precondition
            // failure is state-driven (e.g. a variance-scale runaway making a
            // stacked system numerically singular)
            throw numerical_error(e.what(), iter);
        }
        if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
            Eigen::Index c = 0;
            draws.draws.block(kept, c, 1, d.p1()) = state.beta1.transpose();
            c += d.p1();
            draws.draws.block(kept, c, 1, d.r1()) = state.eta1.transpose();
            c += d.r1();
            draws.draws.block(kept, c, 1, d.p2()) = state.beta2.transpose();
            c += d.p2();
            draws.draws.block(kept, c, 1, d.r2()) = state.eta2.transpose();
            c += d.r2();
            draws.draws(kept, c) = state.sigma2_eta1;
            draws.draws(kept, c + 1) = state.sigma2_eta2;
            draws.iterations.push_back(iter);
            ++kept;
        }
    }

    for (Eigen::Index j = 0; j < n_cols; ++j)
        out.diagnostics.rows.push_back(column_diagnostics(draws.labels[j], draws.draws.col(j)));
    out.diagnostics.seconds_total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

DiagnosticsRow column_diagnostics(const std::string& label,
                                  const Eigen::Ref<const VectorXd>& column) {
    const auto T = column.size();
    DiagnosticsRow row{label, 1.0, static_cast<double>(T)};
    if (T < 4) return row;

    const auto L = T / 2;
    const VectorXd c1 = column.head(L);
    const VectorXd c2 = column.segment(L, L);
    const double m1 = c1.mean(), m2 = c2.mean();
    const double v1 = (c1.array() - m1).square().sum() / (L - 1);
    const double v2 = (c2.array() - m2).square().sum() / (L - 1);
    const double W = 0.5 * (v1 + v2);
    const double B = L * 0.5 * (m1 - m2) * (m1 - m2);
    if (W > 0.0) {
        const double var_hat = (L - 1.0) / L * W + B / L;
        row.rhat = std::sqrt(var_hat / W);
    }

    const double mean = column.mean();
    const VectorXd centered = column.array() - mean;
    const double g0 = centered.squaredNorm() / T;
    if (g0 > 0.0) {
        auto gamma_k = [&](Eigen::Index k) {
            return centered.head(T - k).dot(centered.tail(T - k)) / T;
        };
        // Geyer initial monotone positive sequence
        double sigma2 = -g0;
        double prev_pair = std::numeric_limits<double>::infinity();
        for (Eigen::Index m = 0; 2 * m + 1 < T; ++m) {
            double pair = gamma_k(2 * m) + gamma_k(2 * m + 1);
            if (pair <= 0.0) break;
            pair = std::min(pair, prev_pair);
            prev_pair = pair;
            sigma2 += 2.0 * pair;
        }
        if (sigma2 > 0.0) row.ess = std::min<double>(T, T * g0 / sigma2);
    }
    return row;
}

}  // namespace socmap
