#include "socmap/simulate.hpp"

#include <cmath>
#include <numeric>

#include "socmap/design.hpp"
#include "socmap/mlg.hpp"
#include "socmap/predict.hpp"

namespace socmap {

void SyntheticSpec::validate() const {
    if (n < 1) throw parameter_error("synthetic spec: n must be positive");
    if (!(bbox.width() > 0.0) || !(bbox.height() > 0.0))
        throw parameter_error("synthetic spec: degenerate bbox");
    double total = 0.0;
    for (double p : proportions) {
        if (p < 0.0) throw parameter_error("synthetic spec: negative land-use proportion");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw parameter_error("synthetic spec: land-use proportions must sum to 1");
    if (basis_dims.empty()) throw parameter_error("synthetic spec: no basis resolutions");
    if (K < 1 || static_cast<std::size_t>(K) > chi.size() ||
        static_cast<std::size_t>(K) > coeff_amp.size())
        throw parameter_error("synthetic spec: K outside the configured coefficient effects");
    if (landuse_bumps < 1 || coeff_bumps < 1)
        throw parameter_error("synthetic spec: bump counts must be positive");
    if (!(landuse_scale > 0.0) || !(coeff_scale > 0.0))
        throw parameter_error("synthetic spec: length scales must be positive");
    if (eta1_sd < 0.0 || kappa_sd < 0.0 || alpha_sd < 0.0 || coeff_noise_sd < 0.0)
        throw parameter_error("synthetic spec: negative standard deviation");
    if (w_min >= w_max) throw parameter_error("synthetic spec: w_min must be below w_max");
}

SyntheticSpec recovery_benchmark_spec() {
    SyntheticSpec spec;
    spec.n = 2200;
    spec.basis_dims = {{5, 4}};
    spec.landuse_bumps = 8;
    spec.landuse_scale = 10.0 / 3.0;
    spec.eta1_sd = 0.8;
    spec.kappa_sd = 0.7;
    spec.chi = {0.6, -0.45, 0.35};
    spec.coeff_bumps = 40;
    spec.coeff_amp = {1.5, 1.0, 0.7};
    spec.coeff_noise_sd = 0.05;
    spec.zeta = {0.5, 1.2, 0.2, 0.9};
    spec.alpha_sd = 0.4;
    return spec;
}

VectorXd bump_field(Rng& rng, const std::vector<Location>& points, const Bbox& bbox,
                    int n_bumps, double length_scale, double amplitude) {
    VectorXd f = VectorXd::Zero(static_cast<Eigen::Index>(points.size()));
    const double denom = 2.0 * length_scale * length_scale;
    for (int b = 0; b < n_bumps; ++b) {
        Location c{bbox.lon_min + bbox.width() * rng.uniform(),
                   bbox.lat_min + bbox.height() * rng.uniform()};
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double d = distance(points[i], c);
            f[static_cast<Eigen::Index>(i)] += sign * std::exp(-d * d / denom);
        }
    }
    return amplitude * f;
}

namespace {

// Orthonormal smooth curves carrying the rank-K spectral structure.
MatrixXd spectral_curves(int K, int W) {
    MatrixXd B(K, W);
    const std::array<double, 3> centers{0.25, 0.55, 0.8};
    for (int k = 0; k < K; ++k) {
        const double c = centers[static_cast<std::size_t>(k % 3)] + 0.02 * (k / 3);
        for (int w = 0; w < W; ++w) {
            const double t = W > 1 ? static_cast<double>(w) / (W - 1) : 0.0;
            B(k, w) = std::exp(-std::pow(t - c, 2) / (2.0 * 0.12 * 0.12));
        }
    }
    for (int k = 0; k < K; ++k) {  // Gram-Schmidt
        for (int j = 0; j < k; ++j) B.row(k) -= B.row(k).dot(B.row(j)) * B.row(j);
        const double nrm = B.row(k).norm();
        if (nrm <= 0.0) throw numerical_error("degenerate synthetic spectral curves");
        B.row(k) /= nrm;
    }
    return B;
}

}  // namespace

SimulationResult simulate(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng = Rng(spec.seed).stream("simulate");
    const Eigen::Index n = spec.n;

    std::vector<Location> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
        p.lon = spec.bbox.lon_min + spec.bbox.width() * rng.uniform();
        p.lat = spec.bbox.lat_min + spec.bbox.height() * rng.uniform();
    }

    // land-use: smooth surface cut at the proportion quantiles
    const VectorXd z = bump_field(rng, pts, spec.bbox, spec.landuse_bumps, spec.landuse_scale);
    std::vector<double> zv(z.data(), z.data() + n);
    std::array<double, 3> thresholds{};
    double cum = 0.0;
    for (int q = 0; q < 3; ++q) {
        cum += spec.proportions[static_cast<std::size_t>(q)];
        thresholds[static_cast<std::size_t>(q)] = percentile(zv, 100.0 * std::min(cum, 1.0));
    }
    std::vector<Landuse> landuse(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int cat = 0;
        for (double t : thresholds)
            if (z[i] >= t) ++cat;
        landuse[static_cast<std::size_t>(i)] = static_cast<Landuse>(std::min(cat, 3));
    }

    SimulationResult out;
    out.basis = generate_knots(spec.bbox, spec.basis_dims);
    const MatrixXd Phi = basis_matrix(pts, out.basis);
    const MatrixXd PhiI = interaction_basis(Phi, landuse);
    const Eigen::Index J = Phi.cols();

    VectorXd eta1(J), kappa(4 * J), alpha_j(J);
    for (Eigen::Index j = 0; j < J; ++j) eta1[j] = spec.eta1_sd * rng.normal();
    for (Eigen::Index j = 0; j < 4 * J; ++j) kappa[j] = spec.kappa_sd * rng.normal();

    MatrixXd ups(n, spec.K);
    for (int k = 0; k < spec.K; ++k)
        ups.col(k) = bump_field(rng, pts, spec.bbox, spec.coeff_bumps, spec.coeff_scale,
                                spec.coeff_amp[static_cast<std::size_t>(k)]);
    if (spec.coeff_noise_sd > 0.0)
        for (Eigen::Index i = 0; i < n; ++i)
            for (int k = 0; k < spec.K; ++k) ups(i, k) += spec.coeff_noise_sd * rng.normal();

    for (Eigen::Index j = 0; j < J; ++j) alpha_j[j] = spec.alpha_sd * rng.normal();

    VectorXd mu(n), nlv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto lu = static_cast<std::size_t>(landuse[static_cast<std::size_t>(i)]);
        mu[i] = spec.gamma[lu] + spec.trend_lon * pts[static_cast<std::size_t>(i)].lon +
                spec.trend_lat * pts[static_cast<std::size_t>(i)].lat;
        nlv[i] = spec.zeta[lu] + spec.vtrend_lon * pts[static_cast<std::size_t>(i)].lon +
                 spec.vtrend_lat * pts[static_cast<std::size_t>(i)].lat;
    }
    mu += Phi * eta1 + PhiI * kappa + ups * VectorXd::Map(spec.chi.data(), spec.K);
    nlv += Phi * alpha_j;

    out.sites.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Site& s = out.sites[static_cast<std::size_t>(i)];
        s.id = i;
        s.loc = pts[static_cast<std::size_t>(i)];
        s.landuse = landuse[static_cast<std::size_t>(i)];
        s.coeffs = ups.row(i).transpose();
        s.y = mu[i] + std::sqrt(safe_exp(-nlv[i], nullptr)) * rng.normal();
    }

    out.w_min = spec.w_min;
    out.w_max = spec.w_max;
    if (spec.emit_spectra) {
        const int W = spec.w_max - spec.w_min + 1;
        const MatrixXd B = spectral_curves(spec.K, W);
        VectorXd mean_curve(W);
        for (int w = 0; w < W; ++w) {
            const double t = W > 1 ? static_cast<double>(w) / (W - 1) : 0.0;
            mean_curve[w] = 0.4 + 0.2 * t - 0.1 * t * t;
        }
        out.spectra = (0.01 * ups * B).rowwise() + mean_curve.transpose();
    }

    auto& truth = out.truth;
    truth.beta1.resize(6 + spec.K);
    for (int c = 0; c < 4; ++c) truth.beta1[c] = spec.gamma[static_cast<std::size_t>(c)];
    truth.beta1[4] = spec.trend_lon;
    truth.beta1[5] = spec.trend_lat;
    for (int k = 0; k < spec.K; ++k) truth.beta1[6 + k] = spec.chi[static_cast<std::size_t>(k)];
    truth.eta1.resize(5 * J);
    truth.eta1 << eta1, kappa;
    truth.beta2.resize(6);
    for (int c = 0; c < 4; ++c) truth.beta2[c] = spec.zeta[static_cast<std::size_t>(c)];
    truth.beta2[4] = spec.vtrend_lon;
    truth.beta2[5] = spec.vtrend_lat;
    truth.eta2 = alpha_j;
    truth.mu = mu;
    truth.nlv = nlv;
    return out;
}

}  // namespace socmap
