#include "socmap/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "socmap/predict.hpp"
#include "socmap/rng.hpp"
#include "socmap/spectra.hpp"

namespace socmap {

namespace {

void check_lengths(const VectorXd& a, const VectorXd& b, const char* what) {
    if (a.size() != b.size()) throw parameter_error(std::string(what) + ": length mismatch");
    if (a.size() == 0) throw parameter_error(std::string(what) + ": empty input");
}

void check_bounds(const VectorXd& lo, const VectorXd& hi, const char* what) {
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (lo[i] > hi[i]) throw parameter_error(std::string(what) + ": crossed interval bounds");
}

}  // namespace

double mse(const VectorXd& y, const VectorXd& yhat) {
    check_lengths(y, yhat, "mse");
    return (y - yhat).squaredNorm() / static_cast<double>(y.size());
}

double msev(const VectorXd& y, const VectorXd& yhat, const VectorXd& tau2hat) {
    check_lengths(y, yhat, "msev");
    check_lengths(y, tau2hat, "msev");
    const Eigen::ArrayXd sq = (y - yhat).array().square();
    return (sq - tau2hat.array()).square().sum() / static_cast<double>(y.size());
}

double coverage(const VectorXd& y, const VectorXd& lo, const VectorXd& hi) {
    check_lengths(y, lo, "coverage");
    check_lengths(y, hi, "coverage");
    check_bounds(lo, hi, "coverage");
    Eigen::Index inside = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] >= lo[i] && y[i] <= hi[i]) ++inside;
    return static_cast<double>(inside) / static_cast<double>(y.size());
}

double interval_score(const VectorXd& y, const VectorXd& lo, const VectorXd& hi,
                      double level_alpha) {
    check_lengths(y, lo, "interval_score");
    check_lengths(y, hi, "interval_score");
    check_bounds(lo, hi, "interval_score");
    if (!(level_alpha > 0.0 && level_alpha < 1.0))
        throw parameter_error("interval_score: level_alpha outside (0, 1)");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double s = hi[i] - lo[i];
        if (y[i] < lo[i]) s += (2.0 / level_alpha) * (lo[i] - y[i]);
        if (y[i] > hi[i]) s += (2.0 / level_alpha) * (y[i] - hi[i]);
        acc += s;
    }
    return acc / static_cast<double>(y.size());
}

double energy_score(const VectorXd& y, const MatrixXd& predictive_draws) {
    const Eigen::Index T = predictive_draws.rows();
    if (T < 2) throw parameter_error("energy_score: need at least 2 predictive draws");
    if (predictive_draws.cols() != y.size())
        throw parameter_error("energy_score: draw dimension does not match y");
    double to_obs = 0.0;
    for (Eigen::Index t = 0; t < T; ++t)
        to_obs += (predictive_draws.row(t).transpose() - y).norm();
    double between = 0.0;
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index u = 0; u < T; ++u)
            between += (predictive_draws.row(t) - predictive_draws.row(u)).norm();
    const double Td = static_cast<double>(T);
    return to_obs / Td - between / (2.0 * Td * Td);
}

FoldAssignment kfold_split(Eigen::Index n, int k, std::uint64_t seed) {
    if (k < 1) throw parameter_error("kfold_split: k must be >= 1");
    if (n < k) throw parameter_error("kfold_split: fewer sites than folds");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng = Rng(seed).stream("cv-fold");
    for (Eigen::Index i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<Eigen::Index> u(0, i);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(u(rng.engine()))]);
    }
    FoldAssignment out;
    out.k = k;
    out.fold.assign(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i)
        out.fold[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] =
            static_cast<int>(i % k);
    return out;
}

namespace {

struct FoldScore {
    VectorXd y, yhat, tau2, lo, hi;
    double es = 0.0;
};

FoldScore score_fold(int model, const SiteTable& sites, const FoldAssignment& folds, int f,
                     const BasisSet& basis, const Hyperparams& hyper,
                     const SamplerConfig& base_config, std::uint64_t seed, CoeffMode mode) {
    SiteTable train, test;
    for (std::size_t i = 0; i < sites.size(); ++i)
        (folds.fold[i] == f ? test : train).push_back(sites[i]);
    if (train.empty() || test.empty()) throw data_error("cross_validate: empty fold");

    const bool spectral = (model == 5 || model == 6);
    if (spectral && mode == CoeffMode::Knn) {
        std::vector<Location> ref_locs;
        std::vector<Eigen::Index> ref_rows;
        for (std::size_t i = 0; i < train.size(); ++i)
            if (train[i].coeffs.has_value()) {
                ref_locs.push_back(train[i].loc);
                ref_rows.push_back(static_cast<Eigen::Index>(i));
            }
        if (ref_locs.empty())
            throw data_error("cross_validate: no training coefficients for knn mode");
        MatrixXd ref_coeffs(static_cast<Eigen::Index>(ref_rows.size()),
                            train[static_cast<std::size_t>(ref_rows.front())].coeffs->size());
        for (std::size_t i = 0; i < ref_rows.size(); ++i)
            ref_coeffs.row(static_cast<Eigen::Index>(i)) =
                *train[static_cast<std::size_t>(ref_rows[i])].coeffs;
        for (Site& s : test) s.coeffs = knn_predict_coeffs(s.loc, ref_locs, ref_coeffs, 1);
    }

    const DesignSet d_train = build_design(model, train, basis);
    SamplerConfig config = base_config;
    config.seed = Rng(seed).stream("fit", static_cast<std::uint64_t>(f)).seed();
    const FitResult fit = run_chain(responses_of(train), d_train, hyper, config);

    const PredictiveDraws pd = predictive_draws(fit.draws, test, basis, model, seed);
    FoldScore out;
    out.y = responses_of(test);
    const Eigen::Index m = pd.y.cols();
    out.yhat.resize(m);
    out.tau2.resize(m);
    out.lo.resize(m);
    out.hi.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        out.yhat[j] = pd.y.col(j).mean();
        out.tau2[j] = pd.sigma2.col(j).mean();
        std::vector<double> col(pd.y.col(j).data(), pd.y.col(j).data() + pd.y.rows());
        out.lo[j] = percentile(col, 2.5);
        out.hi[j] = percentile(std::move(col), 97.5);
    }
    out.es = energy_score(out.y, pd.y);
    return out;
}

}  // namespace

MetricsRow cross_validate(int model, const SiteTable& sites, const BasisSet& basis,
                          const Hyperparams& hyper, const SamplerConfig& sampler_config,
                          int k, std::uint64_t seed, CoeffMode coeff_mode, int threads) {
    const FoldAssignment folds = kfold_split(static_cast<Eigen::Index>(sites.size()), k, seed);
    std::vector<FoldScore> scores(static_cast<std::size_t>(k));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int f = next.fetch_add(1);
            if (f >= k) return;
            try {
                scores[static_cast<std::size_t>(f)] = score_fold(
                    model, sites, folds, f, basis, hyper, sampler_config, seed, coeff_mode);
            } catch (...) {
                errors[static_cast<std::size_t>(f)] = std::current_exception();
            }
        }
    };
    const int n_workers = std::max(1, std::min(threads, k));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);

    Eigen::Index total = 0;
    for (const FoldScore& s : scores) total += s.y.size();
    VectorXd y(total), yhat(total), tau2(total), lo(total), hi(total);
    Eigen::Index at = 0;
    double es_sum = 0.0;
    for (const FoldScore& s : scores) {
        const Eigen::Index m = s.y.size();
        y.segment(at, m) = s.y;
        yhat.segment(at, m) = s.yhat;
        tau2.segment(at, m) = s.tau2;
        lo.segment(at, m) = s.lo;
        hi.segment(at, m) = s.hi;
        at += m;
        es_sum += s.es;
    }
    MetricsRow row;
    row.model = model;
    row.mse = mse(y, yhat);
    row.msev = msev(y, yhat, tau2);
    row.cr = coverage(y, lo, hi);
    row.is_avg = interval_score(y, lo, hi);
    row.es = es_sum / static_cast<double>(k);
    return row;
}

std::vector<SemivariogramTable> empirical_semivariogram(const SiteTable& sites,
                                                        const VectorXd& y, int n_bins,
                                                        double max_dist, bool by_category) {
    if (n_bins < 1) throw parameter_error("semivariogram: n_bins must be >= 1");
    if (static_cast<Eigen::Index>(sites.size()) != y.size())
        throw parameter_error("semivariogram: y length does not match sites");
    if (sites.size() < 2) throw data_error("semivariogram: need at least 2 sites");

    if (max_dist <= 0.0) {
        double dmax = 0.0;
        for (std::size_t i = 0; i < sites.size(); ++i)
            for (std::size_t j = i + 1; j < sites.size(); ++j)
                dmax = std::max(dmax, distance(sites[i].loc, sites[j].loc));
        max_dist = 0.5 * dmax;
        if (max_dist <= 0.0) throw data_error("semivariogram: all sites coincide");
    }
    const double width = max_dist / n_bins;

    std::map<int, std::vector<std::size_t>> groups;
    if (by_category) {
        for (std::size_t i = 0; i < sites.size(); ++i)
            if (sites[i].landuse != Landuse::NotApplicable)
                groups[static_cast<int>(sites[i].landuse)].push_back(i);
        for (const auto& [cat, members] : groups)
            if (members.size() < 2)
                throw data_error(std::string("semivariogram: fewer than 2 sites in category ") +
                                 landuse_name(static_cast<Landuse>(cat)));
    } else {
        std::vector<std::size_t> all(sites.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        groups.emplace(-1, std::move(all));
    }

    std::vector<SemivariogramTable> tables;
    for (const auto& [cat, members] : groups) {
        SemivariogramTable table;
        table.category = cat;
        table.bins.resize(static_cast<std::size_t>(n_bins));
        std::vector<double> sums(static_cast<std::size_t>(n_bins), 0.0);
        for (int b = 0; b < n_bins; ++b) table.bins[static_cast<std::size_t>(b)].center = (b + 0.5) * width;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                const std::size_t i = members[a], j = members[b];
                const double d = distance(sites[i].loc, sites[j].loc);
                if (d > max_dist) continue;
                const int bin = std::min(static_cast<int>(d / width), n_bins - 1);
                const double diff = y[static_cast<Eigen::Index>(i)] - y[static_cast<Eigen::Index>(j)];
                sums[static_cast<std::size_t>(bin)] += diff * diff;
                ++table.bins[static_cast<std::size_t>(bin)].pairs;
            }
        for (int b = 0; b < n_bins; ++b) {
            auto& bin = table.bins[static_cast<std::size_t>(b)];
            bin.semivariance = bin.pairs > 0
                                   ? sums[static_cast<std::size_t>(b)] / (2.0 * static_cast<double>(bin.pairs))
                                   : std::numeric_limits<double>::quiet_NaN();
        }
        tables.push_back(std::move(table));
    }
    return tables;
}

}  // namespace socmap
