// socmap: simulate, fit, predict, and score the heteroscedastic spatial
// soil-carbon model from the command line. All outputs are plain text and
// byte-identical across reruns with the same config and seed.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "socmap/design.hpp"
#include "socmap/gibbs.hpp"
#include "socmap/io.hpp"
#include "socmap/predict.hpp"
#include "socmap/scoring.hpp"
#include "socmap/simulate.hpp"
#include "socmap/spectra.hpp"

namespace {

using namespace socmap;

constexpr const char* kVersion = "socmap 1.0.0";

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void attach_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "config file (key = value sections)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "root seed (overrides config)");
    sub->add_option("--threads", opts.threads, "worker thread cap (overrides config)");
    sub->add_option("--out", opts.out_dir, "output directory");
}

struct Run {
    Config config;  // empty sections when no --config given
    std::string out_dir;
    std::uint64_t seed;
    int threads;
    std::vector<std::pair<std::string, std::string>> manifest;

    std::string out_path(const std::string& name) const {
        return (std::filesystem::path(out_dir) / name).string();
    }
    void record(const std::string& name) {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(file_hash(out_path(name))));
        manifest.emplace_back("output." + name, std::string("fnv1a64:") + hex);
    }
    void finish(const std::string& subcommand) {
        manifest.emplace_back("tool", kVersion);
        manifest.emplace_back("subcommand", subcommand);
        manifest.emplace_back("seed", std::to_string(seed));
        write_manifest(out_path("manifest.txt"), manifest);
    }
};

Run make_run(const CommonOpts& opts) {
    Run run;
    if (!opts.config_path.empty()) run.config = read_config(opts.config_path);
    run.out_dir = opts.out_dir;
    std::filesystem::create_directories(run.out_dir);
    run.seed = opts.seed.value_or(
        static_cast<std::uint64_t>(run.config.get_long("run", "seed", 0)));
    run.threads = opts.threads.value_or(
        static_cast<int>(run.config.get_long("run", "threads", 1)));
    if (run.threads < 1) throw parameter_error("--threads must be >= 1");
    return run;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& where) {
    std::istringstream ss(text);
    std::vector<double> out;
    std::string token;
    while (ss >> token) {
        char* end = nullptr;
        out.push_back(std::strtod(token.c_str(), &end));
        if (end != token.c_str() + token.size())
            throw data_error(where + ": cannot parse number '" + token + "'");
    }
    return out;
}

std::vector<GridDims> parse_resolutions(const std::string& text, const std::string& where) {
    std::istringstream ss(text);
    std::vector<GridDims> out;
    std::string token;
    while (ss >> token) {
        const auto x = token.find('x');
        if (x == std::string::npos)
            throw data_error(where + ": resolution '" + token + "' is not of the form NxM");
        out.emplace_back(std::stoi(token.substr(0, x)), std::stoi(token.substr(x + 1)));
    }
    if (out.empty()) throw data_error(where + ": empty resolution list");
    return out;
}

Bbox data_bbox(const SiteTable& sites) {
    if (sites.empty()) throw data_error("no sites to derive a bbox from");
    Bbox box{sites[0].loc.lon, sites[0].loc.lat, sites[0].loc.lon, sites[0].loc.lat};
    for (const Site& s : sites) {
        box.lon_min = std::min(box.lon_min, s.loc.lon);
        box.lat_min = std::min(box.lat_min, s.loc.lat);
        box.lon_max = std::max(box.lon_max, s.loc.lon);
        box.lat_max = std::max(box.lat_max, s.loc.lat);
    }
    return box;
}

int parse_model(const Config& config) {
    const long model = config.get_long("run", "model", 0);
    if (model < 1 || model > 6)
        throw data_error(config.path + ": [run] model must be 1..6");
    return static_cast<int>(model);
}

Hyperparams hyper_from(const Config& config) {
    Hyperparams h;
    h.alpha_mlg = config.get_double("hyper", "alpha", h.alpha_mlg);
    h.sigma2_beta1 = config.get_double("hyper", "sigma2_beta1", h.sigma2_beta1);
    h.sigma2_beta2 = config.get_double("hyper", "sigma2_beta2", h.sigma2_beta2);
    h.a = config.get_double("hyper", "a", h.a);
    h.b = config.get_double("hyper", "b", h.b);
    h.w = config.get_double("hyper", "w", h.w);
    h.p = config.get_double("hyper", "p", h.p);
    h.validate();
    return h;
}

SamplerConfig sampler_from(const Config& config, std::uint64_t seed) {
    SamplerConfig s;
    s.n_iter = static_cast<int>(config.get_long("sampler", "iterations", s.n_iter));
    s.burn_in = static_cast<int>(config.get_long("sampler", "burn_in", s.burn_in));
    s.thin = static_cast<int>(config.get_long("sampler", "thin", s.thin));
    s.seed = seed;
    s.validate();
    return s;
}

BasisSet basis_from(const Config& config, const SiteTable& sites) {
    Bbox box;
    if (config.has("basis", "bbox")) {
        const auto v = parse_double_list(config.require("basis", "bbox"), "[basis] bbox");
        if (v.size() != 4) throw data_error("[basis] bbox needs 4 numbers");
        box = Bbox{v[0], v[1], v[2], v[3]};
    } else {
        box = data_bbox(sites);
    }
    const auto dims = parse_resolutions(config.get("basis", "resolutions", "3x2 10x7"),
                                        "[basis] resolutions");
    return generate_knots(box, dims);
}

// Attach spectral coefficients: an explicit coefficient file wins, otherwise
// PCA scores of the spectra file. Required for models 5 and 6.
void attach_coeffs(Run& run, SiteTable& sites, bool required) {
    const std::string coeffs_path = run.config.get("data", "coeffs", "");
    const std::string spectra_path = run.config.get("data", "spectra", "");
    if (!coeffs_path.empty()) {
        read_coeffs_csv(coeffs_path, sites);
    } else if (!spectra_path.empty()) {
        const SpectraFile file = read_spectra_csv(spectra_path);
        const int K = static_cast<int>(run.config.get_long("pca", "k", 3));
        const SpectralBasis basis = fit_pca(file.reflectance, K, file.w_min, file.w_max);
        if (basis.variance_warning)
            std::cerr << "warning: first " << K << " components explain only "
                      << basis.cumulative_explained() << " of spectral variance\n";
        std::map<long, Eigen::Index> row_of;
        for (std::size_t i = 0; i < file.site_ids.size(); ++i)
            row_of[file.site_ids[i]] = static_cast<Eigen::Index>(i);
        for (Site& s : sites) {
            const auto it = row_of.find(s.id);
            if (it == row_of.end()) {
                if (required)
                    throw data_error("no spectrum for site_id " + std::to_string(s.id));
                continue;
            }
            s.coeffs = project(file.reflectance.row(it->second).transpose(), basis);
        }
    } else if (required) {
        throw data_error(run.config.path +
                         ": models 5/6 need [data] coeffs or [data] spectra");
    }
}

int cmd_simulate(const CommonOpts& opts) {
    Run run = make_run(opts);
    SyntheticSpec spec;
    if (run.config.get("simulate", "preset", "") == "recovery") spec = recovery_benchmark_spec();
    const Config& c = run.config;
    spec.n = c.get_long("simulate", "n", spec.n);
    if (c.has("simulate", "bbox")) {
        const auto v = parse_double_list(c.require("simulate", "bbox"), "[simulate] bbox");
        if (v.size() != 4) throw data_error("[simulate] bbox needs 4 numbers");
        spec.bbox = Bbox{v[0], v[1], v[2], v[3]};
    }
    if (c.has("simulate", "proportions")) {
        const auto v = parse_double_list(c.require("simulate", "proportions"),
                                         "[simulate] proportions");
        if (v.size() != 4) throw data_error("[simulate] proportions needs 4 numbers");
        std::copy(v.begin(), v.end(), spec.proportions.begin());
    }
    spec.landuse_bumps = static_cast<int>(c.get_long("simulate", "landuse_bumps", spec.landuse_bumps));
    spec.landuse_scale = c.get_double("simulate", "landuse_scale", spec.landuse_scale);
    if (c.has("simulate", "resolutions"))
        spec.basis_dims = parse_resolutions(c.require("simulate", "resolutions"),
                                            "[simulate] resolutions");
    spec.K = static_cast<int>(c.get_long("simulate", "k", spec.K));
    auto copy4 = [&](const char* key, std::array<double, 4>& dst) {
        if (!c.has("simulate", key)) return;
        const auto v = parse_double_list(c.require("simulate", key), key);
        if (v.size() != 4) throw data_error(std::string("[simulate] ") + key + " needs 4 numbers");
        std::copy(v.begin(), v.end(), dst.begin());
    };
    copy4("gamma", spec.gamma);
    copy4("zeta", spec.zeta);
    spec.trend_lon = c.get_double("simulate", "trend_lon", spec.trend_lon);
    spec.trend_lat = c.get_double("simulate", "trend_lat", spec.trend_lat);
    spec.eta1_sd = c.get_double("simulate", "eta1_sd", spec.eta1_sd);
    spec.kappa_sd = c.get_double("simulate", "kappa_sd", spec.kappa_sd);
    if (c.has("simulate", "chi"))
        spec.chi = parse_double_list(c.require("simulate", "chi"), "[simulate] chi");
    spec.coeff_bumps = static_cast<int>(c.get_long("simulate", "coeff_bumps", spec.coeff_bumps));
    spec.coeff_scale = c.get_double("simulate", "coeff_scale", spec.coeff_scale);
    if (c.has("simulate", "coeff_amp"))
        spec.coeff_amp = parse_double_list(c.require("simulate", "coeff_amp"),
                                           "[simulate] coeff_amp");
    spec.coeff_noise_sd = c.get_double("simulate", "coeff_noise_sd", spec.coeff_noise_sd);
    spec.vtrend_lon = c.get_double("simulate", "vtrend_lon", spec.vtrend_lon);
    spec.vtrend_lat = c.get_double("simulate", "vtrend_lat", spec.vtrend_lat);
    spec.alpha_sd = c.get_double("simulate", "alpha_sd", spec.alpha_sd);
    spec.w_min = static_cast<int>(c.get_long("simulate", "w_min", spec.w_min));
    spec.w_max = static_cast<int>(c.get_long("simulate", "w_max", spec.w_max));
    spec.emit_spectra = c.get_long("simulate", "emit_spectra", spec.emit_spectra ? 1 : 0) != 0;
    spec.seed = run.seed;

    const SimulationResult sim = simulate(spec);
    write_sites_csv(run.out_path("sites.csv"), sim.sites);
    run.record("sites.csv");
    write_coeffs_csv(run.out_path("coeffs.csv"), sim.sites);
    run.record("coeffs.csv");
    if (spec.emit_spectra) {
        std::vector<long> ids;
        ids.reserve(sim.sites.size());
        for (const Site& s : sim.sites) ids.push_back(s.id);
        write_spectra_csv(run.out_path("spectra.csv"), ids, sim.spectra, sim.w_min, sim.w_max);
        run.record("spectra.csv");
    }
    write_basis_table(run.out_path("basis.csv"), sim.basis);
    run.record("basis.csv");
    write_truth_params_csv(run.out_path("truth_params.csv"), sim.truth);
    run.record("truth_params.csv");
    write_truth_surfaces_csv(run.out_path("truth_surfaces.csv"), sim.sites, sim.truth);
    run.record("truth_surfaces.csv");
    run.manifest.emplace_back("n_sites", std::to_string(sim.sites.size()));
    run.finish("simulate");
    return 0;
}

void write_timing(const Run& run, const ChainDiagnostics& diag) {
    static const char* names[6] = {"beta1", "eta1", "beta2", "eta2",
                                   "sigma2_eta1", "inv_sigma_eta2"};
    std::string out;
    for (int i = 0; i < 6; ++i)
        out += std::string(names[i]) + "_seconds = " + format_double(diag.timers.seconds[i]) +
               '\n';
    out += "total_seconds = " + format_double(diag.seconds_total) + '\n';
    atomic_write(run.out_path("timing.txt"), out);
}

int cmd_fit(const CommonOpts& opts) {
    Run run = make_run(opts);
    const int model = parse_model(run.config);
    SiteTable sites = read_sites_csv(run.config.require("data", "sites"));
    attach_coeffs(run, sites, model == 5 || model == 6);
    const BasisSet basis = basis_from(run.config, sites);
    const DesignSet design = build_design(model, sites, basis);
    const Hyperparams hyper = hyper_from(run.config);
    const SamplerConfig sampler = sampler_from(run.config, run.seed);

    const FitResult fit = run_chain(responses_of(sites), design, hyper, sampler);

    write_draws_csv(run.out_path("draws.csv"), fit.draws);
    run.record("draws.csv");
    write_diagnostics_csv(run.out_path("diagnostics.csv"), fit.diagnostics);
    run.record("diagnostics.csv");
    write_basis_table(run.out_path("basis.csv"), basis);
    run.record("basis.csv");
    write_timing(run, fit.diagnostics);
    run.manifest.emplace_back("model", std::to_string(model));
    run.manifest.emplace_back("n_sites", std::to_string(sites.size()));
    run.manifest.emplace_back("basis_size", std::to_string(basis.size()));
    run.manifest.emplace_back("exp_saturations",
                              std::to_string(fit.diagnostics.exp_saturations));
    run.manifest.emplace_back("zero_basis_sites",
                              std::to_string(fit.diagnostics.zero_basis_sites.size()));
    run.finish("fit");
    return 0;
}

int cmd_predict(const CommonOpts& opts, const std::string& draws_flag,
                const std::string& grid_flag, const std::string& basis_flag) {
    Run run = make_run(opts);
    const int model = parse_model(run.config);
    const std::string draws_path =
        !draws_flag.empty() ? draws_flag : run.config.require("predict", "draws");
    const std::string grid_path =
        !grid_flag.empty() ? grid_flag : run.config.require("predict", "raster");
    const std::string basis_path =
        !basis_flag.empty() ? basis_flag : run.config.require("predict", "basis");

    const PosteriorDraws chain = read_draws_csv(draws_path);
    const BasisSet basis = read_basis_table(basis_path);
    const PredictionGrid grid = grid_from_raster(read_raster(grid_path));
    SiteTable reference = read_sites_csv(run.config.require("data", "sites"));
    attach_coeffs(run, reference, false);

    const auto cells = predict_grid(chain, grid, reference, basis, model, run.seed);
    write_prediction_csv(run.out_path("prediction.csv"), cells);
    run.record("prediction.csv");
    run.manifest.emplace_back("model", std::to_string(model));
    run.manifest.emplace_back("n_cells", std::to_string(cells.size()));
    run.finish("predict");
    return 0;
}

int cmd_cv(const CommonOpts& opts) {
    Run run = make_run(opts);
    const int model = parse_model(run.config);
    SiteTable sites = read_sites_csv(run.config.require("data", "sites"));
    attach_coeffs(run, sites, model == 5 || model == 6);
    const BasisSet basis = basis_from(run.config, sites);
    const Hyperparams hyper = hyper_from(run.config);
    const SamplerConfig sampler = sampler_from(run.config, run.seed);
    const int k = static_cast<int>(run.config.get_long("cv", "folds", 5));
    const std::string mode_name = run.config.get("cv", "coeff_mode", "known");
    CoeffMode mode;
    if (mode_name == "known") mode = CoeffMode::Known;
    else if (mode_name == "knn") mode = CoeffMode::Knn;
    else throw data_error(run.config.path + ": [cv] coeff_mode must be known or knn");

    const MetricsRow row =
        cross_validate(model, sites, basis, hyper, sampler, k, run.seed, mode, run.threads);
    write_metrics_csv(run.out_path("metrics.csv"), {row});
    run.record("metrics.csv");
    run.manifest.emplace_back("model", std::to_string(model));
    run.manifest.emplace_back("folds", std::to_string(k));
    run.manifest.emplace_back("coeff_mode", mode_name);
    run.finish("cv");
    return 0;
}

int cmd_pca(const CommonOpts& opts, const std::string& spectra_flag, int k_flag) {
    Run run = make_run(opts);
    const std::string spectra_path =
        !spectra_flag.empty() ? spectra_flag : run.config.require("data", "spectra");
    const int K = k_flag > 0 ? k_flag : static_cast<int>(run.config.get_long("pca", "k", 3));
    const SpectraFile file = read_spectra_csv(spectra_path);
    const SpectralBasis basis = fit_pca(file.reflectance, K, file.w_min, file.w_max);
    if (basis.variance_warning)
        std::cerr << "warning: first " << K << " components explain only "
                  << basis.cumulative_explained() << " of spectral variance\n";
    write_spectral_basis_csv(run.out_path("spectral_basis.csv"), basis);
    run.record("spectral_basis.csv");
    std::string out = "site_id";
    for (int k = 1; k <= K; ++k) out += ",v" + std::to_string(k);
    out += '\n';
    for (std::size_t i = 0; i < file.site_ids.size(); ++i) {
        const VectorXd v =
            project(file.reflectance.row(static_cast<Eigen::Index>(i)).transpose(), basis);
        out += std::to_string(file.site_ids[i]);
        for (Eigen::Index k = 0; k < v.size(); ++k) out += ',' + format_double(v[k]);
        out += '\n';
    }
    atomic_write(run.out_path("coeffs.csv"), out);
    run.record("coeffs.csv");
    run.manifest.emplace_back("k", std::to_string(K));
    run.manifest.emplace_back("variance_warning", basis.variance_warning ? "1" : "0");
    run.finish("pca");
    return 0;
}

int cmd_semivariogram(const CommonOpts& opts, const std::string& sites_flag, int bins,
                      double max_dist, bool by_category) {
    Run run = make_run(opts);
    const std::string sites_path =
        !sites_flag.empty() ? sites_flag : run.config.require("data", "sites");
    const SiteTable sites = read_sites_csv(sites_path);
    const auto tables =
        empirical_semivariogram(sites, responses_of(sites), bins, max_dist, by_category);
    write_semivariogram_csv(run.out_path("semivariogram.csv"), tables);
    run.record("semivariogram.csv");
    run.manifest.emplace_back("bins", std::to_string(bins));
    run.finish("semivariogram");
    return 0;
}

int cmd_aggregate(const CommonOpts& opts, const std::string& raster_flag, int factor) {
    Run run = make_run(opts);
    const std::string raster_path =
        !raster_flag.empty() ? raster_flag : run.config.require("predict", "raster");
    const CategoricalRaster coarse = aggregate_landuse(read_raster(raster_path), factor);
    write_raster(run.out_path("aggregated.txt"), coarse);
    run.record("aggregated.txt");
    run.manifest.emplace_back("factor", std::to_string(factor));
    run.finish("aggregate");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conjugate Bayesian heteroscedastic spatial model for log-SOC"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonOpts sim_opts, fit_opts, pred_opts, cv_opts, pca_opts, semiv_opts, agg_opts;
    attach_common(app.add_subcommand("simulate", "generate a synthetic data set"), sim_opts);
    attach_common(app.add_subcommand("fit", "run the Gibbs sampler"), fit_opts);

    auto* pred = app.add_subcommand("predict", "posterior predictive maps over a raster");
    attach_common(pred, pred_opts);
    std::string pred_draws, pred_grid, pred_basis;
    pred->add_option("--draws", pred_draws, "posterior draws CSV");
    pred->add_option("--grid", pred_grid, "land-use raster");
    pred->add_option("--basis", pred_basis, "basis knot table");

    attach_common(app.add_subcommand("cv", "k-fold cross-validation metrics"), cv_opts);

    auto* pca = app.add_subcommand("pca", "spectral PCA basis and coefficients");
    attach_common(pca, pca_opts);
    std::string pca_spectra;
    int pca_k = 0;
    pca->add_option("--spectra", pca_spectra, "spectra CSV");
    pca->add_option("--k", pca_k, "number of components");

    auto* semiv = app.add_subcommand("semivariogram", "empirical semivariogram table");
    attach_common(semiv, semiv_opts);
    std::string semiv_sites;
    int semiv_bins = 15;
    double semiv_max_dist = 0.0;
    bool semiv_by_cat = false;
    semiv->add_option("--sites", semiv_sites, "sites CSV");
    semiv->add_option("--bins", semiv_bins, "number of distance bins");
    semiv->add_option("--max-dist", semiv_max_dist,
                      "largest pair distance (0 = half the maximum)");
    semiv->add_flag("--by-category", semiv_by_cat, "one table per land-use category");

    auto* agg = app.add_subcommand("aggregate", "modal land-use aggregation");
    attach_common(agg, agg_opts);
    std::string agg_raster;
    int agg_factor = 1;
    agg->add_option("--raster", agg_raster, "fine raster");
    agg->add_option("--factor", agg_factor, "block size")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_opts);
        if (app.got_subcommand("fit")) return cmd_fit(fit_opts);
        if (app.got_subcommand("predict"))
            return cmd_predict(pred_opts, pred_draws, pred_grid, pred_basis);
        if (app.got_subcommand("cv")) return cmd_cv(cv_opts);
        if (app.got_subcommand("pca")) return cmd_pca(pca_opts, pca_spectra, pca_k);
        if (app.got_subcommand("semivariogram"))
            return cmd_semivariogram(semiv_opts, semiv_sites, semiv_bins, semiv_max_dist,
                                     semiv_by_cat);
        if (app.got_subcommand("aggregate")) return cmd_aggregate(agg_opts, agg_raster, agg_factor);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
