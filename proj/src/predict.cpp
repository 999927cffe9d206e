#include "socmap/predict.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "socmap/design.hpp"
#include "socmap/mlg.hpp"
#include "socmap/spectra.hpp"

namespace socmap {

namespace {

bool model_needs_coeffs(int model) { return model == 5 || model == 6; }

void check_chain_design(const PosteriorDraws& chain, const DesignSet& d) {
    if (chain.p1 != d.p1() || chain.r1 != d.r1() || chain.p2 != d.p2() || chain.r2 != d.r2())
        throw parameter_error(
            "posterior draws are incompatible with the model/basis design "
            "(block sizes " + std::to_string(chain.p1) + "/" + std::to_string(chain.r1) +
            "/" + std::to_string(chain.p2) + "/" + std::to_string(chain.r2) +
            " vs " + std::to_string(d.p1()) + "/" + std::to_string(d.r1()) +
            "/" + std::to_string(d.p2()) + "/" + std::to_string(d.r2()) + ")");
    if (chain.count() < 1) throw parameter_error("empty chain");
}

// (T x m) mean and -log variance surfaces for every draw/site pair.
void predictive_moments(const PosteriorDraws& chain, const DesignSet& d,
                        MatrixXd& mu, MatrixXd& nlv) {
    mu = chain.beta1() * d.X1.transpose();
    if (d.r1() > 0) mu.noalias() += chain.eta1() * d.Psi1.transpose();
    nlv = chain.beta2() * d.X2.transpose();
    if (d.r2() > 0) nlv.noalias() += chain.eta2() * d.Psi2.transpose();
}

}  // namespace

void CategoricalRaster::validate() const {
    if (ncols <= 0 || nrows <= 0) throw parameter_error("raster dimensions must be positive");
    if (!(cellsize > 0.0)) throw parameter_error("raster cellsize must be positive");
    if (codes.size() != static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows))
        throw data_error("raster code count does not match ncols * nrows");
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw parameter_error("percentile of empty vector");
    if (!(p >= 0.0 && p <= 100.0)) throw parameter_error("percentile level outside [0, 100]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::uint64_t location_key(const Location& loc) {
    std::uint64_t h = hash_bytes(&loc.lon, sizeof(loc.lon));
    return hash_bytes(&loc.lat, sizeof(loc.lat), h);
}

VectorXd posterior_predictive(const PosteriorDraws& chain, const Site& site,
                              const BasisSet& basis, int model, Rng& rng,
                              long* exp_saturations) {
    if (site.landuse == Landuse::NotApplicable)
        throw parameter_error("prediction site has no applicable land-use category");
    if (model_needs_coeffs(model) && !site.coeffs.has_value())
        throw data_error("spectral coefficients missing for a spectral-model prediction site");
    const DesignSet d = build_design(model, SiteTable{site}, basis);
    check_chain_design(chain, d);
    MatrixXd mu, nlv;
    predictive_moments(chain, d, mu, nlv);
    VectorXd out(chain.count());
    for (Eigen::Index t = 0; t < chain.count(); ++t) {
        const double s2 = safe_exp(-nlv(t, 0), exp_saturations);
        out[t] = mu(t, 0) + std::sqrt(s2) * rng.normal();
    }
    return out;
}

PredictiveDraws predictive_draws(const PosteriorDraws& chain, const SiteTable& sites,
                                 const BasisSet& basis, int model, std::uint64_t seed,
                                 long* exp_saturations) {
    for (const Site& s : sites) {
        if (s.landuse == Landuse::NotApplicable)
            throw parameter_error("prediction site has no applicable land-use category");
        if (model_needs_coeffs(model) && !s.coeffs.has_value())
            throw data_error("spectral coefficients missing for a spectral-model prediction site");
    }
    const DesignSet d = build_design(model, sites, basis);
    check_chain_design(chain, d);
    PredictiveDraws out;
    predictive_moments(chain, d, out.mu, out.sigma2);
    for (Eigen::Index t = 0; t < out.sigma2.rows(); ++t)
        for (Eigen::Index j = 0; j < out.sigma2.cols(); ++j)
            out.sigma2(t, j) = safe_exp(-out.sigma2(t, j), exp_saturations);
    out.y = out.mu;
    const Rng root(seed);
    for (Eigen::Index j = 0; j < out.y.cols(); ++j) {
        Rng noise = root.stream("prediction-noise", location_key(sites[j].loc));
        for (Eigen::Index t = 0; t < out.y.rows(); ++t)
            out.y(t, j) += std::sqrt(out.sigma2(t, j)) * noise.normal();
    }
    return out;
}

CategoricalRaster aggregate_landuse(const CategoricalRaster& fine, int factor) {
    if (factor < 1) throw parameter_error("aggregation factor must be >= 1");
    fine.validate();
    CategoricalRaster coarse;
    coarse.ncols = (fine.ncols + factor - 1) / factor;
    coarse.nrows = (fine.nrows + factor - 1) / factor;
    coarse.cellsize = fine.cellsize * factor;
    coarse.nodata = fine.nodata;
    coarse.xll = fine.xll;
    // blocks anchor at the top-left corner (rows are stored top first), so the
    // coarse lower-left drops when the row count is not divisible by factor
    coarse.yll = fine.yll + fine.nrows * fine.cellsize - coarse.nrows * coarse.cellsize;
    coarse.codes.assign(static_cast<std::size_t>(coarse.ncols) * coarse.nrows, coarse.nodata);
    for (int R = 0; R < coarse.nrows; ++R) {
        for (int C = 0; C < coarse.ncols; ++C) {
            int counts[kNumLanduse] = {0, 0, 0, 0};
            const int r_end = std::min((R + 1) * factor, fine.nrows);
            const int c_end = std::min((C + 1) * factor, fine.ncols);
            for (int r = R * factor; r < r_end; ++r)
                for (int c = C * factor; c < c_end; ++c) {
                    const int code = fine.code_at(r, c);
                    if (code >= 0 && code < kNumLanduse) ++counts[code];
                }
            int best = coarse.nodata, best_count = 0;
            for (int code = 0; code < kNumLanduse; ++code)
                if (counts[code] > best_count) {
                    best = code;
                    best_count = counts[code];
                }
            coarse.codes[static_cast<std::size_t>(R) * coarse.ncols + C] = best;
        }
    }
    return coarse;
}

PredictionGrid grid_from_raster(const CategoricalRaster& raster) {
    raster.validate();
    PredictionGrid grid;
    grid.resolution = raster.cellsize;
    grid.cells.reserve(raster.codes.size());
    for (int r = 0; r < raster.nrows; ++r)
        for (int c = 0; c < raster.ncols; ++c) {
            GridCell cell;
            cell.loc = raster.center(r, c);
            const int code = raster.code_at(r, c);
            cell.landuse = (code >= 0 && code < kNumLanduse) ? static_cast<Landuse>(code)
                                                             : Landuse::NotApplicable;
            grid.cells.push_back(std::move(cell));
        }
    return grid;
}

CellSummary summarize_draws(const Eigen::Ref<const VectorXd>& draws, double lo_pct,
                            double hi_pct) {
    const Eigen::Index T = draws.size();
    if (T < 1) throw parameter_error("summary of an empty draw vector");
    CellSummary s;
    s.n_draws = static_cast<int>(T);
    s.mean = draws.mean();
    s.sd_log = T > 1 ? std::sqrt((draws.array() - s.mean).square().sum() / double(T - 1)) : 0.0;
    std::vector<double> v(draws.data(), draws.data() + T);
    s.lo95 = percentile(v, lo_pct);
    s.hi95 = percentile(std::move(v), hi_pct);
    s.exp_mean_log = safe_exp(s.mean, nullptr);
    double acc = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) acc += safe_exp(draws[t], nullptr);
    s.mean_exp = acc / static_cast<double>(T);
    return s;
}

std::vector<CellSummary> predict_grid(const PosteriorDraws& chain, const PredictionGrid& grid,
                                      const SiteTable& reference_sites, const BasisSet& basis,
                                      int model, std::uint64_t seed) {
    SiteTable pred_sites;
    pred_sites.reserve(grid.cells.size());
    std::vector<Location> ref_locs;
    MatrixXd ref_coeffs;
    if (model_needs_coeffs(model)) {
        std::vector<const Site*> with_coeffs;
        for (const Site& s : reference_sites)
            if (s.coeffs.has_value()) with_coeffs.push_back(&s);
        if (!with_coeffs.empty()) {
            ref_locs.reserve(with_coeffs.size());
            ref_coeffs.resize(static_cast<Eigen::Index>(with_coeffs.size()),
                              with_coeffs.front()->coeffs->size());
            for (std::size_t i = 0; i < with_coeffs.size(); ++i) {
                ref_locs.push_back(with_coeffs[i]->loc);
                ref_coeffs.row(static_cast<Eigen::Index>(i)) = *with_coeffs[i]->coeffs;
            }
        }
    }
    for (const GridCell& cell : grid.cells) {
        if (cell.landuse == Landuse::NotApplicable) continue;
        Site s;
        s.id = static_cast<long>(pred_sites.size());
        s.loc = cell.loc;
        s.landuse = cell.landuse;
        if (cell.coeffs.has_value()) {
            s.coeffs = cell.coeffs;
        } else if (model_needs_coeffs(model)) {
            if (ref_locs.empty())
                throw data_error("no reference sites with spectral coefficients to fill the grid");
            s.coeffs = knn_predict_coeffs(cell.loc, ref_locs, ref_coeffs, 1);
        }
        pred_sites.push_back(std::move(s));
    }
    std::vector<CellSummary> out;
    if (pred_sites.empty()) return out;
    const PredictiveDraws pd = predictive_draws(chain, pred_sites, basis, model, seed);
    out.reserve(pred_sites.size());
    for (Eigen::Index j = 0; j < pd.y.cols(); ++j) {
        CellSummary s = summarize_draws(pd.y.col(j));
        s.loc = pred_sites[static_cast<std::size_t>(j)].loc;
        s.landuse = pred_sites[static_cast<std::size_t>(j)].landuse;
        out.push_back(s);
    }
    return out;
}

}  // namespace socmap
