#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "socmap/basis.hpp"
#include "socmap/gibbs.hpp"
#include "socmap/rng.hpp"
#include "socmap/types.hpp"

namespace socmap {

/// Plain-text categorical raster: 6-line header (ncols, nrows, xll, yll,
/// cellsize, nodata) then integer codes (0=C, 1=F, 2=W, 3=Oth, nodata=NA),
/// row-major with the top (northernmost) row first.
struct CategoricalRaster {
    int ncols = 0;
    int nrows = 0;
    double xll = 0.0;
    double yll = 0.0;
    double cellsize = 1.0;
    int nodata = -1;
    std::vector<int> codes;  // nrows * ncols, top row first

    int code_at(int row, int col) const { return codes[static_cast<std::size_t>(row) * ncols + col]; }
    Location center(int row, int col) const {
        return {xll + (col + 0.5) * cellsize, yll + (nrows - row - 0.5) * cellsize};
    }
    void validate() const;
};

struct GridCell {
    Location loc;
    Landuse landuse = Landuse::NotApplicable;
    std::optional<VectorXd> coeffs;
};

struct PredictionGrid {
    std::vector<GridCell> cells;
    double resolution = 0.0;  // cell size in coordinate units, 0 for free-form sites
};

struct CellSummary {
    Location loc;
    Landuse landuse = Landuse::NotApplicable;
    double mean = 0.0;
    double sd_log = 0.0;  // predictive sd on the log scale
    double lo95 = 0.0;
    double hi95 = 0.0;
    double exp_mean_log = 0.0;  // exp(mean of log draws)
    double mean_exp = 0.0;      // mean of exp(draws)
    int n_draws = 0;
};

/// Per-draw predictive output for a batch of sites; all matrices are
/// (draw count) x (site count).
struct PredictiveDraws {
    MatrixXd y;       // mu + sigma * z
    MatrixXd mu;
    MatrixXd sigma2;
};

/// Linear-interpolated empirical percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

/// Noise substream key for a prediction site: hashing the coordinate bytes
/// (rather than the site's position in the batch) keeps per-site draws
/// invariant under reordering and safe to generate in parallel.
std::uint64_t location_key(const Location& loc);

/// One y-draw per stored chain draw: y_t ~ N(mu_t(s), sigma2_t(s)), with the
/// moments rebuilt from the draw's parameter blocks and the site's design row.
VectorXd posterior_predictive(const PosteriorDraws& chain, const Site& site,
                              const BasisSet& basis, int model, Rng& rng,
                              long* exp_saturations = nullptr);

/// Batch version; noise for each site comes from
/// stream("prediction-noise", location_key(site)) of the given root seed.
PredictiveDraws predictive_draws(const PosteriorDraws& chain, const SiteTable& sites,
                                 const BasisSet& basis, int model, std::uint64_t seed,
                                 long* exp_saturations = nullptr);

/// Modal land-use aggregation over factor x factor blocks (top-left anchored;
/// partial edge blocks vote with the cells they have). NotApplicable cells are
/// excluded from the vote; all-NA blocks stay NA; ties go to the lowest
/// category code (C < F < W < Oth).
CategoricalRaster aggregate_landuse(const CategoricalRaster& fine, int factor);

/// Cells at raster cell centers; nodata cells carry Landuse::NotApplicable.
PredictionGrid grid_from_raster(const CategoricalRaster& raster);

/// Fills missing cell coefficients by 1-nearest-neighbor from the reference
/// sites, runs posterior_predictive per applicable cell, and summarizes with
/// mean, sd, and equal-tailed 95% empirical percentile bounds. NotApplicable
/// cells are skipped; output order follows grid order.
std::vector<CellSummary> predict_grid(const PosteriorDraws& chain, const PredictionGrid& grid,
                                      const SiteTable& reference_sites, const BasisSet& basis,
                                      int model, std::uint64_t seed);

/// Summary of one column of predictive draws (shared by predict_grid and the
/// CV scorer): mean, sd, percentile bounds, exp columns.
CellSummary summarize_draws(const Eigen::Ref<const VectorXd>& draws, double lo_pct = 2.5,
                            double hi_pct = 97.5);

}  // namespace socmap
