#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "socmap/basis.hpp"
#include "socmap/gibbs.hpp"
#include "socmap/predict.hpp"
#include "socmap/scoring.hpp"
#include "socmap/simulate.hpp"
#include "socmap/spectra.hpp"
#include "socmap/types.hpp"

namespace socmap {

/// Doubles are written with enough digits to round-trip exactly, so every
/// writer/reader pair is lossless and reruns are byte-identical.
std::string format_double(double v);

/// Write-to-temp then rename, so partial files never appear under the
/// final name.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);
std::uint64_t file_hash(const std::string& path);

// sites CSV: site_id, lon, lat, landuse, y (y may be blank)
void write_sites_csv(const std::string& path, const SiteTable& sites);
SiteTable read_sites_csv(const std::string& path);

// coefficient CSV: site_id, v1..vK; reader merges into the table by site_id
void write_coeffs_csv(const std::string& path, const SiteTable& sites);
void read_coeffs_csv(const std::string& path, SiteTable& sites);

// spectra CSV: site_id, w_min, w_max, r1..rW (uniform 1 nm grid)
struct SpectraFile {
    std::vector<long> site_ids;
    MatrixXd reflectance;  // one row per site
    int w_min = 0, w_max = 0;
};
void write_spectra_csv(const std::string& path, const std::vector<long>& site_ids,
                       const MatrixXd& reflectance, int w_min, int w_max);
SpectraFile read_spectra_csv(const std::string& path);

// posterior draws CSV: iteration, then one labeled column per parameter
void write_draws_csv(const std::string& path, const PosteriorDraws& draws);
PosteriorDraws read_draws_csv(const std::string& path);

// diagnostics CSV: parameter, rhat, ess
void write_diagnostics_csv(const std::string& path, const ChainDiagnostics& diag);

// metrics CSV: model, mse, msev, cr, is, es
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

// semivariogram CSV: category, bin_center, semivariance, pairs
// (semivariance blank for empty bins)
void write_semivariogram_csv(const std::string& path,
                             const std::vector<SemivariogramTable>& tables);

// prediction CSV: lon, lat, landuse, mean, sd_log, lo95, hi95,
//                 exp_mean_log, mean_exp
void write_prediction_csv(const std::string& path, const std::vector<CellSummary>& cells);

// categorical raster: 6 header lines (ncols, nrows, xll, yll, cellsize,
// nodata), then one row of integer codes per line, top row first
void write_raster(const std::string& path, const CategoricalRaster& raster);
CategoricalRaster read_raster(const std::string& path);

// basis knot table CSV: lon, lat, R, resolution_id
void write_basis_table(const std::string& path, const BasisSet& basis);
BasisSet read_basis_table(const std::string& path);

// spectral basis CSV: component (0 = mean curve), w_min, w_max,
//                     explained_variance_ratio (blank for the mean), values
void write_spectral_basis_csv(const std::string& path, const SpectralBasis& basis);
SpectralBasis read_spectral_basis_csv(const std::string& path);

// truth record of a synthetic run: parameter triples (block, index, value)
// and per-site surfaces (site_id, mu, nlv)
void write_truth_params_csv(const std::string& path, const SyntheticTruth& truth);
void write_truth_surfaces_csv(const std::string& path, const SiteTable& sites,
                              const SyntheticTruth& truth);

/// Sectioned key = value configuration ('#' and ';' comments). Flags given on
/// the command line override the corresponding config keys.
struct Config {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string path;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string require(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key, long fallback) const;
};
Config read_config(const std::string& path);

/// Deterministic run record: sorted key = value lines, one per entry.
/// Timing goes to a separate file so the manifest stays byte-stable.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace socmap
