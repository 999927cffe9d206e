#include "socmap/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace socmap {

namespace {

std::string context(const std::string& path, long line) {
    return path + ":" + std::to_string(line);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& field, const std::string& where) {
    char* end = nullptr;
    const std::string t = trim(field);
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw data_error(where + ": cannot parse number '" + field + "'");
    return v;
}

long parse_long(const std::string& field, const std::string& where) {
    char* end = nullptr;
    const std::string t = trim(field);
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        throw data_error(where + ": cannot parse integer '" + field + "'");
    return v;
}

/// Line source with path:line error context; strips trailing '\r'.
class LineReader {
public:
    explicit LineReader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw data_error("cannot open " + path);
    }
    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    std::string where() const { return context(path_, line_); }
    std::string header_or_throw(const std::string& expect_first) {
        std::string line;
        if (!next(line)) throw data_error(path_ + ": empty file");
        if (split(line, ',').front() != expect_first)
            throw data_error(where() + ": expected header starting with '" + expect_first + "'");
        return line;
    }

private:
    std::string path_;
    std::ifstream in_;
    long line_ = 0;
};

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot open " + tmp + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw data_error("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw data_error("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t file_hash(const std::string& path) {
    const std::string content = read_file(path);
    return hash_bytes(content.data(), content.size());
}

void write_sites_csv(const std::string& path, const SiteTable& sites) {
    std::string out = "site_id,lon,lat,landuse,y\n";
    for (const Site& s : sites) {
        out += std::to_string(s.id) + ',' + format_double(s.loc.lon) + ',' +
               format_double(s.loc.lat) + ',' + landuse_name(s.landuse) + ',';
        if (s.y.has_value()) out += format_double(*s.y);
        out += '\n';
    }
    atomic_write(path, out);
}

SiteTable read_sites_csv(const std::string& path) {
    LineReader in(path);
    in.header_or_throw("site_id");
    SiteTable sites;
    std::string line;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw data_error(in.where() + ": expected 5 fields");
        Site s;
        s.id = parse_long(f[0], in.where());
        s.loc.lon = parse_double(f[1], in.where());
        s.loc.lat = parse_double(f[2], in.where());
        s.landuse = landuse_from_string(trim(f[3]));
        if (!trim(f[4]).empty()) s.y = parse_double(f[4], in.where());
        sites.push_back(std::move(s));
    }
    return sites;
}

void write_coeffs_csv(const std::string& path, const SiteTable& sites) {
    Eigen::Index K = 0;
    for (const Site& s : sites)
        if (s.coeffs.has_value()) K = std::max(K, s.coeffs->size());
    std::string out = "site_id";
    for (Eigen::Index k = 1; k <= K; ++k) out += ",v" + std::to_string(k);
    out += '\n';
    for (const Site& s : sites) {
        if (!s.coeffs.has_value()) continue;
        out += std::to_string(s.id);
        for (Eigen::Index k = 0; k < s.coeffs->size(); ++k)
            out += ',' + format_double((*s.coeffs)[k]);
        out += '\n';
    }
    atomic_write(path, out);
}

void read_coeffs_csv(const std::string& path, SiteTable& sites) {
    std::map<long, std::size_t> index;
    for (std::size_t i = 0; i < sites.size(); ++i) index[sites[i].id] = i;
    LineReader in(path);
    const auto header = split(in.header_or_throw("site_id"), ',');
    const auto K = static_cast<Eigen::Index>(header.size()) - 1;
    if (K < 1) throw data_error(path + ": no coefficient columns");
    std::string line;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (static_cast<Eigen::Index>(f.size()) != K + 1)
            throw data_error(in.where() + ": expected " + std::to_string(K + 1) + " fields");
        const long id = parse_long(f[0], in.where());
        const auto it = index.find(id);
        if (it == index.end())
            throw data_error(in.where() + ": unknown site_id " + std::to_string(id));
        VectorXd v(K);
        for (Eigen::Index k = 0; k < K; ++k)
            v[k] = parse_double(f[static_cast<std::size_t>(k) + 1], in.where());
        sites[it->second].coeffs = std::move(v);
    }
}

void write_spectra_csv(const std::string& path, const std::vector<long>& site_ids,
                       const MatrixXd& reflectance, int w_min, int w_max) {
    if (static_cast<Eigen::Index>(site_ids.size()) != reflectance.rows())
        throw parameter_error("write_spectra_csv: id/row count mismatch");
    std::string out = "site_id,w_min,w_max";
    for (Eigen::Index w = 1; w <= reflectance.cols(); ++w) out += ",r" + std::to_string(w);
    out += '\n';
    for (Eigen::Index i = 0; i < reflectance.rows(); ++i) {
        out += std::to_string(site_ids[static_cast<std::size_t>(i)]) + ',' +
               std::to_string(w_min) + ',' + std::to_string(w_max);
        for (Eigen::Index w = 0; w < reflectance.cols(); ++w)
            out += ',' + format_double(reflectance(i, w));
        out += '\n';
    }
    atomic_write(path, out);
}

SpectraFile read_spectra_csv(const std::string& path) {
    LineReader in(path);
    const auto header = split(in.header_or_throw("site_id"), ',');
    const auto W = static_cast<Eigen::Index>(header.size()) - 3;
    if (W < 1) throw data_error(path + ": no reflectance columns");
    SpectraFile out;
    std::vector<VectorXd> rows;
    std::string line;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (static_cast<Eigen::Index>(f.size()) != W + 3)
            throw data_error(in.where() + ": expected " + std::to_string(W + 3) + " fields");
        out.site_ids.push_back(parse_long(f[0], in.where()));
        const int w_min = static_cast<int>(parse_long(f[1], in.where()));
        const int w_max = static_cast<int>(parse_long(f[2], in.where()));
        if (rows.empty()) {
            out.w_min = w_min;
            out.w_max = w_max;
        } else if (w_min != out.w_min || w_max != out.w_max) {
            throw data_error(in.where() + ": inconsistent wavelength range");
        }
        VectorXd r(W);
        for (Eigen::Index w = 0; w < W; ++w)
            r[w] = parse_double(f[static_cast<std::size_t>(w) + 3], in.where());
        rows.push_back(std::move(r));
    }
    out.reflectance.resize(static_cast<Eigen::Index>(rows.size()), W);
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.reflectance.row(static_cast<Eigen::Index>(i)) = rows[i];
    return out;
}

void write_draws_csv(const std::string& path, const PosteriorDraws& draws) {
    std::string out = "iteration";
    for (const std::string& label : draws.labels) out += ',' + label;
    out += '\n';
    for (Eigen::Index t = 0; t < draws.draws.rows(); ++t) {
        out += std::to_string(draws.iterations[static_cast<std::size_t>(t)]);
        for (Eigen::Index c = 0; c < draws.draws.cols(); ++c)
            out += ',' + format_double(draws.draws(t, c));
        out += '\n';
    }
    atomic_write(path, out);
}

PosteriorDraws read_draws_csv(const std::string& path) {
    LineReader in(path);
    const auto header = split(in.header_or_throw("iteration"), ',');
    PosteriorDraws out;
    out.labels.assign(header.begin() + 1, header.end());
    for (const std::string& label : out.labels) {
        if (label.rfind("beta1:", 0) == 0) ++out.p1;
        else if (label.rfind("eta1:", 0) == 0) ++out.r1;
        else if (label.rfind("beta2:", 0) == 0) ++out.p2;
        else if (label.rfind("eta2:", 0) == 0) ++out.r2;
        else if (label != "sigma2_eta1" && label != "sigma2_eta2")
            throw data_error(path + ": unrecognized draw column '" + label + "'");
    }
    const auto n_cols = static_cast<Eigen::Index>(out.labels.size());
    if (n_cols != out.p1 + out.r1 + out.p2 + out.r2 + 2)
        throw data_error(path + ": draw columns do not form beta/eta/sigma2 blocks");
    std::vector<VectorXd> rows;
    std::string line;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (static_cast<Eigen::Index>(f.size()) != n_cols + 1)
            throw data_error(in.where() + ": expected " + std::to_string(n_cols + 1) + " fields");
        out.iterations.push_back(static_cast<int>(parse_long(f[0], in.where())));
        VectorXd r(n_cols);
        for (Eigen::Index c = 0; c < n_cols; ++c)
            r[c] = parse_double(f[static_cast<std::size_t>(c) + 1], in.where());
        rows.push_back(std::move(r));
    }
    out.draws.resize(static_cast<Eigen::Index>(rows.size()), n_cols);
    for (std::size_t t = 0; t < rows.size(); ++t)
        out.draws.row(static_cast<Eigen::Index>(t)) = rows[t];
    return out;
}

void write_diagnostics_csv(const std::string& path, const ChainDiagnostics& diag) {
    std::string out = "parameter,rhat,ess\n";
    for (const DiagnosticsRow& row : diag.rows)
        out += row.label + ',' + format_double(row.rhat) + ',' + format_double(row.ess) + '\n';
    atomic_write(path, out);
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::string out = "model,mse,msev,cr,is,es\n";
    for (const MetricsRow& r : rows)
        out += std::to_string(r.model) + ',' + format_double(r.mse) + ',' +
               format_double(r.msev) + ',' + format_double(r.cr) + ',' +
               format_double(r.is_avg) + ',' + format_double(r.es) + '\n';
    atomic_write(path, out);
}

void write_semivariogram_csv(const std::string& path,
                             const std::vector<SemivariogramTable>& tables) {
    std::string out = "category,bin_center,semivariance,pairs\n";
    for (const SemivariogramTable& table : tables) {
        const std::string cat =
            table.category < 0 ? "all" : landuse_name(static_cast<Landuse>(table.category));
        for (const SemivariogramBin& bin : table.bins) {
            out += cat + ',' + format_double(bin.center) + ',';
            if (bin.pairs > 0) out += format_double(bin.semivariance);
            out += ',' + std::to_string(bin.pairs) + '\n';
        }
    }
    atomic_write(path, out);
}

void write_prediction_csv(const std::string& path, const std::vector<CellSummary>& cells) {
    std::string out = "lon,lat,landuse,mean,sd_log,lo95,hi95,exp_mean_log,mean_exp\n";
    for (const CellSummary& c : cells)
        out += format_double(c.loc.lon) + ',' + format_double(c.loc.lat) + ',' +
               landuse_name(c.landuse) + ',' + format_double(c.mean) + ',' +
               format_double(c.sd_log) + ',' + format_double(c.lo95) + ',' +
               format_double(c.hi95) + ',' + format_double(c.exp_mean_log) + ',' +
               format_double(c.mean_exp) + '\n';
    atomic_write(path, out);
}

void write_raster(const std::string& path, const CategoricalRaster& raster) {
    raster.validate();
    std::string out;
    out += "ncols " + std::to_string(raster.ncols) + '\n';
    out += "nrows " + std::to_string(raster.nrows) + '\n';
    out += "xll " + format_double(raster.xll) + '\n';
    out += "yll " + format_double(raster.yll) + '\n';
    out += "cellsize " + format_double(raster.cellsize) + '\n';
    out += "nodata " + std::to_string(raster.nodata) + '\n';
    for (int r = 0; r < raster.nrows; ++r) {
        for (int c = 0; c < raster.ncols; ++c) {
            if (c > 0) out += ' ';
            out += std::to_string(raster.code_at(r, c));
        }
        out += '\n';
    }
    atomic_write(path, out);
}

CategoricalRaster read_raster(const std::string& path) {
    LineReader in(path);
    CategoricalRaster raster;
    const char* keys[6] = {"ncols", "nrows", "xll", "yll", "cellsize", "nodata"};
    std::string line;
    for (int i = 0; i < 6; ++i) {
        if (!in.next(line)) throw data_error(path + ": truncated raster header");
        std::istringstream ss(line);
        std::string key, value;
        if (!(ss >> key >> value) || key != keys[i])
            throw data_error(in.where() + ": expected header line '" + keys[i] + " <value>'");
        switch (i) {
            case 0: raster.ncols = static_cast<int>(parse_long(value, in.where())); break;
            case 1: raster.nrows = static_cast<int>(parse_long(value, in.where())); break;
            case 2: raster.xll = parse_double(value, in.where()); break;
            case 3: raster.yll = parse_double(value, in.where()); break;
            case 4: raster.cellsize = parse_double(value, in.where()); break;
            case 5: raster.nodata = static_cast<int>(parse_long(value, in.where())); break;
        }
    }
    raster.codes.reserve(static_cast<std::size_t>(raster.ncols) *
                         static_cast<std::size_t>(std::max(raster.nrows, 0)));
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        int code;
        while (ss >> code) raster.codes.push_back(code);
    }
    raster.validate();
    return raster;
}

void write_basis_table(const std::string& path, const BasisSet& basis) {
    std::string out = "lon,lat,R,resolution_id\n";
    for (int j = 0; j < basis.size(); ++j)
        out += format_double(basis.knots[static_cast<std::size_t>(j)].u.lon) + ',' +
               format_double(basis.knots[static_cast<std::size_t>(j)].u.lat) + ',' +
               format_double(basis.knots[static_cast<std::size_t>(j)].R) + ',' +
               std::to_string(basis.resolution_ids[static_cast<std::size_t>(j)]) + '\n';
    atomic_write(path, out);
}

BasisSet read_basis_table(const std::string& path) {
    LineReader in(path);
    in.header_or_throw("lon");
    BasisSet basis;
    std::string line;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 4) throw data_error(in.where() + ": expected 4 fields");
        Knot knot;
        knot.u.lon = parse_double(f[0], in.where());
        knot.u.lat = parse_double(f[1], in.where());
        knot.R = parse_double(f[2], in.where());
        if (!(knot.R > 0.0)) throw data_error(in.where() + ": knot range must be positive");
        basis.knots.push_back(knot);
        basis.resolution_ids.push_back(static_cast<int>(parse_long(f[3], in.where())));
    }
    if (basis.knots.empty()) throw data_error(path + ": no knots");
    return basis;
}

void write_spectral_basis_csv(const std::string& path, const SpectralBasis& basis) {
    const Eigen::Index W = basis.mean_spectrum.size();
    std::string out = "component,w_min,w_max,explained_variance_ratio";
    for (Eigen::Index w = 1; w <= W; ++w) out += ",r" + std::to_string(w);
    out += '\n';
    out += "0," + std::to_string(basis.w_min) + ',' + std::to_string(basis.w_max) + ',';
    for (Eigen::Index w = 0; w < W; ++w) out += ',' + format_double(basis.mean_spectrum[w]);
    out += '\n';
    for (int k = 0; k < basis.K(); ++k) {
        out += std::to_string(k + 1) + ',' + std::to_string(basis.w_min) + ',' +
               std::to_string(basis.w_max) + ',' +
               format_double(basis.explained_variance_ratio[k]);
        for (Eigen::Index w = 0; w < W; ++w) out += ',' + format_double(basis.loadings(k, w));
        out += '\n';
    }
    atomic_write(path, out);
}

SpectralBasis read_spectral_basis_csv(const std::string& path) {
    LineReader in(path);
    const auto header = split(in.header_or_throw("component"), ',');
    const auto W = static_cast<Eigen::Index>(header.size()) - 4;
    if (W < 1) throw data_error(path + ": no value columns");
    SpectralBasis basis;
    std::vector<std::pair<double, VectorXd>> loadings;
    bool have_mean = false;
    std::string line;
    while (in.next(line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (static_cast<Eigen::Index>(f.size()) != W + 4)
            throw data_error(in.where() + ": expected " + std::to_string(W + 4) + " fields");
        const long component = parse_long(f[0], in.where());
        basis.w_min = static_cast<int>(parse_long(f[1], in.where()));
        basis.w_max = static_cast<int>(parse_long(f[2], in.where()));
        VectorXd values(W);
        for (Eigen::Index w = 0; w < W; ++w)
            values[w] = parse_double(f[static_cast<std::size_t>(w) + 4], in.where());
        if (component == 0) {
            basis.mean_spectrum = std::move(values);
            have_mean = true;
        } else {
            loadings.emplace_back(parse_double(f[3], in.where()), std::move(values));
        }
    }
    if (!have_mean || loadings.empty())
        throw data_error(path + ": spectral basis needs a mean row and at least one component");
    basis.loadings.resize(static_cast<Eigen::Index>(loadings.size()), W);
    basis.explained_variance_ratio.resize(static_cast<Eigen::Index>(loadings.size()));
    for (std::size_t k = 0; k < loadings.size(); ++k) {
        basis.explained_variance_ratio[static_cast<Eigen::Index>(k)] = loadings[k].first;
        basis.loadings.row(static_cast<Eigen::Index>(k)) = loadings[k].second;
    }
    basis.variance_warning = basis.cumulative_explained() < 0.99;
    return basis;
}

namespace {

void append_block(std::string& out, const char* name, const VectorXd& values) {
    for (Eigen::Index i = 0; i < values.size(); ++i)
        out += std::string(name) + ',' + std::to_string(i) + ',' + format_double(values[i]) + '\n';
}

}  // namespace

void write_truth_params_csv(const std::string& path, const SyntheticTruth& truth) {
    std::string out = "block,index,value\n";
    append_block(out, "beta1", truth.beta1);
    append_block(out, "eta1", truth.eta1);
    append_block(out, "beta2", truth.beta2);
    append_block(out, "eta2", truth.eta2);
    atomic_write(path, out);
}

void write_truth_surfaces_csv(const std::string& path, const SiteTable& sites,
                              const SyntheticTruth& truth) {
    if (static_cast<Eigen::Index>(sites.size()) != truth.mu.size())
        throw parameter_error("write_truth_surfaces_csv: size mismatch");
    std::string out = "site_id,mu,nlv\n";
    for (std::size_t i = 0; i < sites.size(); ++i)
        out += std::to_string(sites[i].id) + ',' +
               format_double(truth.mu[static_cast<Eigen::Index>(i)]) + ',' +
               format_double(truth.nlv[static_cast<Eigen::Index>(i)]) + '\n';
    atomic_write(path, out);
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    const auto s = sections.find(section);
    if (s == sections.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

std::string Config::require(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw data_error(path + ": missing required key '" + key + "' in section [" + section +
                         "]");
    return sections.at(section).at(key);
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_double(sections.at(section).at(key), path + " [" + section + "] " + key);
}

long Config::get_long(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    return parse_long(sections.at(section).at(key), path + " [" + section + "] " + key);
}

Config read_config(const std::string& path) {
    LineReader in(path);
    Config config;
    config.path = path;
    std::string section = "run";
    std::string line;
    while (in.next(line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw data_error(in.where() + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw data_error(in.where() + ": empty section name");
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw data_error(in.where() + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw data_error(in.where() + ": empty key");
        config.sections[section][key] = trim(t.substr(eq + 1));
    }
    return config;
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    auto sorted = entries;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    for (const auto& [key, value] : sorted) out += key + " = " + value + '\n';
    atomic_write(path, out);
}

}  // namespace socmap
