#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace socmap {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

// Thrown when arguments violate an operation's preconditions.
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when input data is structurally unusable for the requested task.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown on numerical failure (overflow, factorization breakdown), with context.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what, long iteration = -1)
        : std::runtime_error(iteration >= 0
                                 ? what + " (iteration " + std::to_string(iteration) + ")"
                                 : what),
          iteration(iteration) {}
    long iteration;
};

// Thrown when a truncated sampler cannot reach its acceptance region.
struct degenerate_truncation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Location {
    double lon = 0.0;
    double lat = 0.0;
};

inline double distance(const Location& a, const Location& b) {
    const double dx = a.lon - b.lon;
    const double dy = a.lat - b.lat;
    return std::sqrt(dx * dx + dy * dy);
}

// Land-use category codes; raster nodata cells map to NotApplicable.
enum class Landuse : int { C = 0, F = 1, W = 2, Oth = 3, NotApplicable = -1 };

constexpr int kNumLanduse = 4;

inline const char* landuse_name(Landuse lu) {
    switch (lu) {
        case Landuse::C: return "C";
        case Landuse::F: return "F";
        case Landuse::W: return "W";
        case Landuse::Oth: return "Oth";
        default: return "NA";
    }
}

Landuse landuse_from_string(const std::string& s);

struct Site {
    long id = 0;
    Location loc;
    Landuse landuse = Landuse::NotApplicable;
    std::optional<double> y;               // log-scale response
    std::optional<VectorXd> coeffs;        // spectral coefficients
};

using SiteTable = std::vector<Site>;

struct Bbox {
    double lon_min = 0.0, lat_min = 0.0, lon_max = 0.0, lat_max = 0.0;
    double width() const { return lon_max - lon_min; }
    double height() const { return lat_max - lat_min; }
};

std::vector<Location> locations_of(const SiteTable& sites);
std::vector<Landuse> landuses_of(const SiteTable& sites);
VectorXd responses_of(const SiteTable& sites);  // throws data_error if any y missing

}  // namespace socmap
