#include "socmap/types.hpp"

namespace socmap {

Landuse landuse_from_string(const std::string& s) {
    if (s == "C") return Landuse::C;
    if (s == "F") return Landuse::F;
    if (s == "W") return Landuse::W;
    if (s == "Oth") return Landuse::Oth;
    if (s == "NA") return Landuse::NotApplicable;
    throw data_error("unknown land-use category '" + s + "'");
}

std::vector<Location> locations_of(const SiteTable& sites) {
    std::vector<Location> out;
    out.reserve(sites.size());
    for (const auto& s : sites) out.push_back(s.loc);
    return out;
}

std::vector<Landuse> landuses_of(const SiteTable& sites) {
    std::vector<Landuse> out;
    out.reserve(sites.size());
    for (const auto& s : sites) out.push_back(s.landuse);
    return out;
}

VectorXd responses_of(const SiteTable& sites) {
    VectorXd y(static_cast<Eigen::Index>(sites.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!sites[i].y)
            throw data_error("site " + std::to_string(sites[i].id) + " has no response");
        y[i] = *sites[i].y;
    }
    return y;
}

}  // namespace socmap
