#include "socmap/basis.hpp"

#include <cmath>

namespace socmap {

BasisSet generate_knots(const Bbox& bbox, const std::vector<GridDims>& resolutions) {
    if (resolutions.empty())
        throw parameter_error("generate_knots: resolution list is empty");
    if (!(bbox.width() > 0.0) || !(bbox.height() > 0.0))
        throw parameter_error("generate_knots: degenerate bbox");
    BasisSet out;
    int res_id = 0;
    for (const auto& [nx, ny] : resolutions) {
        if (nx < 1 || ny < 1)
            throw parameter_error("generate_knots: grid dims must be >= 1");
        const double sx = nx > 1 ? bbox.width() / (nx - 1) : bbox.width();
        const double sy = ny > 1 ? bbox.height() / (ny - 1) : bbox.height();
        const double R = 1.5 * std::max(sx, sy);
        for (int iy = 0; iy < ny; ++iy) {
            const double lat = ny > 1 ? bbox.lat_min + iy * sy
                                      : 0.5 * (bbox.lat_min + bbox.lat_max);
            for (int ix = 0; ix < nx; ++ix) {
                const double lon = nx > 1 ? bbox.lon_min + ix * sx
                                          : 0.5 * (bbox.lon_min + bbox.lon_max);
                out.knots.push_back({{lon, lat}, R});
                out.resolution_ids.push_back(res_id);
            }
        }
        ++res_id;
    }
    return out;
}

double bisquare(const Location& s, const Knot& knot) {
    const double d = distance(s, knot.u);
    if (d >= knot.R) return 0.0;
    const double t = 1.0 - (d / knot.R) * (d / knot.R);
    return t * t;
}

MatrixXd basis_matrix(const std::vector<Location>& sites, const BasisSet& basis) {
    MatrixXd Phi(static_cast<Eigen::Index>(sites.size()), basis.size());
    for (Eigen::Index i = 0; i < Phi.rows(); ++i)
        for (int j = 0; j < basis.size(); ++j)
            Phi(i, j) = bisquare(sites[i], basis.knots[j]);
    return Phi;
}

MatrixXd interaction_basis(const MatrixXd& Phi, const std::vector<Landuse>& landuse) {
    if (static_cast<Eigen::Index>(landuse.size()) != Phi.rows())
        throw parameter_error("interaction_basis: landuse length mismatch");
    const auto J = Phi.cols();
    MatrixXd out = MatrixXd::Zero(Phi.rows(), kNumLanduse * J);
    for (Eigen::Index i = 0; i < Phi.rows(); ++i) {
        if (landuse[i] == Landuse::NotApplicable)
            throw parameter_error("interaction_basis: NotApplicable land use at row " +
                                  std::to_string(i));
        const auto block = static_cast<Eigen::Index>(landuse[i]);
        out.block(i, block * J, 1, J) = Phi.row(i);
    }
    return out;
}

std::vector<int> zero_basis_rows(const MatrixXd& Phi) {
    std::vector<int> out;
    for (Eigen::Index i = 0; i < Phi.rows(); ++i)
        if ((Phi.row(i).array() == 0.0).all()) out.push_back(static_cast<int>(i));
    return out;
}

}  // namespace socmap
