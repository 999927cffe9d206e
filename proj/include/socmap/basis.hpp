#pragma once

#include <utility>
#include <vector>

#include "socmap/types.hpp"

namespace socmap {

struct Knot {
    Location u;
    double R = 0.0;  // kernel range, same units as coordinates
};

struct BasisSet {
    std::vector<Knot> knots;
    std::vector<int> resolution_ids;
    int size() const { return static_cast<int>(knots.size()); }
};

using GridDims = std::pair<int, int>;  // (nx, ny)

/// Regular-grid knots per resolution over the bbox. Grid spacing is
/// extent/(dim-1); a 1-point dimension uses the full extent and centers the
/// knot. R = 1.5 x the larger of the x/y spacings of that resolution.
/// Knots are ordered by (resolution, row-major grid position).
BasisSet generate_knots(const Bbox& bbox, const std::vector<GridDims>& resolutions);

/// Bisquare kernel (1 - (d/R)^2)^2 for d < R, else 0.
double bisquare(const Location& s, const Knot& knot);

MatrixXd basis_matrix(const std::vector<Location>& sites, const BasisSet& basis);

/// Expand Phi into 4 land-use blocks (C, F, W, Oth): row i carries its
/// Phi row in the block of landuse[i], zeros elsewhere.
MatrixXd interaction_basis(const MatrixXd& Phi, const std::vector<Landuse>& landuse);

/// Indices of sites whose basis row is all zero (outside every kernel).
std::vector<int> zero_basis_rows(const MatrixXd& Phi);

}  // namespace socmap
