#pragma once

#include <string>
#include <vector>

#include "socmap/basis.hpp"
#include "socmap/types.hpp"

namespace socmap {

struct Hyperparams {
    double alpha_mlg = 1000.0;
    double sigma2_beta1 = 1000.0;
    double sigma2_beta2 = 1000.0;
    double a = 0.5;
    double b = 0.5;
    double w = 1000.0;
    double p = 1000.0;
    void validate() const;
};

/// The four design matrices of the heteroscedastic model:
/// mu = X1 b1 + Psi1 e1, -log sigma^2 = X2 b2 + Psi2 e2.
struct DesignSet {
    MatrixXd X1, Psi1, X2, Psi2;
    std::vector<std::string> labels_x1, labels_psi1, labels_x2, labels_psi2;
    Eigen::Index n() const { return X1.rows(); }
    Eigen::Index p1() const { return X1.cols(); }
    Eigen::Index r1() const { return Psi1.cols(); }
    Eigen::Index p2() const { return X2.cols(); }
    Eigen::Index r2() const { return Psi2.cols(); }
};

struct VariantInfo {
    int id;
    std::string mean;
    std::string variance;
};

/// Model variants:
///   1: land-use + coords mean, constant variance
///   2: + bisquare spatial effects in mean and log-variance
///   3: + land-use interaction basis in the mean
///   4: model 3 + interaction basis in the log-variance
///   5: model 3 + spectral coefficients in the mean
///   6: model 5 + interaction basis in the log-variance
DesignSet build_design(int model, const SiteTable& sites, const BasisSet& basis);

const std::vector<VariantInfo>& variant_table();

}  // namespace socmap
