#include "socmap/design.hpp"

namespace socmap {

void Hyperparams::validate() const {
    for (double v : {alpha_mlg, sigma2_beta1, sigma2_beta2, a, b, w, p})
        if (!(v > 0.0)) throw parameter_error("Hyperparams: all entries must be positive");
}

namespace {

bool needs_coeffs(int model) { return model == 5 || model == 6; }
bool mean_interactions(int model) { return model >= 3; }
bool variance_interactions(int model) { return model == 4 || model == 6; }

void append_lu_coord_labels(std::vector<std::string>& labels) {
    labels.insert(labels.end(), {"lu_C", "lu_F", "lu_W", "lu_Oth", "lon", "lat"});
}

std::vector<std::string> phi_labels(int J) {
    std::vector<std::string> out;
    for (int j = 1; j <= J; ++j) out.push_back("phi_" + std::to_string(j));
    return out;
}

std::vector<std::string> interaction_labels(int J) {
    std::vector<std::string> out;
    for (const char* cat : {"C", "F", "W", "Oth"})
        for (int j = 1; j <= J; ++j)
            out.push_back(std::string("phi") + cat + "_" + std::to_string(j));
    return out;
}

}  // namespace

DesignSet build_design(int model, const SiteTable& sites, const BasisSet& basis) {
    if (model < 1 || model > 6)
        throw parameter_error("build_design: model variant must be in 1..6");
    const auto n = static_cast<Eigen::Index>(sites.size());
    int K = 0;
    if (needs_coeffs(model)) {
        for (const auto& s : sites) {
            if (!s.coeffs)
                throw data_error("build_design: model " + std::to_string(model) +
                                 " requires spectral coefficients at every site");
            if (K == 0)
                K = static_cast<int>(s.coeffs->size());
            else if (static_cast<int>(s.coeffs->size()) != K)
                throw data_error("build_design: inconsistent coefficient lengths");
        }
    }
    for (const auto& s : sites)
        if (s.landuse == Landuse::NotApplicable)
            throw data_error("build_design: site " + std::to_string(s.id) +
                             " has no applicable land-use category");

    DesignSet d;
    d.X1.setZero(n, 6 + K);
    for (Eigen::Index i = 0; i < n; ++i) {
        d.X1(i, static_cast<Eigen::Index>(sites[i].landuse)) = 1.0;
        d.X1(i, 4) = sites[i].loc.lon;
        d.X1(i, 5) = sites[i].loc.lat;
        for (int k = 0; k < K; ++k) d.X1(i, 6 + k) = (*sites[i].coeffs)[k];
    }
    append_lu_coord_labels(d.labels_x1);
    for (int k = 1; k <= K; ++k) d.labels_x1.push_back("pc" + std::to_string(k));

    const MatrixXd Phi = basis_matrix(locations_of(sites), basis);
    const int J = basis.size();
    if (model == 1) {
        d.Psi1.resize(n, 0);
        d.Psi2.resize(n, 0);
        d.X2 = MatrixXd::Ones(n, 1);
        d.labels_x2 = {"intercept"};
    } else {
        const MatrixXd PhiI = mean_interactions(model) || variance_interactions(model)
                                  ? interaction_basis(Phi, landuses_of(sites))
                                  : MatrixXd(n, 0);
        if (mean_interactions(model)) {
            d.Psi1.resize(n, J + PhiI.cols());
            d.Psi1 << Phi, PhiI;
            d.labels_psi1 = phi_labels(J);
            const auto il = interaction_labels(J);
            d.labels_psi1.insert(d.labels_psi1.end(), il.begin(), il.end());
        } else {
            d.Psi1 = Phi;
            d.labels_psi1 = phi_labels(J);
        }
        d.X2.setZero(n, 6);
        for (Eigen::Index i = 0; i < n; ++i) {
            d.X2(i, static_cast<Eigen::Index>(sites[i].landuse)) = 1.0;
            d.X2(i, 4) = sites[i].loc.lon;
            d.X2(i, 5) = sites[i].loc.lat;
        }
        append_lu_coord_labels(d.labels_x2);
        if (variance_interactions(model)) {
            d.Psi2.resize(n, J + PhiI.cols());
            d.Psi2 << Phi, PhiI;
            d.labels_psi2 = phi_labels(J);
            const auto il = interaction_labels(J);
            d.labels_psi2.insert(d.labels_psi2.end(), il.begin(), il.end());
        } else {
            d.Psi2 = Phi;
            d.labels_psi2 = phi_labels(J);
        }
    }
    return d;
}

const std::vector<VariantInfo>& variant_table() {
    static const std::vector<VariantInfo> table = {
        {1, "land-use intercepts + lon/lat", "constant"},
        {2, "model 1 + bisquare spatial effects", "land-use intercepts + lon/lat + bisquare effects"},
        {3, "model 2 + land-use interaction basis", "as model 2"},
        {4, "as model 3", "model 2 variance + land-use interaction basis"},
        {5, "model 3 + spectral coefficients", "as model 2"},
        {6, "model 5 mean", "as model 4"},
    };
    return table;
}

}  // namespace socmap
