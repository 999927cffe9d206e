#include "socmap/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace socmap {

void Spectrum::validate() const {
    if (w_max <= w_min) throw parameter_error("Spectrum: w_max must exceed w_min");
    if (reflectance.size() != grid_size())
        throw parameter_error("Spectrum: reflectance length does not match grid");
    for (Eigen::Index i = 0; i < reflectance.size(); ++i)
        if (!std::isfinite(reflectance[i]))
            throw parameter_error("Spectrum: non-finite reflectance");
}

SpectralBasis fit_pca(const MatrixXd& spectra, int K, int w_min, int w_max) {
    const auto n = spectra.rows();
    if (K < 1 || n <= K)
        throw parameter_error("fit_pca: need n > K >= 1");
    SpectralBasis out;
    out.w_min = w_min;
    out.w_max = w_max;
    out.mean_spectrum = spectra.colwise().mean();
    MatrixXd centered = spectra.rowwise() - out.mean_spectrum.transpose();
    const double total_var = centered.squaredNorm();
    // relative floor so constant input is degenerate even when centering
    // leaves rounding-level residue
    if (!(total_var > spectra.squaredNorm() * 1e-28))
        throw data_error("fit_pca: zero-variance input");
    Eigen::BDCSVD<MatrixXd> svd(centered, Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    out.loadings = svd.matrixV().leftCols(K).transpose();
    out.explained_variance_ratio.resize(K);
    for (int k = 0; k < K; ++k)
        out.explained_variance_ratio[k] = sv[k] * sv[k] / total_var;
    // sign convention: largest-magnitude coordinate of each loading made non-negative
    for (int k = 0; k < K; ++k) {
        Eigen::Index imax = 0;
        out.loadings.row(k).cwiseAbs().maxCoeff(&imax);
        if (out.loadings(k, imax) < 0.0) out.loadings.row(k) *= -1.0;
    }
    out.variance_warning = out.cumulative_explained() < 0.99;
    return out;
}

VectorXd project(const VectorXd& reflectance, const SpectralBasis& basis) {
    if (reflectance.size() != basis.mean_spectrum.size())
        throw parameter_error("project: wavelength grid mismatch");
    return basis.loadings * (reflectance - basis.mean_spectrum);
}

VectorXd reconstruct(const VectorXd& upsilon, const SpectralBasis& basis) {
    if (upsilon.size() != basis.K())
        throw parameter_error("reconstruct: coefficient length mismatch");
    return basis.mean_spectrum + basis.loadings.transpose() * upsilon;
}

VectorXd knn_predict_coeffs(const Location& target,
                            const std::vector<Location>& ref_locs,
                            const MatrixXd& ref_coeffs, int k) {
    const auto n = static_cast<Eigen::Index>(ref_locs.size());
    if (n == 0) throw parameter_error("knn_predict_coeffs: empty reference set");
    if (ref_coeffs.rows() != n)
        throw parameter_error("knn_predict_coeffs: coefficient row count mismatch");
    if (k < 1 || k > n)
        throw parameter_error("knn_predict_coeffs: k out of range");
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> dist(n);
    for (Eigen::Index i = 0; i < n; ++i) dist[i] = distance(target, ref_locs[i]);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return dist[a] < dist[b];  // stable sort keeps smallest index on ties
    });
    VectorXd out = VectorXd::Zero(ref_coeffs.cols());
    for (int i = 0; i < k; ++i) out += ref_coeffs.row(order[i]);
    return out / k;
}

}  // namespace socmap
