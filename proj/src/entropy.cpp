#include "qmt/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qmt/errors.hpp"

namespace qmt {

Spectrum::Spectrum(std::vector<double> probabilities) : p_(std::move(probabilities)) {
    if (p_.empty()) fail(ErrorKind::InvalidState, "empty spectrum");
    double sum = 0.0;
    for (double p : p_) {
        if (!(p >= 0.0)) fail(ErrorKind::InvalidState, "negative or NaN probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10) fail(ErrorKind::InvalidState, "probabilities do not sum to 1");
}

Spectrum Spectrum::of(const DensityOperator& rho) {
    const auto& v = rho.eigen().values;
    return Spectrum(std::vector<double>(v.data(), v.data() + v.size()));
}

EntropyMoments entropy_moments(const Spectrum& spectrum, double relative_cutoff) {
    const auto& p = spectrum.probabilities();
    const double cutoff = relative_cutoff * *std::max_element(p.begin(), p.end());
    double s = 0.0;
    double s2 = 0.0;
    for (double x : p) {
        if (x <= cutoff) continue;
        const double l = std::log(x);
        s -= x * l;
        s2 += x * l * l;
    }
    double var = s2 - s * s;
    if (var < -1e-10) fail(ErrorKind::InvalidState, "varentropy evaluated negative");
    return {std::max(s, 0.0), std::max(var, 0.0)};
}

EntropyMoments entropy_moments(const DensityOperator& rho, double relative_cutoff) {
    return entropy_moments(Spectrum::of(rho), relative_cutoff);
}

double von_neumann_entropy(const DensityOperator& rho) { return entropy_moments(rho).entropy; }
double von_neumann_entropy(const Spectrum& spectrum) { return entropy_moments(spectrum).entropy; }
double varentropy(const DensityOperator& rho) { return entropy_moments(rho).varentropy; }
double varentropy(const Spectrum& spectrum) { return entropy_moments(spectrum).varentropy; }

namespace {

// Columns of the eigenvectors whose eigenvalues exceed the relative cutoff.
Matrix support_basis(const DensityOperator& rho) {
    const auto& es = rho.eigen();
    const double cutoff = kLogCutoff * es.values.maxCoeff();
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
        if (es.values[i] > cutoff) cols.push_back(i);
    Matrix basis(es.vectors.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = es.vectors.col(cols[k]);
    return basis;
}

} // namespace

double support_overlap(const DensityOperator& rho, const DensityOperator& sigma) {
    if (!(rho.layout() == sigma.layout())) fail(ErrorKind::LayoutConflict, "relative entropy layouts differ");
    const Matrix rho_support = support_basis(rho);
    const Matrix sigma_support = support_basis(sigma);
    // overlap of each supported eigenvector v of rho: ||P_sigma v||^2
    const Matrix proj = sigma_support.adjoint() * rho_support;
    double worst = 1.0;
    for (Eigen::Index k = 0; k < proj.cols(); ++k) worst = std::min(worst, proj.col(k).squaredNorm());
    return worst;
}

double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma, double support_tol) {
    const double overlap = support_overlap(rho, sigma);
    if (overlap < 1.0 - support_tol)
        fail(ErrorKind::SupportMismatch,
             "support of rho leaves the support of sigma (overlap " + std::to_string(overlap) + ")");
    const auto& es = rho.eigen();
    const double cutoff = kLogCutoff * es.values.maxCoeff();
    const Matrix log_sigma = log_density(sigma);
    double value = 0.0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        const double p = es.values[i];
        if (p <= cutoff) continue;
        const auto v = es.vectors.col(i);
        const double cross = (v.adjoint() * log_sigma * v)(0, 0).real();
        value += p * (std::log(p) - cross);
    }
    if (value < -1e-9) fail(ErrorKind::InvalidState, "relative entropy evaluated negative");
    return std::max(value, 0.0);
}

double f_A(int outcomes) {
    if (outcomes < 2) fail(ErrorKind::InvalidOutcomeCount, "need at least two outcomes");
    const double l = std::log(static_cast<double>(outcomes - 1));
    return std::sqrt(0.25 * l * l + 1.0);
}

double two_block_varentropy(double r, int m, int n) {
    if (r <= 0.0 || r >= 1.0) return 0.0;
    const double l = std::log((1.0 - r) / r) + std::log(static_cast<double>(n) / static_cast<double>(m));
    return r * (1.0 - r) * l * l;
}

VarentropyMaxResult varentropy_max(int outcomes) {
    if (outcomes < 2) fail(ErrorKind::InvalidOutcomeCount, "need at least two outcomes");
    const double a1 = static_cast<double>(outcomes - 1);
    const auto residual = [a1](double r) { return (1.0 - 2.0 * r) * std::log((1.0 - r) * a1 / r) - 2.0; };

    double lo = 1e-12;
    double hi = 0.5 - 1e-12;
    double f_lo = residual(lo);
    if (!(f_lo > 0.0 && residual(hi) < 0.0))
        fail(ErrorKind::InvalidArgument, "varentropy maximiser is not bracketed");
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
        mid = 0.5 * (lo + hi);
        const double f_mid = residual(mid);
        if (std::abs(f_mid) <= 1e-13 || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * mid) break;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    VarentropyMaxResult out;
    out.outcomes = outcomes;
    out.r = mid;
    out.residual = -residual(mid);
    out.max_varentropy = two_block_varentropy(mid, 1, outcomes - 1);
    const double fa = f_A(outcomes);
    out.f_A_squared = fa * fa;
    return out;
}

} // namespace qmt
