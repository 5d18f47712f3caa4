#include "qmt/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qmt/errors.hpp"

namespace qmt {

Temperature Temperature::from_kelvin(double kelvin) {
    if (!(kelvin > 0.0) || !std::isfinite(kelvin)) fail(ErrorKind::InvalidArgument, "temperature must be positive");
    return Temperature(kBoltzmann * kelvin / kHbar);
}

Temperature Temperature::from_rad_per_s(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorKind::InvalidArgument, "temperature must be positive");
    return Temperature(scale);
}

SpectralDensityModel::SpectralDensityModel(OhmicDensity ohmic) : v_(ohmic) {
    if (!(ohmic.eta > 0.0) || !(ohmic.omega_c > 0.0))
        fail(ErrorKind::InvalidArgument, "Ohmic density needs eta > 0 and omega_c > 0");
}

SpectralDensityModel::SpectralDensityModel(TabulatedDensity table) : v_(std::move(table)) {
    const auto& t = std::get<TabulatedDensity>(v_);
    if (t.omega.size() != t.J.size() || t.omega.size() < 2)
        fail(ErrorKind::InvalidArgument, "tabulated density needs >= 2 matching (omega, J) points");
    for (std::size_t i = 0; i < t.omega.size(); ++i) {
        if (t.omega[i] < 0.0 || t.J[i] < 0.0) fail(ErrorKind::InvalidArgument, "tabulated density must be nonnegative");
        if (i > 0 && !(t.omega[i] > t.omega[i - 1]))
            fail(ErrorKind::InvalidArgument, "tabulated frequencies must be strictly increasing");
    }
}

double SpectralDensityModel::operator()(double omega) const {
    if (const auto* o = std::get_if<OhmicDensity>(&v_)) return o->eta * omega * std::exp(-omega / o->omega_c);
    const auto& t = std::get<TabulatedDensity>(v_);
    if (omega < t.omega.front() || omega > t.omega.back()) return 0.0;
    const auto it = std::upper_bound(t.omega.begin(), t.omega.end(), omega);
    if (it == t.omega.end()) return t.J.back();
    const std::size_t i = static_cast<std::size_t>(it - t.omega.begin());
    const double w = (omega - t.omega[i - 1]) / (t.omega[i] - t.omega[i - 1]);
    return (1.0 - w) * t.J[i - 1] + w * t.J[i];
}

double SpectralDensityModel::zero_frequency_slope() const {
    if (const auto* o = std::get_if<OhmicDensity>(&v_)) return o->eta;
    const auto& t = std::get<TabulatedDensity>(v_);
    if (t.omega.front() > 0.0) return 0.0;
    if (t.J.front() > 0.0) return std::numeric_limits<double>::infinity();
    return t.J[1] / t.omega[1];
}

std::vector<double> SpectralDensityModel::breakpoints() const {
    if (std::holds_alternative<OhmicDensity>(v_)) return {};
    return std::get<TabulatedDensity>(v_).omega;
}

double SpectralDensityModel::natural_upper_limit() const {
    if (std::holds_alternative<OhmicDensity>(v_)) return std::numeric_limits<double>::infinity();
    return std::get<TabulatedDensity>(v_).omega.back();
}

BathSpec::BathSpec(DiscreteBath bath) : v_(std::move(bath)) {
    for (const auto& m : std::get<DiscreteBath>(v_).modes) {
        if (!(m.omega > 0.0)) fail(ErrorKind::InvalidFrequency, "mode frequency must be positive");
        if (!(m.g > 0.0)) fail(ErrorKind::InvalidArgument, "mode coupling must be positive");
        if (m.trunc < 2) fail(ErrorKind::TruncationTooSmall, "mode truncation must be >= 2");
    }
}

BathSpec::BathSpec(ContinuumBath bath) : v_(std::move(bath)) {
    const auto& c = std::get<ContinuumBath>(v_);
    if (!(c.omega_max > 0.0)) fail(ErrorKind::InvalidFrequency, "omega_max must be positive");
}

const std::vector<BathMode>& BathSpec::modes() const {
    if (const auto* d = std::get_if<DiscreteBath>(&v_)) return d->modes;
    fail(ErrorKind::NotRealizable, "continuum bath has no discrete modes");
}

double coth_half(double theta) { return 1.0 / std::tanh(0.5 * theta); }

double occupation(double omega, const Temperature& temp) {
    if (!(omega > 0.0)) fail(ErrorKind::InvalidFrequency, "occupation needs omega > 0");
    const double theta = temp.theta(omega);
    if (theta > 700.0) return 0.0;
    if (theta < 1e-6) return 1.0 / theta - 0.5 + theta / 12.0;
    return 1.0 / std::expm1(theta);
}

std::vector<double> thermal_populations(double theta, std::size_t trunc, double* leakage) {
    if (trunc < 1) fail(ErrorKind::TruncationTooSmall, "truncation must be positive");
    std::vector<double> p(trunc, 0.0);
    // exp(-theta n) relative weights; the tail beyond trunc has mass exp(-theta trunc).
    const double tail = std::exp(-theta * static_cast<double>(trunc));
    double norm = 0.0;
    for (std::size_t n = 0; n < trunc; ++n) {
        p[n] = std::exp(-theta * static_cast<double>(n));
        norm += p[n];
    }
    for (double& x : p) x /= norm;
    if (leakage) *leakage = tail;
    return p;
}

ThermalState thermal_state(double omega, const Temperature& temp, std::size_t trunc, const std::string& label,
                           double leakage_tol) {
    if (!(omega > 0.0)) fail(ErrorKind::InvalidFrequency, "thermal state needs omega > 0");
    if (trunc < 2) fail(ErrorKind::TruncationTooSmall, "thermal truncation must be >= 2");
    double leakage = 0.0;
    const auto p = thermal_populations(temp.theta(omega), trunc, &leakage);
    if (leakage > leakage_tol)
        fail(ErrorKind::TruncationTooSmall, "thermal leakage " + num(leakage) + " exceeds tolerance at trunc " +
                                                std::to_string(trunc));
    Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(trunc), static_cast<Eigen::Index>(trunc));
    for (std::size_t n = 0; n < trunc; ++n) rho(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = p[n];
    return {DensityOperator(SpaceLayout::boson(label, trunc), std::move(rho)), leakage};
}

std::size_t required_truncation(double omega, const Temperature& temp, double tail_tol) {
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) fail(ErrorKind::InvalidArgument, "tail tolerance must lie in (0, 1)");
    const double theta = temp.theta(omega);
    const double d = std::ceil(std::log(tail_tol) / -theta) + 1.0;
    if (!std::isfinite(d) || d < 2.0) return 2;
    return static_cast<std::size_t>(d);
}

double bath_integral(const BathSpec& bath, const Temperature& temp) {
    if (bath.is_discrete()) {
        double sum = 0.0;
        for (const auto& m : bath.modes()) sum += m.g * m.g * coth_half(temp.theta(m.omega));
        return sum;
    }
    const auto& c = std::get<ContinuumBath>(bath.variant());
    const double slope = c.J.zero_frequency_slope();
    if (!std::isfinite(slope)) fail(ErrorKind::DivergentBath, "J(omega) coth(theta/2) diverges at omega -> 0");
    const double T = temp.rad_per_s();
    const auto integrand = [&](double omega) {
        const double theta = temp.theta(omega);
        // J coth(theta/2) -> J * 2/theta = 2 T J/omega at the left end.
        if (theta < 1e-8) return omega > 0.0 ? 2.0 * T * c.J(omega) / omega : 2.0 * T * slope;
        return c.J(omega) * coth_half(theta);
    };

    const double upper = std::min(c.omega_max, c.J.natural_upper_limit());
    std::vector<double> edges{0.0};
    std::vector<double> interior = c.J.breakpoints();
    // Extra panels at the thermal scale and the Ohmic cutoff, where the integrand bends.
    interior.push_back(20.0 * T);
    if (const auto* o = std::get_if<OhmicDensity>(&c.J.variant())) interior.push_back(o->omega_c);
    std::sort(interior.begin(), interior.end());
    for (double b : interior)
        if (b > edges.back() && b < upper) edges.push_back(b);
    edges.push_back(upper);

    using boost::math::quadrature::gauss_kronrod;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double err = 0.0;
        total += gauss_kronrod<double, 31>::integrate(integrand, edges[i], edges[i + 1], 30, 1e-10, &err);
    }
    if (!std::isfinite(total)) fail(ErrorKind::DivergentBath, "bath integral is not finite");
    return total;
}

} // namespace qmt
