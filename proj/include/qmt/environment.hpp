#pragma once

// Thermal bosonic environments. Internal units: hbar = k_B = 1, energies as
// angular frequencies (rad/s), times in seconds.

#include <cstddef>
#include <variant>
#include <vector>

#include "qmt/qlinalg.hpp"

namespace qmt {

inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K

class Temperature {
public:
    static Temperature from_kelvin(double kelvin);
    // k_B T / hbar expressed in rad/s.
    static Temperature from_rad_per_s(double scale);

    double kelvin() const { return scale_ * kHbar / kBoltzmann; }
    double rad_per_s() const { return scale_; }
    // theta = hbar omega / (k_B T)
    double theta(double omega) const { return omega / scale_; }

private:
    explicit Temperature(double scale) : scale_(scale) {}
    double scale_;
};

struct BathMode {
    double omega = 0.0;       // rad/s
    double g = 0.0;           // rad/s
    std::size_t trunc = 2;    // Fock cutoff used when the mode is simulated
};

struct OhmicDensity {
    double eta = 0.0;      // dimensionless
    double omega_c = 0.0;  // rad/s
};

struct TabulatedDensity {
    std::vector<double> omega;  // strictly increasing, rad/s
    std::vector<double> J;      // rad/s (so that the integral over omega is rad^2/s^2)
};

// J(omega) = eta * omega * exp(-omega/omega_c), or piecewise-linear between
// tabulated points and zero outside them.
class SpectralDensityModel {
public:
    SpectralDensityModel(OhmicDensity ohmic);
    SpectralDensityModel(TabulatedDensity table);

    double operator()(double omega) const;
    // lim_{omega -> 0} J(omega)/omega; +inf when J does not vanish at zero.
    double zero_frequency_slope() const;
    // Points where J is not smooth (interior tabulation nodes); empty for Ohmic.
    std::vector<double> breakpoints() const;
    double natural_upper_limit() const;

    const std::variant<OhmicDensity, TabulatedDensity>& variant() const { return v_; }

private:
    std::variant<OhmicDensity, TabulatedDensity> v_;
};

struct DiscreteBath {
    std::vector<BathMode> modes;
};

struct ContinuumBath {
    SpectralDensityModel J;
    double omega_max;  // may be +inf
};

class BathSpec {
public:
    BathSpec(DiscreteBath bath);
    BathSpec(ContinuumBath bath);

    bool is_discrete() const { return std::holds_alternative<DiscreteBath>(v_); }
    // Throws NotRealizable for continuum baths.
    const std::vector<BathMode>& modes() const;
    const std::variant<DiscreteBath, ContinuumBath>& variant() const { return v_; }

private:
    std::variant<DiscreteBath, ContinuumBath> v_;
};

// coth(theta/2) = 1 + 2 nbar
double coth_half(double theta);

// Bose-Einstein occupation 1/(e^theta - 1). Throws InvalidFrequency for omega <= 0.
double occupation(double omega, const Temperature& temp);

struct ThermalState {
    DensityOperator state;
    double leakage = 0.0;  // probability mass beyond the cutoff before renormalising
};

inline constexpr double kDefaultLeakageTol = 1e-10;

// Truncated Gibbs state exp(-theta n)/Z on n = 0..trunc-1.
ThermalState thermal_state(double omega, const Temperature& temp, std::size_t trunc,
                           const std::string& label = "E", double leakage_tol = kDefaultLeakageTol);

// Diagonal of the truncated thermal state (Fock populations), plus leakage.
std::vector<double> thermal_populations(double theta, std::size_t trunc, double* leakage = nullptr);

// Smallest d with geometric thermal tail beyond d below tail_tol:
// ceil(ln(tail_tol)/(-theta)) + 1, floored at 2.
std::size_t required_truncation(double omega, const Temperature& temp, double tail_tol);

// sum_k g_k^2 coth(theta_k/2), or the integral of J(omega) coth(theta/2) over
// (0, omega_max] by adaptive Gauss-Kronrod quadrature (relative tol 1e-8).
double bath_integral(const BathSpec& bath, const Temperature& temp);

} // namespace qmt
