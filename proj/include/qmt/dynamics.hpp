#pragma once

// Exact unitary propagation of rho^QAE = |psi^QA><psi^QA| (x) rho^E for
// discrete-bath models, with the entropy bookkeeping needed to test the
// entropy speed limit along the trajectory.

#include <optional>
#include <span>
#include <vector>

#include "qmt/models.hpp"

namespace qmt {

struct Trajectory {
    std::vector<double> times;              // s
    std::vector<double> entropy;            // S(rho^QA), nats
    std::vector<double> varentropy;         // nats^2
    std::vector<double> rel_entropy_to_M;   // S(rho^QA || rho_M), nats; +inf outside the support
    std::vector<double> dH_int_variance;    // (rad/s)^2
    std::vector<std::vector<double>> pointer_populations;  // [time][outcome]
    std::vector<double> speed_margin;       // 2 sqrt(varentropy * var H_int) - |dS/dt|, nats/s

    double entropy_M = 0.0;                 // S(rho_M)
    int outcomes = 2;
    bool approximate_pointer = false;       // pointer basis only approximately conserved
    std::size_t support_violations = 0;     // samples where rho^QA left supp(rho_M)
    double global_spectrum_drift = 0.0;     // max deviation of the global spectrum from rho(0)'s
    double population_drift = 0.0;         // max |pop_j(t) - pop_j(0)|
    double variance_drift = 0.0;            // max |var(t) - var(0)|
    std::size_t dimension = 0;
    std::size_t ensemble_size = 0;          // number of thermal Fock components propagated
};

// Uniform grid of `points` samples on [0, t_max].
std::vector<double> uniform_times(double t_max, std::size_t points);

// Default sampling: 400 points on [0, 5/Omega], Omega = closed-form Delta H_int.
std::vector<double> default_times(const MeasurementModel& model);

// Throws NotRealizable for continuum baths, TooLarge above the dimension cap,
// InvalidArgument if times are unsorted or do not start at 0, and lets
// SupportMismatch escape for models with exact pointer states.
Trajectory run_trajectory(const MeasurementModel& model, std::span<const double> times);

// Three-point stencils: central inside, one-sided at the ends; second order on
// nonuniform grids and exact for quadratics.
std::vector<double> finite_difference(std::span<const double> times, std::span<const double> values);

struct RateEstimate {
    std::vector<double> rate;       // per sample
    double sensitivity = 0.0;       // max |rate - rate at half sampling| over shared samples
};

// Derivative of `values` plus the discrepancy against the same stencil on
// every other sample. Throws InsufficientSamples below 3 samples (5 for the
// half-resolution comparison to be meaningful, else sensitivity = 0).
RateEstimate rate_with_sensitivity(std::span<const double> times, std::span<const double> values);

RateEstimate entropy_rate(const Trajectory& traj);

struct SpeedLimitCheck {
    double max_violation = 0.0;  // max(|dS/dt| - bound, 0)
    double tolerance = 0.0;      // 3 x finite-difference sensitivity
    double min_margin = 0.0;     // min(bound - |dS/dt|)
    bool passed = true;
};

// |dS/dt| <= 2 sqrt(varentropy * var H_int) pointwise (hbar = 1).
SpeedLimitCheck check_speed_limit(const Trajectory& traj);

struct IdentityCheck {
    double max_defect = 0.0;     // max | |d rel/dt| - |dS/dt| |, nats/s
    double tolerance = 0.0;      // combined finite-difference sensitivity
    bool asserted = true;        // false for approximate pointer models
    bool passed = true;
    std::size_t samples_used = 0;
};

IdentityCheck verify_relative_entropy_identity(const Trajectory& traj);

struct IntegratedSpeedCheck {
    std::vector<double> slack;   // 2 f_A t max_{t'<=t} sqrt(var) - (S(t) - S(0))
    double min_slack = 0.0;      // minimum over t > 0
    bool passed = true;          // min_slack >= -1e-9
};

IntegratedSpeedCheck integrated_speed_check(const Trajectory& traj, double f_a);

// First time rel_entropy_to_M falls to <= epsilon (linear interpolation between
// samples); std::nullopt when never reached.
std::optional<double> measurement_time_estimate(const Trajectory& traj, double epsilon);

} // namespace qmt
