#pragma once

// Closed-form lower bound on the measurement time,
//   tau_min = delta_S / (2 cap Omega),   Omega = Delta H_int (rad/s), hbar = 1.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmt/models.hpp"

namespace qmt {

// S(rho_M) - S(|psi^QA><psi^QA|), nats.
double delta_S_measurement(const MeasurementModel& model);

// Binary entropy -p ln p - (1-p) ln(1-p).
double binary_entropy(double p);

enum class CapChoice { FA, ObservedVarentropy };

std::string to_string(CapChoice c);
CapChoice cap_choice_from_string(const std::string& s);  // "f_A" | "observed"

struct BoundReport {
    std::string model;
    std::string model_type;            // "spin-boson" | "boson-boson"
    int outcomes = 2;
    double delta_S = 0.0;              // nats
    double f_A_used = 1.0;
    double varentropy_cap_used = 1.0;  // cap actually placed in the denominator
    std::string cap_choice = "f_A";
    double Omega = 0.0;                // rad/s
    double chi = 1.0;
    double bath_integral = 0.0;        // (rad/s)^2
    double tau_min = 0.0;              // s
    std::string warning;               // empty, or e.g. "no entropy change"

    // Which relation produced each derived field.
    std::string provenance_delta_S;
    std::string provenance_Omega;
    std::string provenance_tau_min;

    // Flat key/value record; doubles as shortest round-trip strings, non-finite as "inf"/"-inf"/"nan".
    std::vector<std::pair<std::string, std::string>> to_flat() const;
    static BoundReport from_flat(const std::vector<std::pair<std::string, std::string>>& flat);
    std::string to_json() const;
    static BoundReport from_json(const std::string& text);
};

// `observed_varentropy_max` is required (InvalidArgument otherwise) when
// cap == ObservedVarentropy; the cap is then its square root. The choice only
// applies to boson-boson models; spin-boson always uses f_A.
BoundReport tau_min(const MeasurementModel& model, CapChoice cap = CapChoice::FA,
                    std::optional<double> observed_varentropy_max = std::nullopt);

struct Fig2Row {
    double g = 0.0;        // rad/s
    double theta = 0.0;
    double tau_min = 0.0;  // s
};

// (ln 2 / 2g) sqrt(tanh(theta/2)) per g (N = 1, delta_S = ln 2, f_A = 1).
std::vector<Fig2Row> fig2_curve(double omega, const Temperature& temp, const std::vector<double>& g_grid);

// Shortest round-trip decimal, scientific below 1e-5 and from 1e16 up;
// "inf", "-inf", "nan" for non-finite values.
std::string format_double(double v);
// Inverse of format_double; throws InvalidArgument on malformed input.
double parse_double(const std::string& s);

} // namespace qmt
