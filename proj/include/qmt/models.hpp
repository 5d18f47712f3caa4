#pragma once

// The two worked measurement models.
//
// Spin-boson: m qubits Q, each correlated with an apparatus register of N
// spins; every spin couples to every bath mode via sigma_z (x) g_k (a_k + a_k^dag).
// Boson-boson: one qubit Q, a bosonic apparatus mode b holding the cat
// x|0>|alpha> + y|1>|-alpha>, coupled by g_k (b a_k^dag + b^dag a_k).
//
// Layout order is always Q factors, apparatus factors, then bath modes E1..EK.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qmt/environment.hpp"
#include "qmt/qlinalg.hpp"

namespace qmt {

struct Amplitudes {
    cplx x;
    cplx y;

    // Throws InvalidState unless |x|^2 + |y|^2 = 1 within 1e-12.
    static Amplitudes make(cplx x, cplx y);
};

// H = H_A + H_E + H_int with H_E = sum_k omega_k a_k^dag a_k and H_A a pointer
// diagonal term (spins: omega_A/2 sum sigma_z; boson: omega_A b^dag b).
struct HamiltonianOptions {
    bool environment = true;
    bool interaction = true;
    double apparatus_frequency = 0.0;  // rad/s; 0 means H_A = 0
};

struct ModelLimits {
    double truncation_tolerance = kDefaultLeakageTol;
    std::size_t dimension_cap = 4096;
};

struct SpinBosonModel {
    int qubits = 1;
    int spins_per_qubit = 1;
    // 2^qubits amplitudes over the computational basis of Q (qubit 1 most significant).
    Vector state;
    BathSpec bath;
    Temperature temperature;
    HamiltonianOptions hamiltonian{};
    ModelLimits limits{};
    std::vector<std::string> outcome_labels{};

    static SpinBosonModel single(Amplitudes amps, int spins, BathSpec bath, Temperature temp);
    static SpinBosonModel multi(Vector state, int qubits, int spins, BathSpec bath, Temperature temp);
};

struct BosonBosonModel {
    cplx alpha;
    Amplitudes amplitudes;
    std::size_t apparatus_trunc = 0;  // 0 selects ceil(|alpha|^2 + 8|alpha| + 10)
    BathSpec bath;
    Temperature temperature;
    HamiltonianOptions hamiltonian{};
    ModelLimits limits{};
    std::vector<std::string> outcome_labels{};

    std::size_t effective_apparatus_trunc() const;
};

using MeasurementModel = std::variant<SpinBosonModel, BosonBosonModel>;

std::string describe(const MeasurementModel& model);
int outcome_count(const MeasurementModel& model);
const BathSpec& bath_of(const MeasurementModel& model);
const Temperature& temperature_of(const MeasurementModel& model);
const HamiltonianOptions& hamiltonian_options(const MeasurementModel& model);
const ModelLimits& limits_of(const MeasurementModel& model);
// True when the pointer projectors commute exactly with H_int.
bool has_exact_pointers(const MeasurementModel& model);

SpaceLayout system_apparatus_layout(const MeasurementModel& model);
// Bath modes as simulated (discrete baths only).
SpaceLayout environment_layout(const MeasurementModel& model);
SpaceLayout full_layout(const MeasurementModel& model);
std::vector<std::string> system_apparatus_labels(const MeasurementModel& model);

// Normalised Fock-basis coherent state; throws TruncationTooSmall when the
// discarded Poisson tail exceeds `leakage_tol`.
Vector coherent_state(cplx alpha, std::size_t trunc, double leakage_tol = kDefaultLeakageTol,
                      double* leakage = nullptr);
// 1 - e^{-|alpha|^2} sum_{n<trunc} |alpha|^{2n}/n!
double coherent_leakage(cplx alpha, std::size_t trunc);

// One entry per outcome j: the branch vector Pi_j|psi^Q> (x) |a_j> (normalised)
// and its weight <psi^Q|Pi_j|psi^Q>.
struct Branch {
    Vector vector;
    double weight = 0.0;
};
std::vector<Branch> branches(const MeasurementModel& model);

Vector pre_measurement_vector(const MeasurementModel& model);
DensityOperator pre_measurement_state(const MeasurementModel& model);
DensityOperator post_measurement_state(const MeasurementModel& model);

// Projectors on Q (x) A whose expectations give outcome populations. Spin-boson:
// I_Q (x) |a_j><a_j| on the pointer register. Boson-boson (non-orthogonal
// pointers): Pi_j (x) I_A on the system.
std::vector<Matrix> outcome_projectors(const MeasurementModel& model);
// Apparatus pointer projectors I_Q (x) |a_j><a_j| (not necessarily orthogonal).
std::vector<Matrix> pointer_projectors(const MeasurementModel& model);

// Thermal product state of the simulated bath modes, labels E1..EK.
DensityOperator environment_state(const MeasurementModel& model);
// Per-mode truncated thermal populations.
std::vector<std::vector<double>> environment_populations(const MeasurementModel& model);

// A term sum_t A_t (x) B_t with A_t on Q(x)A and B_t on a single bath mode.
struct LocalTerm {
    Matrix system_apparatus;
    std::size_t mode = 0;
    Matrix bath;
};
std::vector<LocalTerm> interaction_terms(const MeasurementModel& model);

// Dense operators on the full layout. Throws NotRealizable for continuum
// baths and TooLarge above the dimension cap.
HermitianOperator interaction_hamiltonian(const MeasurementModel& model);
HermitianOperator environment_hamiltonian(const MeasurementModel& model);
HermitianOperator apparatus_hamiltonian(const MeasurementModel& model);
HermitianOperator total_hamiltonian(const MeasurementModel& model);

// sum_{i1,i2} Tr(h_{i1,1} h_{i2,1} rho^QA) on the pre-measurement state.
double chi_prefactor(const SpinBosonModel& model);

struct InteractionVariance {
    double variance = 0.0;                // closed form used by the bound, (rad/s)^2
    std::optional<double> exact;          // boson-boson: sum g^2((1+|a|^2) n + |a|^2 (n+1))
    double chi = 1.0;
    double bath_integral = 0.0;
    double delta() const;                 // sqrt(variance)
};

InteractionVariance delta_H_int_closed_form(const MeasurementModel& model);

// <H_int> and Var(H_int) in rho^QA (x) rho^E evaluated from the local-term
// expansion on the truncated operators, without forming the global matrix.
Moments interaction_moments_numeric(const MeasurementModel& model);

// max_j ||[H_int, Pi_j (x) I_E]|| / ||H_int|| over pointer projectors (spectral norms).
double pointer_commutation_defect(const MeasurementModel& model);

} // namespace qmt
