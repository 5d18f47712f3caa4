#include "qmt/models.hpp"

#include <cmath>
#include <sstream>

#include "qmt/errors.hpp"

namespace qmt {

namespace {

constexpr double kAmplitudeTol = 1e-12;

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string qubit_label(int m, int i) { return m == 1 ? "Q" : "Q" + std::to_string(i + 1); }

std::string spin_label(int m, int n, int i, int j) {
    if (m == 1 && n == 1) return "A";
    if (m == 1) return "A" + std::to_string(j + 1);
    return "A" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

std::size_t pow2(int k) { return std::size_t{1} << k; }

// Apparatus register index of the pointer state correlated with outcome s:
// every spin of qubit i points along bit i of s.
std::size_t pointer_index(std::size_t s, int m, int n) {
    std::size_t idx = 0;
    for (int i = 0; i < m; ++i) {
        const std::size_t bit = (s >> (m - 1 - i)) & 1U;
        for (int j = 0; j < n; ++j) idx = (idx << 1) | bit;
    }
    return idx;
}

void check_cap(const MeasurementModel& model, std::size_t dim) {
    const auto cap = limits_of(model).dimension_cap;
    if (dim > cap)
        fail(ErrorKind::TooLarge, "total dimension " + std::to_string(dim) + " exceeds cap " + std::to_string(cap));
}

Matrix embed_in_environment(const Matrix& op, std::size_t mode, const SpaceLayout& env) {
    const auto& f = env.factors()[mode];
    return embed(op, SpaceLayout({f}), env);
}

double trace_real(const Matrix& rho, const Matrix& op) { return (rho * op).trace().real(); }

Matrix spin_total_z(const SpinBosonModel& sb, const SpaceLayout& qa) {
    Matrix h = Matrix::Zero(ix(qa.total_dim()), ix(qa.total_dim()));
    for (int i = 0; i < sb.qubits; ++i)
        for (int j = 0; j < sb.spins_per_qubit; ++j)
            h += embed(ops::sigma_z(), SpaceLayout::two_level(spin_label(sb.qubits, sb.spins_per_qubit, i, j)), qa);
    return h;
}

Matrix apparatus_annihilation(const BosonBosonModel& bb, const SpaceLayout& qa) {
    return embed(ops::annihilation(bb.effective_apparatus_trunc()),
                 SpaceLayout::boson("A", bb.effective_apparatus_trunc()), qa);
}

} // namespace

Amplitudes Amplitudes::make(cplx x, cplx y) {
    const double n = std::norm(x) + std::norm(y);
    if (std::abs(n - 1.0) > kAmplitudeTol) fail(ErrorKind::InvalidState, "amplitudes are not normalised");
    return {x, y};
}

SpinBosonModel SpinBosonModel::single(Amplitudes amps, int spins, BathSpec bath, Temperature temp) {
    Vector state(2);
    state << amps.x, amps.y;
    return multi(std::move(state), 1, spins, std::move(bath), temp);
}

SpinBosonModel SpinBosonModel::multi(Vector state, int qubits, int spins, BathSpec bath, Temperature temp) {
    if (qubits < 1 || spins < 1) fail(ErrorKind::InvalidArgument, "need at least one qubit and one spin per qubit");
    if (static_cast<std::size_t>(state.size()) != pow2(qubits))
        fail(ErrorKind::LayoutConflict, "state needs 2^m amplitudes");
    if (std::abs(state.squaredNorm() - 1.0) > kAmplitudeTol)
        fail(ErrorKind::InvalidState, "qubit state is not normalised");
    return SpinBosonModel{qubits, spins, std::move(state), std::move(bath), temp};
}

std::size_t BosonBosonModel::effective_apparatus_trunc() const {
    if (apparatus_trunc > 0) return apparatus_trunc;
    const double a = std::abs(alpha);
    return static_cast<std::size_t>(std::ceil(a * a + 8.0 * a + 10.0));
}

std::string describe(const MeasurementModel& model) {
    std::ostringstream os;
    const auto& bath = bath_of(model);
    const std::string bath_desc =
        bath.is_discrete() ? std::to_string(bath.modes().size()) + " modes" : std::string("continuum");
    if (const auto* sb = std::get_if<SpinBosonModel>(&model))
        os << "spin-boson m=" << sb->qubits << " N=" << sb->spins_per_qubit << " bath=" << bath_desc;
    else {
        const auto& bb = std::get<BosonBosonModel>(model);
        os << "boson-boson |alpha|=" << std::abs(bb.alpha) << " bath=" << bath_desc;
    }
    return os.str();
}

int outcome_count(const MeasurementModel& model) {
    if (const auto* sb = std::get_if<SpinBosonModel>(&model)) return static_cast<int>(pow2(sb->qubits));
    return 2;
}

const BathSpec& bath_of(const MeasurementModel& model) {
    return std::visit([](const auto& m) -> const BathSpec& { return m.bath; }, model);
}

const Temperature& temperature_of(const MeasurementModel& model) {
    return std::visit([](const auto& m) -> const Temperature& { return m.temperature; }, model);
}

const HamiltonianOptions& hamiltonian_options(const MeasurementModel& model) {
    return std::visit([](const auto& m) -> const HamiltonianOptions& { return m.hamiltonian; }, model);
}

const ModelLimits& limits_of(const MeasurementModel& model) {
    return std::visit([](const auto& m) -> const ModelLimits& { return m.limits; }, model);
}

bool has_exact_pointers(const MeasurementModel& model) { return std::holds_alternative<SpinBosonModel>(model); }

SpaceLayout system_apparatus_layout(const MeasurementModel& model) {
    std::vector<Factor> f;
    if (const auto* sb = std::get_if<SpinBosonModel>(&model)) {
        for (int i = 0; i < sb->qubits; ++i) f.push_back({qubit_label(sb->qubits, i), 2, FactorKind::TwoLevel});
        for (int i = 0; i < sb->qubits; ++i)
            for (int j = 0; j < sb->spins_per_qubit; ++j)
                f.push_back({spin_label(sb->qubits, sb->spins_per_qubit, i, j), 2, FactorKind::TwoLevel});
    } else {
        const auto& bb = std::get<BosonBosonModel>(model);
        f.push_back({"Q", 2, FactorKind::TwoLevel});
        f.push_back({"A", bb.effective_apparatus_trunc(), FactorKind::Boson});
    }
    return SpaceLayout(std::move(f));
}

SpaceLayout environment_layout(const MeasurementModel& model) {
    const auto& modes = bath_of(model).modes();
    std::vector<Factor> f;
    for (std::size_t k = 0; k < modes.size(); ++k) f.push_back({"E" + std::to_string(k + 1), modes[k].trunc, FactorKind::Boson});
    return SpaceLayout(std::move(f));
}

SpaceLayout full_layout(const MeasurementModel& model) {
    return system_apparatus_layout(model).concat(environment_layout(model));
}

std::vector<std::string> system_apparatus_labels(const MeasurementModel& model) {
    return system_apparatus_layout(model).labels();
}

double coherent_leakage(cplx alpha, std::size_t trunc) {
    // Poisson tail sum_{n >= trunc} e^{-m} m^n / n!, accumulated directly.
    const double mean = std::norm(alpha);
    if (mean == 0.0) return trunc == 0 ? 1.0 : 0.0;
    double log_p = -mean + static_cast<double>(trunc) * std::log(mean) - std::lgamma(static_cast<double>(trunc) + 1.0);
    double tail = 0.0;
    for (std::size_t n = trunc; n < trunc + 100000; ++n) {
        const double p = std::exp(log_p);
        tail += p;
        if (static_cast<double>(n) > mean && p < 1e-18 * std::max(tail, 1e-300)) break;
        log_p += std::log(mean) - std::log(static_cast<double>(n) + 1.0);
    }
    return tail;
}

Vector coherent_state(cplx alpha, std::size_t trunc, double leakage_tol, double* leakage) {
    if (trunc < 1) fail(ErrorKind::TruncationTooSmall, "coherent state truncation must be positive");
    const double leak = coherent_leakage(alpha, trunc);
    if (leakage) *leakage = leak;
    if (leak > leakage_tol)
        fail(ErrorKind::TruncationTooSmall,
             "coherent-state leakage " + num(leak) + " exceeds tolerance at trunc " + std::to_string(trunc));
    Vector v(ix(trunc));
    cplx c = std::exp(-0.5 * std::norm(alpha));
    for (std::size_t n = 0; n < trunc; ++n) {
        v[ix(n)] = c;
        c *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return v / v.norm();
}

std::vector<Branch> branches(const MeasurementModel& model) {
    const SpaceLayout qa = system_apparatus_layout(model);
    std::vector<Branch> out;
    if (const auto* sb = std::get_if<SpinBosonModel>(&model)) {
        const std::size_t da = pow2(sb->qubits * sb->spins_per_qubit);
        for (std::size_t s = 0; s < pow2(sb->qubits); ++s) {
            Vector v = Vector::Zero(ix(qa.total_dim()));
            v[ix(s * da + pointer_index(s, sb->qubits, sb->spins_per_qubit))] = 1.0;
            out.push_back({std::move(v), std::norm(sb->state[ix(s)])});
        }
        return out;
    }
    const auto& bb = std::get<BosonBosonModel>(model);
    const std::size_t d = bb.effective_apparatus_trunc();
    const double tol = bb.limits.truncation_tolerance;
    Vector q0 = Vector::Zero(2), q1 = Vector::Zero(2);
    q0[0] = 1.0;
    q1[1] = 1.0;
    out.push_back({kron(q0, coherent_state(bb.alpha, d, tol)), std::norm(bb.amplitudes.x)});
    out.push_back({kron(q1, coherent_state(-bb.alpha, d, tol)), std::norm(bb.amplitudes.y)});
    return out;
}

Vector pre_measurement_vector(const MeasurementModel& model) {
    const auto br = branches(model);
    Vector psi = Vector::Zero(br.front().vector.size());
    if (const auto* sb = std::get_if<SpinBosonModel>(&model)) {
        for (std::size_t s = 0; s < br.size(); ++s) psi += sb->state[ix(s)] * br[s].vector;
    } else {
        const auto& bb = std::get<BosonBosonModel>(model);
        psi = bb.amplitudes.x * br[0].vector + bb.amplitudes.y * br[1].vector;
    }
    // The system labels make the branches orthogonal, so this only removes
    // round-off from the truncated coherent states.
    return psi / psi.norm();
}

DensityOperator pre_measurement_state(const MeasurementModel& model) {
    return DensityOperator::from_pure(system_apparatus_layout(model), pre_measurement_vector(model));
}

DensityOperator post_measurement_state(const MeasurementModel& model) {
    const auto br = branches(model);
    const auto d = br.front().vector.size();
    Matrix rho = Matrix::Zero(d, d);
    for (const auto& b : br) rho += b.weight * b.vector * b.vector.adjoint();
    return DensityOperator(system_apparatus_layout(model), std::move(rho));
}

std::vector<Matrix> pointer_projectors(const MeasurementModel& model) {
    std::vector<Matrix> out;
    if (const auto* sb = std::get_if<SpinBosonModel>(&model)) {
        const std::size_t da = pow2(sb->qubits * sb->spins_per_qubit);
        for (std::size_t s = 0; s < pow2(sb->qubits); ++s) {
            Matrix pa = Matrix::Zero(ix(da), ix(da));
            const auto p = ix(pointer_index(s, sb->qubits, sb->spins_per_qubit));
            pa(p, p) = 1.0;
            out.push_back(kron(ops::identity(pow2(sb->qubits)), pa));
        }
        return out;
    }
    const auto& bb = std::get<BosonBosonModel>(model);
    const std::size_t d = bb.effective_apparatus_trunc();
    for (const cplx a : {bb.alpha, -bb.alpha}) {
        const Vector c = coherent_state(a, d, bb.limits.truncation_tolerance);
        out.push_back(kron(ops::identity(2), c * c.adjoint()));
    }
    return out;
}

std::vector<Matrix> outcome_projectors(const MeasurementModel& model) {
    if (std::holds_alternative<SpinBosonModel>(model)) return pointer_projectors(model);
    const auto& bb = std::get<BosonBosonModel>(model);
    std::vector<Matrix> out;
    for (int j = 0; j < 2; ++j) {
        Matrix q = Matrix::Zero(2, 2);
        q(j, j) = 1.0;
        out.push_back(kron(q, ops::identity(bb.effective_apparatus_trunc())));
    }
    return out;
}

std::vector<std::vector<double>> environment_populations(const MeasurementModel& model) {
    const auto& modes = bath_of(model).modes();
    const auto& temp = temperature_of(model);
    const double tol = limits_of(model).truncation_tolerance;
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        double leak = 0.0;
        out.push_back(thermal_populations(temp.theta(modes[k].omega), modes[k].trunc, &leak));
        if (leak > tol)
            fail(ErrorKind::TruncationTooSmall, "mode E" + std::to_string(k + 1) + " thermal leakage " +
                                                    num(leak) + " exceeds tolerance");
    }
    return out;
}

DensityOperator environment_state(const MeasurementModel& model) {
    const auto& modes = bath_of(model).modes();
    std::vector<DensityOperator> parts;
    for (std::size_t k = 0; k < modes.size(); ++k)
        parts.push_back(thermal_state(modes[k].omega, temperature_of(model), modes[k].trunc,
                                      "E" + std::to_string(k + 1), limits_of(model).truncation_tolerance)
                            .state);
    if (parts.empty()) fail(ErrorKind::InvalidArgument, "bath has no modes");
    return tensor(std::span<const DensityOperator>(parts));
}

std::vector<LocalTerm> interaction_terms(const MeasurementModel& model) {
    const auto& modes = bath_of(model).modes();
    std::vector<LocalTerm> terms;
    if (!hamiltonian_options(model).interaction) return terms;
    const SpaceLayout qa = system_apparatus_layout(model);
    if (const auto* sb = std::get_if<SpinBosonModel>(&model)) {
        const Matrix h1 = spin_total_z(*sb, qa);
        for (std::size_t k = 0; k < modes.size(); ++k) {
            const Matrix x = ops::annihilation(modes[k].trunc) + ops::creation(modes[k].trunc);
            terms.push_back({h1, k, modes[k].g * x});
        }
        return terms;
    }
    const auto& bb = std::get<BosonBosonModel>(model);
    const Matrix b = apparatus_annihilation(bb, qa);
    const Matrix b_dag = b.adjoint();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        terms.push_back({b, k, modes[k].g * ops::creation(modes[k].trunc)});
        terms.push_back({b_dag, k, modes[k].g * ops::annihilation(modes[k].trunc)});
    }
    return terms;
}

HermitianOperator interaction_hamiltonian(const MeasurementModel& model) {
    const SpaceLayout full = full_layout(model);
    check_cap(model, full.total_dim());
    const SpaceLayout env = environment_layout(model);
    Matrix h = Matrix::Zero(ix(full.total_dim()), ix(full.total_dim()));
    for (const auto& t : interaction_terms(model)) h += kron(t.system_apparatus, embed_in_environment(t.bath, t.mode, env));
    return HermitianOperator(full, std::move(h), Unit::AngularFrequency);
}

HermitianOperator environment_hamiltonian(const MeasurementModel& model) {
    const SpaceLayout full = full_layout(model);
    check_cap(model, full.total_dim());
    const SpaceLayout env = environment_layout(model);
    Matrix he = Matrix::Zero(ix(env.total_dim()), ix(env.total_dim()));
    if (hamiltonian_options(model).environment) {
        const auto& modes = bath_of(model).modes();
        for (std::size_t k = 0; k < modes.size(); ++k)
            he += modes[k].omega * embed_in_environment(ops::number(modes[k].trunc), k, env);
    }
    const auto dqa = system_apparatus_layout(model).total_dim();
    return HermitianOperator(full, kron(ops::identity(dqa), he), Unit::AngularFrequency);
}

HermitianOperator apparatus_hamiltonian(const MeasurementModel& model) {
    const SpaceLayout full = full_layout(model);
    check_cap(model, full.total_dim());
    const SpaceLayout qa = system_apparatus_layout(model);
    const double w = hamiltonian_options(model).apparatus_frequency;
    Matrix ha = Matrix::Zero(ix(qa.total_dim()), ix(qa.total_dim()));
    if (w != 0.0) {
        if (const auto* sb = std::get_if<SpinBosonModel>(&model)) {
            ha = 0.5 * w * spin_total_z(*sb, qa);
        } else {
            const Matrix b = apparatus_annihilation(std::get<BosonBosonModel>(model), qa);
            ha = w * b.adjoint() * b;
        }
    }
    const auto de = environment_layout(model).total_dim();
    return HermitianOperator(full, kron(ha, ops::identity(de)), Unit::AngularFrequency);
}

HermitianOperator total_hamiltonian(const MeasurementModel& model) {
    return apparatus_hamiltonian(model) + environment_hamiltonian(model) + interaction_hamiltonian(model);
}

double chi_prefactor(const SpinBosonModel& model) {
    const MeasurementModel mm = model;
    const SpaceLayout qa = system_apparatus_layout(mm);
    const Matrix rho = pre_measurement_state(mm).matrix();
    std::vector<Matrix> h;
    for (int i = 0; i < model.qubits; ++i)
        h.push_back(embed(ops::sigma_z(), SpaceLayout::two_level(spin_label(model.qubits, model.spins_per_qubit, i, 0)), qa));
    double chi = 0.0;
    for (const auto& a : h)
        for (const auto& b : h) chi += trace_real(rho, a * b);
    return chi;
}

double InteractionVariance::delta() const { return std::sqrt(variance); }

InteractionVariance delta_H_int_closed_form(const MeasurementModel& model) {
    InteractionVariance out;
    const auto& bath = bath_of(model);
    const auto& temp = temperature_of(model);
    out.bath_integral = bath_integral(bath, temp);
    const double scale = hamiltonian_options(model).interaction ? 1.0 : 0.0;
    if (const auto* sb = std::get_if<SpinBosonModel>(&model)) {
        out.chi = chi_prefactor(*sb);
        const double n = sb->spins_per_qubit;
        out.variance = scale * out.chi * n * n * out.bath_integral;
        return out;
    }
    const auto& bb = std::get<BosonBosonModel>(model);
    const double a2 = std::norm(bb.alpha);
    out.chi = 1.0;
    out.variance = scale * a2 * out.bath_integral;
    if (bath.is_discrete()) {
        double exact = 0.0;
        for (const auto& m : bath.modes()) {
            const double nbar = occupation(m.omega, temp);
            exact += m.g * m.g * ((1.0 + a2) * nbar + a2 * (nbar + 1.0));
        }
        out.exact = scale * exact;
    }
    return out;
}

Moments interaction_moments_numeric(const MeasurementModel& model) {
    const auto terms = interaction_terms(model);
    if (terms.empty()) return {};
    const Matrix rho = pre_measurement_state(model).matrix();
    const auto pops = environment_populations(model);
    const auto bath_mean = [&](const Matrix& b, std::size_t k) {
        cplx s = 0.0;
        for (std::size_t n = 0; n < pops[k].size(); ++n) s += pops[k][n] * b(ix(n), ix(n));
        return s;
    };
    cplx mean = 0.0;
    cplx second = 0.0;
    for (const auto& t : terms) mean += (rho * t.system_apparatus).trace() * bath_mean(t.bath, t.mode);
    for (const auto& s : terms)
        for (const auto& t : terms) {
            const cplx qa = (rho * s.system_apparatus * t.system_apparatus).trace();
            const cplx e = s.mode == t.mode ? bath_mean(s.bath * t.bath, s.mode)
                                            : bath_mean(s.bath, s.mode) * bath_mean(t.bath, t.mode);
            second += qa * e;
        }
    const double m = mean.real();
    return {m, std::max(0.0, second.real() - m * m)};
}

double pointer_commutation_defect(const MeasurementModel& model) {
    const HermitianOperator h = interaction_hamiltonian(model);
    const Eigen::SelfAdjointEigenSolver<Matrix> hs(h.matrix(), Eigen::EigenvaluesOnly);
    const double h_norm = hs.eigenvalues().cwiseAbs().maxCoeff();
    if (h_norm == 0.0) return 0.0;
    const auto de = environment_layout(model).total_dim();
    double worst = 0.0;
    for (const auto& p : pointer_projectors(model)) {
        const Matrix pf = kron(p, ops::identity(de));
        // i[H, P] is Hermitian; its spectral norm is the largest |eigenvalue|.
        const Matrix k = cplx(0.0, 1.0) * (h.matrix() * pf - pf * h.matrix());
        const Eigen::SelfAdjointEigenSolver<Matrix> ks(k, Eigen::EigenvaluesOnly);
        worst = std::max(worst, ks.eigenvalues().cwiseAbs().maxCoeff());
    }
    return worst / h_norm;
}

} // namespace qmt
