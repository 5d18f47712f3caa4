#include "qmt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmt/entropy.hpp"
#include "qmt/errors.hpp"
#include "qmt/kernels.hpp"

namespace qmt {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

constexpr double kEnsembleCutoff = 1e-16;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Product thermal weights over the environment basis (E1 most significant).
std::vector<double> product_weights(const std::vector<std::vector<double>>& pops) {
    std::vector<double> w{1.0};
    for (const auto& p : pops) {
        std::vector<double> next;
        next.reserve(w.size() * p.size());
        for (double a : w)
            for (double b : p) next.push_back(a * b);
        w = std::move(next);
    }
    return w;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

std::vector<double> uniform_times(double t_max, std::size_t points) {
    if (points < 2 || !(t_max > 0.0) || !std::isfinite(t_max))
        fail(ErrorKind::InvalidArgument, "uniform grid needs >= 2 points and a positive finite t_max");
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i) t[i] = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
    return t;
}

std::vector<double> default_times(const MeasurementModel& model) {
    const double omega = delta_H_int_closed_form(model).delta();
    if (!(omega > 0.0)) fail(ErrorKind::InvalidArgument, "default sampling needs a nonzero interaction; pass t_max");
    return uniform_times(5.0 / omega, 400);
}

Trajectory run_trajectory(const MeasurementModel& model, std::span<const double> times) {
    if (!bath_of(model).is_discrete()) fail(ErrorKind::NotRealizable, "dynamics needs a discrete bath");
    if (times.empty() || times.front() != 0.0) fail(ErrorKind::InvalidArgument, "sample times must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) fail(ErrorKind::InvalidArgument, "sample times must be strictly increasing");

    const SpaceLayout full = full_layout(model);
    const SpaceLayout qa = system_apparatus_layout(model);
    const auto qa_labels = qa.labels();
    const std::size_t dim = full.total_dim();
    if (dim > limits_of(model).dimension_cap)
        fail(ErrorKind::TooLarge, "total dimension " + std::to_string(dim) + " exceeds cap " +
                                      std::to_string(limits_of(model).dimension_cap));
    const std::size_t dqa = qa.total_dim();
    const std::size_t de = dim / dqa;

    const HermitianOperator h = total_hamiltonian(model);
    const Matrix h_int = interaction_hamiltonian(model).matrix();
    const EigenSystem es = eigensystem(h.matrix());

    // Initial ensemble: psi^QA (x) |n_E> with thermal weight p_n.
    const Vector psi = pre_measurement_vector(model);
    const auto all_weights = product_weights(environment_populations(model));
    const double w_max = *std::max_element(all_weights.begin(), all_weights.end());
    std::vector<std::size_t> kept;
    for (std::size_t n = 0; n < all_weights.size(); ++n)
        if (all_weights[n] > kEnsembleCutoff * w_max) kept.push_back(n);
    std::vector<double> weights;
    Matrix psi0 = Matrix::Zero(ix(dim), ix(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        weights.push_back(all_weights[kept[c]]);
        for (std::size_t a = 0; a < dqa; ++a) psi0(ix(a * de + kept[c]), ix(c)) = psi[ix(a)];
    }
    std::vector<double> sorted_weights = weights;
    std::sort(sorted_weights.begin(), sorted_weights.end());
    Eigen::VectorXd sqrt_w(ix(weights.size()));
    for (std::size_t c = 0; c < weights.size(); ++c) sqrt_w[ix(c)] = std::sqrt(weights[c]);

    const Matrix c0 = es.vectors.adjoint() * psi0;
    const Matrix w_int = h_int * es.vectors;

    const DensityOperator rho_m = post_measurement_state(model);
    const auto projectors = outcome_projectors(model);

    Trajectory tr;
    tr.times.assign(times.begin(), times.end());
    tr.entropy_M = von_neumann_entropy(rho_m);
    tr.outcomes = outcome_count(model);
    tr.approximate_pointer = !has_exact_pointers(model);
    tr.dimension = dim;
    tr.ensemble_size = kept.size();

    const auto k = ix(kept.size());
    Vector phase(ix(dim));
    Matrix c(ix(dim), k);
    for (double t : times) {
        for (std::size_t i = 0; i < dim; ++i) phase[ix(i)] = std::polar(1.0, -es.values[ix(i)] * t);
        for (Eigen::Index col = 0; col < k; ++col)
            kernels::cmul({phase.data(), dim}, {c0.col(col).data(), dim}, {c.col(col).data(), dim});
        const Matrix phi = es.vectors * c;
        const Matrix h_phi = w_int * c;

        const DensityOperator rho_qa(qa, partial_trace_ensemble(full, qa_labels, phi, weights));
        const EntropyMoments em = entropy_moments(rho_qa);
        tr.entropy.push_back(em.entropy);
        tr.varentropy.push_back(em.varentropy);

        double rel = kInf;
        try {
            rel = relative_entropy(rho_qa, rho_m);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SupportMismatch || has_exact_pointers(model)) throw;
            ++tr.support_violations;
        }
        tr.rel_entropy_to_M.push_back(rel);

        double mean = 0.0;
        double second = 0.0;
        for (Eigen::Index col = 0; col < k; ++col) {
            const double w = weights[static_cast<std::size_t>(col)];
            mean += w * kernels::dotc({phi.col(col).data(), dim}, {h_phi.col(col).data(), dim}).real();
            second += w * kernels::norm2({h_phi.col(col).data(), dim});
        }
        tr.dH_int_variance.push_back(std::max(0.0, second - mean * mean));

        std::vector<double> pops;
        for (const auto& p : projectors) pops.push_back((p * rho_qa.matrix()).trace().real());
        tr.pointer_populations.push_back(std::move(pops));

        // Nonzero global spectrum = spectrum of W^1/2 (Phi^dag Phi) W^1/2.
        const Matrix gram = sqrt_w.asDiagonal() * (phi.adjoint() * phi) * sqrt_w.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Matrix> gs(gram, Eigen::EigenvaluesOnly);
        std::vector<double> ev(gs.eigenvalues().data(), gs.eigenvalues().data() + gs.eigenvalues().size());
        std::sort(ev.begin(), ev.end());
        tr.global_spectrum_drift = std::max(tr.global_spectrum_drift, max_abs_diff(ev, sorted_weights));
    }

    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        for (std::size_t j = 0; j < tr.pointer_populations[i].size(); ++j)
            tr.population_drift =
                std::max(tr.population_drift, std::abs(tr.pointer_populations[i][j] - tr.pointer_populations[0][j]));
        tr.variance_drift = std::max(tr.variance_drift, std::abs(tr.dH_int_variance[i] - tr.dH_int_variance[0]));
    }

    if (tr.times.size() >= 3) {
        const auto rate = entropy_rate(tr).rate;
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            tr.speed_margin.push_back(2.0 * std::sqrt(tr.varentropy[i] * tr.dH_int_variance[i]) - std::abs(rate[i]));
    } else {
        tr.speed_margin.assign(tr.times.size(), std::numeric_limits<double>::quiet_NaN());
    }
    return tr;
}

std::vector<double> finite_difference(std::span<const double> t, std::span<const double> f) {
    if (t.size() != f.size()) fail(ErrorKind::InvalidArgument, "times and values differ in length");
    const std::size_t n = t.size();
    if (n < 3) fail(ErrorKind::InsufficientSamples, "finite differences need at least 3 samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(t[i] > t[i - 1])) fail(ErrorKind::InvalidArgument, "times must be strictly increasing");
    std::vector<double> d(n);
    // Second-order one-sided three-point stencils at the ends.
    {
        const double h1 = t[1] - t[0];
        const double h2 = t[2] - t[1];
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
    }
    {
        const double h1 = t[n - 2] - t[n - 3];
        const double h2 = t[n - 1] - t[n - 2];
        d[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
                   (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h1 = t[i] - t[i - 1];
        const double h2 = t[i + 1] - t[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + 1];
    }
    return d;
}

RateEstimate rate_with_sensitivity(std::span<const double> times, std::span<const double> values) {
    RateEstimate out;
    out.rate = finite_difference(times, values);
    if (times.size() < 5) return out;
    std::vector<double> th, vh;
    for (std::size_t i = 0; i < times.size(); i += 2) {
        th.push_back(times[i]);
        vh.push_back(values[i]);
    }
    const auto half = finite_difference(th, vh);
    for (std::size_t i = 0; i < half.size(); ++i)
        out.sensitivity = std::max(out.sensitivity, std::abs(half[i] - out.rate[2 * i]));
    return out;
}

RateEstimate entropy_rate(const Trajectory& traj) { return rate_with_sensitivity(traj.times, traj.entropy); }

SpeedLimitCheck check_speed_limit(const Trajectory& traj) {
    const RateEstimate r = entropy_rate(traj);
    SpeedLimitCheck out;
    out.tolerance = 3.0 * r.sensitivity;
    out.min_margin = kInf;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double bound = 2.0 * std::sqrt(traj.varentropy[i] * traj.dH_int_variance[i]);
        const double margin = bound - std::abs(r.rate[i]);
        out.min_margin = std::min(out.min_margin, margin);
        out.max_violation = std::max(out.max_violation, -margin);
    }
    out.passed = out.max_violation <= out.tolerance;
    return out;
}

IdentityCheck verify_relative_entropy_identity(const Trajectory& traj) {
    IdentityCheck out;
    out.asserted = !traj.approximate_pointer;
    // Only the leading run of finite relative entropies can be differentiated.
    std::size_t n = 0;
    while (n < traj.times.size() && std::isfinite(traj.rel_entropy_to_M[n])) ++n;
    out.samples_used = n;
    if (n < 3) {
        out.passed = !out.asserted;
        out.max_defect = out.asserted ? kInf : 0.0;
        return out;
    }
    const std::span<const double> t(traj.times.data(), n);
    const RateEstimate ds = rate_with_sensitivity(t, std::span<const double>(traj.entropy.data(), n));
    const RateEstimate dr = rate_with_sensitivity(t, std::span<const double>(traj.rel_entropy_to_M.data(), n));
    for (std::size_t i = 0; i < n; ++i)
        out.max_defect = std::max(out.max_defect, std::abs(std::abs(dr.rate[i]) - std::abs(ds.rate[i])));
    out.tolerance = ds.sensitivity + dr.sensitivity;
    out.passed = !out.asserted || out.max_defect <= out.tolerance;
    return out;
}

IntegratedSpeedCheck integrated_speed_check(const Trajectory& traj, double f_a) {
    IntegratedSpeedCheck out;
    double running_max = 0.0;
    out.min_slack = kInf;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        running_max = std::max(running_max, std::sqrt(traj.dH_int_variance[i]));
        const double slack =
            2.0 * f_a * traj.times[i] * running_max - (traj.entropy[i] - traj.entropy.front());
        out.slack.push_back(slack);
        if (traj.times[i] > 0.0) out.min_slack = std::min(out.min_slack, slack);
    }
    if (traj.times.size() < 2) out.min_slack = 0.0;
    out.passed = out.min_slack >= -1e-9;
    return out;
}

std::optional<double> measurement_time_estimate(const Trajectory& traj, double epsilon) {
    if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
    const auto& r = traj.rel_entropy_to_M;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] <= epsilon)) continue;
        if (i == 0) return traj.times[0];
        if (!std::isfinite(r[i - 1])) return traj.times[i];
        const double frac = (r[i - 1] - epsilon) / (r[i - 1] - r[i]);
        return traj.times[i - 1] + frac * (traj.times[i] - traj.times[i - 1]);
    }
    return std::nullopt;
}

} // namespace qmt
