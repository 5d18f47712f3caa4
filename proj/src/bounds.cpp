#include "qmt/bounds.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "qmt/entropy.hpp"
#include "qmt/errors.hpp"

namespace qmt {

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) fail(ErrorKind::InvalidArgument, "probability outside [0, 1]");
    double s = 0.0;
    if (p > 0.0) s -= p * std::log(p);
    if (p < 1.0) s -= (1.0 - p) * std::log1p(-p);
    return s;
}

double delta_S_measurement(const MeasurementModel& model) {
    return von_neumann_entropy(post_measurement_state(model)) - von_neumann_entropy(pre_measurement_state(model));
}

std::string to_string(CapChoice c) { return c == CapChoice::FA ? "f_A" : "observed"; }

CapChoice cap_choice_from_string(const std::string& s) {
    if (s == "f_A") return CapChoice::FA;
    if (s == "observed") return CapChoice::ObservedVarentropy;
    fail(ErrorKind::InvalidArgument, "unknown varentropy cap '" + s + "' (expected f_A or observed)");
}

BoundReport tau_min(const MeasurementModel& model, CapChoice cap, std::optional<double> observed_varentropy_max) {
    BoundReport r;
    r.model = describe(model);
    const bool spin = std::holds_alternative<SpinBosonModel>(model);
    r.model_type = spin ? "spin-boson" : "boson-boson";
    r.outcomes = outcome_count(model);
    r.delta_S = std::max(0.0, delta_S_measurement(model));
    r.f_A_used = f_A(r.outcomes);

    const InteractionVariance iv = delta_H_int_closed_form(model);
    r.Omega = iv.delta();
    r.chi = iv.chi;
    r.bath_integral = iv.bath_integral;

    r.provenance_delta_S = "S(rho_M) - S(psi^QA)";
    if (spin) {
        r.provenance_Omega = "sqrt(chi N^2 sum_k g_k^2 coth(theta_k/2))";
        r.provenance_tau_min = "delta_S / (2 f_A Omega)";
    } else {
        r.provenance_Omega = "|alpha| sqrt(sum_k g_k^2 coth(theta_k/2))";
        r.provenance_tau_min = "delta_S / (2 cap Omega)";
    }

    r.varentropy_cap_used = r.f_A_used;
    if (!spin && cap == CapChoice::ObservedVarentropy) {
        if (!observed_varentropy_max || !(*observed_varentropy_max > 0.0))
            fail(ErrorKind::InvalidArgument, "observed varentropy cap needs a positive observed maximum");
        r.varentropy_cap_used = std::sqrt(*observed_varentropy_max);
        r.cap_choice = "observed";
    }

    if (r.delta_S == 0.0) {
        r.tau_min = 0.0;
        r.warning = "no entropy change";
    } else if (r.Omega == 0.0) {
        r.tau_min = std::numeric_limits<double>::infinity();
        r.warning = "no interaction";
    } else {
        r.tau_min = r.delta_S / (2.0 * r.varentropy_cap_used * r.Omega);
    }
    return r;
}

std::vector<Fig2Row> fig2_curve(double omega, const Temperature& temp, const std::vector<double>& g_grid) {
    if (g_grid.empty()) fail(ErrorKind::InvalidArgument, "empty coupling grid");
    if (!(omega > 0.0)) fail(ErrorKind::InvalidFrequency, "mode frequency must be positive");
    const double theta = temp.theta(omega);
    const double root = std::sqrt(std::tanh(0.5 * theta));
    std::vector<Fig2Row> rows;
    rows.reserve(g_grid.size());
    for (double g : g_grid) {
        if (!(g > 0.0)) fail(ErrorKind::InvalidArgument, "couplings must be positive");
        rows.push_back({g, theta, std::log(2.0) / (2.0 * g) * root});
    }
    return rows;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const double a = std::abs(v);
    const bool sci = a != 0.0 && (a >= 1e16 || a < 1e-5);
    const auto res = sci ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific)
                         : std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(ErrorKind::InvalidArgument, "not a number: '" + s + "'");
    return v;
}

std::vector<std::pair<std::string, std::string>> BoundReport::to_flat() const {
    return {
        {"model", model},
        {"model_type", model_type},
        {"outcomes", std::to_string(outcomes)},
        {"delta_S_nats", format_double(delta_S)},
        {"f_A_used", format_double(f_A_used)},
        {"varentropy_cap_used", format_double(varentropy_cap_used)},
        {"cap_choice", cap_choice},
        {"Omega_rad_per_s", format_double(Omega)},
        {"chi", format_double(chi)},
        {"bath_integral_rad2_per_s2", format_double(bath_integral)},
        {"tau_min_seconds", format_double(tau_min)},
        {"warning", warning},
        {"provenance_delta_S", provenance_delta_S},
        {"provenance_Omega", provenance_Omega},
        {"provenance_tau_min", provenance_tau_min},
    };
}

BoundReport BoundReport::from_flat(const std::vector<std::pair<std::string, std::string>>& flat) {
    std::map<std::string, std::string> m(flat.begin(), flat.end());
    const auto get = [&](const char* key) -> const std::string& {
        const auto it = m.find(key);
        if (it == m.end()) fail(ErrorKind::InvalidArgument, std::string("bound report lacks key ") + key);
        return it->second;
    };
    BoundReport r;
    r.model = get("model");
    r.model_type = get("model_type");
    r.outcomes = std::stoi(get("outcomes"));
    r.delta_S = parse_double(get("delta_S_nats"));
    r.f_A_used = parse_double(get("f_A_used"));
    r.varentropy_cap_used = parse_double(get("varentropy_cap_used"));
    r.cap_choice = get("cap_choice");
    r.Omega = parse_double(get("Omega_rad_per_s"));
    r.chi = parse_double(get("chi"));
    r.bath_integral = parse_double(get("bath_integral_rad2_per_s2"));
    r.tau_min = parse_double(get("tau_min_seconds"));
    r.warning = get("warning");
    r.provenance_delta_S = get("provenance_delta_S");
    r.provenance_Omega = get("provenance_Omega");
    r.provenance_tau_min = get("provenance_tau_min");
    return r;
}

namespace {
const std::map<std::string, bool>& numeric_keys() {
    static const std::map<std::string, bool> keys{
        {"delta_S_nats", true}, {"f_A_used", true}, {"varentropy_cap_used", true}, {"Omega_rad_per_s", true},
        {"chi", true}, {"bath_integral_rad2_per_s2", true}, {"tau_min_seconds", true}};
    return keys;
}
} // namespace

std::string BoundReport::to_json() const {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : to_flat()) {
        if (k == "outcomes") {
            j[k] = outcomes;
        } else if (numeric_keys().count(k)) {
            const double d = parse_double(v);
            if (std::isfinite(d))
                j[k] = nlohmann::ordered_json::parse(v);
            else
                j[k] = v;
        } else {
            j[k] = v;
        }
    }
    return j.dump(2);
}

BoundReport BoundReport::from_json(const std::string& text) {
    const auto j = nlohmann::ordered_json::parse(text);
    std::vector<std::pair<std::string, std::string>> flat;
    for (const auto& [k, v] : j.items()) {
        if (v.is_string())
            flat.emplace_back(k, v.get<std::string>());
        else if (v.is_number_integer())
            flat.emplace_back(k, std::to_string(v.get<long long>()));
        else if (v.is_number())
            flat.emplace_back(k, format_double(v.get<double>()));
    }
    return from_flat(flat);
}

} // namespace qmt
