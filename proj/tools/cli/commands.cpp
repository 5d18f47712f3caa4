#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "qmt/bounds.hpp"
#include "qmt/dynamics.hpp"
#include "qmt/entropy.hpp"
#include "qmt/errors.hpp"

#ifndef QMT_VERSION
#define QMT_VERSION "0.0.0"
#endif

namespace qmt::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct Context {
    json config;
    Stamp stamp;
    std::string dir;
    std::vector<std::string> formats;
    const Options& options;
    std::ostream& out;

    bool wants(const std::string& f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }
    void write(const std::string& name, const std::string& content) const {
        write_file(dir, name, content);
        out << "wrote " << (std::filesystem::path(dir) / name).string() << '\n';
    }
};

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ojson report_json(const BoundReport& r) {
    ojson j;
    for (const auto& [k, v] : r.to_flat()) {
        if (k == "outcomes") j[k] = r.outcomes;
        else if (k.find("provenance") == 0 || k == "model" || k == "model_type" || k == "cap_choice" || k == "warning")
            j[k] = v;
        else j[k] = json_number(parse_double(v));
    }
    return j;
}

std::vector<double> simulation_times(const MeasurementModel& model, const SimulateSection& sim) {
    if (sim.t_max) return uniform_times(*sim.t_max, sim.points);
    const double omega = delta_H_int_closed_form(model).delta();
    if (!(omega > 0.0)) throw ConfigError("/simulate/t_max", "required when the interaction variance vanishes");
    return uniform_times(5.0 / omega, sim.points);
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

int cmd_bound(const Context& ctx) {
    const MeasurementModel model = parse_model(ctx.config);
    const BoundSection b = parse_bound(ctx.config);
    std::optional<double> observed;
    if (b.cap == CapChoice::ObservedVarentropy && std::holds_alternative<BosonBosonModel>(model)) {
        if (!ctx.config.contains("simulate"))
            throw ConfigError("/bound/varentropy_cap", "\"observed\" needs a simulate section to sample the trajectory");
        const SimulateSection sim = parse_simulate(ctx.config);
        observed = max_of(run_trajectory(model, simulation_times(model, sim)).varentropy);
    }
    const BoundReport r = tau_min(model, b.cap, observed);

    ctx.out << r.model << "\n  delta_S = " << fmt_g(r.delta_S) << " nats, cap = " << fmt_g(r.varentropy_cap_used)
            << " (" << r.cap_choice << "), Omega = " << fmt_g(r.Omega) << " rad/s\n  tau_min = " << fmt_g(r.tau_min)
            << " s\n";
    if (!r.warning.empty()) ctx.out << "warning: " << r.warning << '\n';

    ctx.write("bound_report.json", render_json(ctx.stamp, report_json(r)));
    if (ctx.wants("csv")) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& [k, v] : r.to_flat()) rows.push_back({k, v});
        ctx.write("bound_report.csv", render_csv(ctx.stamp, {"key", "value"}, rows));
    }
    return kExitOk;
}

int cmd_simulate(const Context& ctx) {
    const MeasurementModel model = parse_model(ctx.config);
    const SimulateSection sim = parse_simulate(ctx.config);
    const BoundSection b = parse_bound(ctx.config);
    const auto times = simulation_times(model, sim);
    const Trajectory tr = run_trajectory(model, times);

    const SpeedLimitCheck speed = check_speed_limit(tr);
    const IdentityCheck ident = verify_relative_entropy_identity(tr);
    const double fa = f_A(tr.outcomes);
    const IntegratedSpeedCheck integ = integrated_speed_check(tr, fa);
    std::optional<double> observed;
    if (b.cap == CapChoice::ObservedVarentropy) observed = max_of(tr.varentropy);
    const BoundReport bound = tau_min(model, b.cap, observed);
    const double eps = sim.epsilon.fraction_of_S_M ? sim.epsilon.value * tr.entropy_M : sim.epsilon.value;
    const auto estimate = measurement_time_estimate(tr, eps);

    const bool pops_ok = tr.population_drift <= 1e-9;
    const bool spectrum_ok = tr.global_spectrum_drift <= 1e-9;
    const bool consistent = !estimate || *estimate >= bound.tau_min;
    const bool all = speed.passed && ident.passed && integ.passed && pops_ok && spectrum_ok && consistent;

    std::vector<std::string> header{"t_seconds",          "S_nats", "varentropy_nats2", "rel_entropy_nats",
                                    "dHint_var_rad2_per_s2", "speed_margin_nats_per_s"};
    for (int j = 0; j < tr.outcomes; ++j) header.push_back("pop_" + std::to_string(j));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        std::vector<std::string> r{format_double(tr.times[i]),          format_double(tr.entropy[i]),
                                   format_double(tr.varentropy[i]),     format_double(tr.rel_entropy_to_M[i]),
                                   format_double(tr.dH_int_variance[i]), format_double(tr.speed_margin[i])};
        for (double p : tr.pointer_populations[i]) r.push_back(format_double(p));
        rows.push_back(std::move(r));
    }
    ctx.write("trajectory.csv", render_csv(ctx.stamp, header, rows));

    ojson v;
    v["model"] = describe(model);
    v["dimension"] = tr.dimension;
    v["ensemble_size"] = tr.ensemble_size;
    v["samples"] = tr.times.size();
    v["approximate_pointer"] = tr.approximate_pointer;
    v["support_violations"] = tr.support_violations;
    v["entropy_M_nats"] = json_number(tr.entropy_M);
    v["rel_entropy_at_0_nats"] = json_number(tr.rel_entropy_to_M.front());
    v["speed_limit_max_violation_nats_per_s"] = json_number(speed.max_violation);
    v["speed_limit_tolerance_nats_per_s"] = json_number(speed.tolerance);
    v["speed_limit_min_margin_nats_per_s"] = json_number(speed.min_margin);
    v["speed_limit_passed"] = speed.passed;
    v["identity_max_defect_nats_per_s"] = json_number(ident.max_defect);
    v["identity_tolerance_nats_per_s"] = json_number(ident.tolerance);
    v["identity_samples_used"] = ident.samples_used;
    v["identity_asserted"] = ident.asserted;
    v["identity_passed"] = ident.passed;
    v["f_A"] = json_number(fa);
    v["integrated_min_slack_nats"] = json_number(integ.min_slack);
    v["integrated_speed_passed"] = integ.passed;
    v["population_drift"] = json_number(tr.population_drift);
    v["populations_passed"] = pops_ok;
    v["global_spectrum_drift"] = json_number(tr.global_spectrum_drift);
    v["global_spectrum_passed"] = spectrum_ok;
    v["dHint_variance_drift_rad2_per_s2"] = json_number(tr.variance_drift);
    v["epsilon_nats"] = json_number(eps);
    if (estimate) v["measurement_time_estimate_seconds"] = json_number(*estimate);
    else v["measurement_time_estimate_seconds"] = "NotReached";
    v["tau_min_seconds"] = json_number(bound.tau_min);
    v["tau_min_cap_choice"] = bound.cap_choice;
    v["bound_consistent"] = consistent;
    v["all_passed"] = all;
    ctx.write("verification.json", render_json(ctx.stamp, v));

    if (ctx.wants("svg")) {
        Plot p;
        p.title = "Entropy flow: " + describe(model);
        p.x_label = "t (s)";
        p.y_label = "nats";
        p.series.push_back({"S(rho_QA)", tr.times, tr.entropy});
        p.series.push_back({"S(rho_QA || rho_M)", tr.times, tr.rel_entropy_to_M});
        ctx.write("trajectory.svg", render_svg(ctx.stamp, p));
    }

    ctx.out << describe(model) << " (dim " << tr.dimension << ", " << tr.times.size() << " samples)\n"
            << "  speed limit " << (speed.passed ? "ok" : "VIOLATED") << ", identity defect "
            << fmt_g(ident.max_defect) << (ident.asserted ? "" : " (not asserted)") << ", integrated slack "
            << fmt_g(integ.min_slack) << "\n  tau_min = " << fmt_g(bound.tau_min) << " s, estimate = "
            << (estimate ? fmt_g(*estimate) + " s" : std::string("not reached")) << '\n';
    return kExitOk;
}

void set_at(json& config, const std::string& pointer, const json& value) {
    const json::json_pointer jp(pointer);
    json& slot = config.at(jp);
    if (slot.is_number_integer() && value.is_number_float()) {
        const double d = value.get<double>();
        if (d == std::floor(d)) {
            slot = static_cast<long long>(d);
            return;
        }
    }
    slot = value;
}

std::string value_text(const json& v) {
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

int cmd_sweep(const Context& ctx) {
    const auto params = parse_sweep(ctx.config);
    const BoundSection b = parse_bound(ctx.config);
    if (b.cap == CapChoice::ObservedVarentropy)
        throw ConfigError("/bound/varentropy_cap", "sweeps support only the f_A cap");
    parse_model(ctx.config);

    std::vector<std::vector<std::size_t>> grid;
    if (params.size() == 1) {
        for (std::size_t i = 0; i < params[0].values.size(); ++i) grid.push_back({i});
    } else {
        for (std::size_t i = 0; i < params[0].values.size(); ++i)
            for (std::size_t j = 0; j < params[1].values.size(); ++j) grid.push_back({i, j});
    }

    std::vector<std::optional<BoundReport>> results(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < grid.size(); k = next++) {
            try {
                json c = ctx.config;
                for (std::size_t p = 0; p < params.size(); ++p) set_at(c, params[p].pointer, params[p].values[grid[k][p]]);
                results[k] = tau_min(parse_model(c), b.cap);
            } catch (const ConfigError& e) {
                errors[k] = std::make_exception_ptr(
                    ConfigError(e.where(), std::string(e.what()) + " (sweep point " + std::to_string(k) + ")"));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int n_threads = std::clamp(ctx.options.threads, 1, 256);
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<std::string> header;
    for (const auto& p : params) header.push_back(p.pointer);
    for (const auto& [k, v] : results.front()->to_flat()) header.push_back(k);
    std::vector<std::vector<std::string>> rows;
    ojson jrows = ojson::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<std::string> row;
        ojson jr;
        for (std::size_t p = 0; p < params.size(); ++p) {
            row.push_back(value_text(params[p].values[grid[k][p]]));
            jr[params[p].pointer] = params[p].values[grid[k][p]];
        }
        for (const auto& [key, v] : results[k]->to_flat()) row.push_back(v);
        const ojson rj = report_json(*results[k]);
        for (const auto& [key, v] : rj.items()) jr[key] = v;
        rows.push_back(std::move(row));
        jrows.push_back(std::move(jr));
    }
    ctx.write("sweep.csv", render_csv(ctx.stamp, header, rows));
    if (ctx.wants("json")) {
        ojson body;
        body["rows"] = std::move(jrows);
        ctx.write("sweep.json", render_json(ctx.stamp, body));
    }
    if (ctx.wants("svg")) {
        Plot p;
        p.title = "tau_min sweep";
        p.x_label = params[0].pointer;
        p.y_label = "tau_min (s)";
        p.log_x = params[0].logarithmic;
        p.log_y = true;
        const std::size_t n_series = params.size() == 2 ? params[1].values.size() : 1;
        for (std::size_t s = 0; s < n_series; ++s) {
            Series ser;
            ser.name = params.size() == 2 ? value_text(params[1].values[s]) : "tau_min";
            for (std::size_t k = 0; k < grid.size(); ++k) {
                if (params.size() == 2 && grid[k][1] != s) continue;
                const json& xv = params[0].values[grid[k][0]];
                if (!xv.is_number()) continue;
                ser.x.push_back(xv.get<double>());
                ser.y.push_back(results[k]->tau_min);
            }
            p.series.push_back(std::move(ser));
        }
        ctx.write("sweep.svg", render_svg(ctx.stamp, p));
    }
    ctx.out << "sweep: " << grid.size() << " points\n";
    return kExitOk;
}

int cmd_fig2(const Context& ctx) {
    const Fig2Section f = parse_fig2(ctx.config);
    const auto rows = fig2_curve(f.omega, f.temperature, f.g);
    std::vector<std::vector<std::string>> cells;
    ojson jrows = ojson::array();
    std::vector<double> gs, taus;
    for (const auto& r : rows) {
        cells.push_back({format_double(r.g), format_double(r.theta), format_double(r.tau_min)});
        ojson jr;
        jr["g_rad_per_s"] = r.g;
        jr["tau_min_seconds"] = json_number(r.tau_min);
        jrows.push_back(std::move(jr));
        gs.push_back(r.g);
        taus.push_back(r.tau_min);
    }
    ctx.write("fig2.csv", render_csv(ctx.stamp, {"g_rad_per_s", "theta", "tau_min_seconds"}, cells));
    if (ctx.wants("json")) {
        ojson body;
        body["omega_rad_per_s"] = f.omega;
        body["temperature_K"] = f.temperature.kelvin();
        body["theta"] = rows.front().theta;
        body["rows"] = std::move(jrows);
        ctx.write("fig2.json", render_json(ctx.stamp, body));
    }
    if (ctx.wants("svg")) {
        Plot p;
        p.title = "tau_min = (ln 2 / 2g) sqrt(tanh(theta/2)), theta = " + fmt_g(rows.front().theta);
        p.x_label = "g (rad/s)";
        p.y_label = "tau_min (s)";
        p.log_x = p.log_y = true;
        p.series.push_back({"tau_min", gs, taus});
        ctx.write("fig2.svg", render_svg(ctx.stamp, p));
    }
    ctx.out << "fig2: theta = " << fmt_g(rows.front().theta) << ", " << rows.size() << " points, tau_min from "
            << fmt_g(taus.front()) << " s to " << fmt_g(taus.back()) << " s\n";
    return kExitOk;
}

} // namespace

int run_command(const std::string& command, const Options& options, std::ostream& out, std::ostream& err) {
    try {
        json config;
        if (options.config_path) {
            config = load_config_file(*options.config_path);
        } else if (command == "fig2") {
            config = fig2_preset();
        } else {
            err << "error: --config is required for " << command << '\n';
            return kExitConfig;
        }
        if (command == "fig2" && !config.contains("fig2")) config["fig2"] = fig2_preset()["fig2"];

        const OutputSection os = parse_output(config);
        Context ctx{config,
                    {config_hash(config), QMT_VERSION},
                    options.out_dir.value_or(os.directory),
                    options.formats ? parse_formats(*options.formats, "--format") : os.formats,
                    options,
                    out};
        if (command == "bound") return cmd_bound(ctx);
        if (command == "simulate") return cmd_simulate(ctx);
        if (command == "sweep") return cmd_sweep(ctx);
        if (command == "fig2") return cmd_fig2(ctx);
        err << "error: unknown command '" << command << "'\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error at " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::TooLarge) {
            err << "resource cap: " << e.what() << '\n';
            return kExitResource;
        }
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace qmt::cli
