#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Quantum measurement time bounds: closed forms and exact dynamics"};
    app.require_subcommand(1);

    qmt::cli::Options opts;
    std::string config, out, formats;
    const auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", config, "JSON run configuration");
        if (config_required) c->required();
        sub->add_option("--out", out, "output directory (overrides output.directory)");
        sub->add_option("--format", formats, "comma list of csv,json,svg");
        sub->add_option("--threads", opts.threads, "worker threads for sweeps")->check(CLI::Range(1, 256));
        sub->add_option("--seed", opts.seed, "reserved; no stochastic paths");
    };
    add_common(app.add_subcommand("bound", "closed-form lower bound on the measurement time"), true);
    add_common(app.add_subcommand("simulate", "exact propagation and speed-limit verification"), true);
    add_common(app.add_subcommand("sweep", "bound over a one- or two-parameter grid"), true);
    add_common(app.add_subcommand("fig2", "single-mode tau_min versus coupling preset"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : qmt::cli::kExitConfig;
    }
    if (!config.empty()) opts.config_path = config;
    if (!out.empty()) opts.out_dir = out;
    if (!formats.empty()) opts.formats = formats;
    return qmt::cli::run_command(app.get_subcommands().front()->get_name(), opts, std::cout, std::cerr);
}
