#pragma once

// Run configuration: a JSON document with mandatory unit keys on every
// physical quantity. Unknown keys are rejected.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmt/bounds.hpp"
#include "qmt/models.hpp"

namespace qmt::cli {

using json = nlohmann::json;

// Schema or parse failure; `where` is a JSON pointer or "line L, column C".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

json load_config_file(const std::string& path);
json parse_config_text(const std::string& text);

MeasurementModel parse_model(const json& config);

struct BoundSection {
    CapChoice cap = CapChoice::FA;
};
BoundSection parse_bound(const json& config);

struct EpsilonSpec {
    double value = 0.0;
    bool fraction_of_S_M = false;
};

struct SimulateSection {
    std::size_t points = 400;
    std::optional<double> t_max;  // s
    EpsilonSpec epsilon;
};
SimulateSection parse_simulate(const json& config);

struct SweepParameter {
    std::string pointer;       // JSON pointer into the config
    std::vector<json> values;
    bool logarithmic = false;
};
std::vector<SweepParameter> parse_sweep(const json& config);

struct Fig2Section {
    double omega = 1e9;                       // rad/s
    Temperature temperature = Temperature::from_kelvin(2e-3);
    std::vector<double> g;                    // rad/s
};
Fig2Section parse_fig2(const json& config);
// The preset used when `fig2` runs without a config file.
json fig2_preset();

struct OutputSection {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};
};
OutputSection parse_output(const json& config);
std::vector<std::string> parse_formats(const std::string& csv_list, const std::string& where);

} // namespace qmt::cli
