#pragma once

// Deterministic artifact writers. Every file carries the config hash and the
// artifact version.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qmt::cli {

std::uint64_t fnv1a64(const std::string& bytes);
// FNV-1a of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

struct Stamp {
    std::string hash;
    std::string version;
};

std::string csv_field(const std::string& s);
std::string render_csv(const Stamp& stamp, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);
// `body` keys follow the _config_hash and _version keys.
std::string render_json(const Stamp& stamp, const nlohmann::ordered_json& body);

// Non-finite doubles become "inf"/"-inf"/"nan" strings.
nlohmann::ordered_json json_number(double v);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

std::string render_svg(const Stamp& stamp, const Plot& plot);

// Creates parent directories; throws std::runtime_error on I/O failure.
void write_file(const std::string& dir, const std::string& name, const std::string& content);

} // namespace qmt::cli
