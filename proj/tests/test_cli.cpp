#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"

namespace fs = std::filesystem;
using namespace qmt::cli;

namespace {

const fs::path kDemos = fs::path(QMT_SOURCE_DIR) / "demos";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qmt_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::string& cmd, const std::optional<fs::path>& config, const fs::path& out_dir,
        std::optional<std::string> formats = std::nullopt, int threads = 1) {
    Options o;
    if (config) o.config_path = config->string();
    o.out_dir = out_dir.string();
    o.formats = std::move(formats);
    o.threads = threads;
    std::ostringstream out, err;
    const int code = run_command(cmd, o, out, err);
    return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> row;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

const char* kSmallModel = R"("model": {
    "type": "spin-boson",
    "amplitudes": {"x": 0.6, "y": 0.8},
    "bath": {"modes": [{"omega": {"value": 1.0, "unit": "rad/s"}, "g": {"value": 0.2, "unit": "rad/s"}, "truncation": 12}]},
    "temperature": {"value": 0.5, "unit": "rad/s"}
  })";

} // namespace

TEST_CASE("hashing and rendering helpers") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    const auto a = nlohmann::json::parse(R"({"b": 1, "a": [1, 2]})");
    const auto b = nlohmann::json::parse(R"({"a":[1,2],   "b":1})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const Stamp s{"0123456789abcdef", "0.1.0"};
    CHECK(render_csv(s, {"x"}, {{"1"}}) == "# config_hash=0123456789abcdef version=0.1.0\nx\n1\n");
    const std::string svg = render_svg(s, Plot{"t", "x", "y", true, true, {{"s", {1, 10, 100}, {1, 0.1, 0.01}}}});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("config_hash=0123456789abcdef") != std::string::npos);
}

TEST_CASE("config validation reports the offending location") {
    auto where = [](const std::string& text) {
        try {
            parse_model(parse_config_text(text));
        } catch (const ConfigError& e) {
            return e.where();
        }
        return std::string("<none>");
    };
    CHECK(where("{\"model\": }").rfind("line 1", 0) == 0);
    CHECK(where(R"({"model": {"type": "spin-boson", "amplitudes": {"x": 1, "y": 0},
        "bath": {"modes": [{"omega": {"value": 1, "unit": "rad/s"}, "g": {"value": 1}}]},
        "temperature": {"value": 1, "unit": "K"}}})") == "/model/bath/modes/0/g/unit");
    CHECK(where(R"({"model": {"type": "spin-boson", "amplitudes": {"x": 1, "y": 0}, "colour": 1,
        "bath": {"modes": [{"omega": {"value": 1, "unit": "rad/s"}, "g": {"value": 1, "unit": "Hz"}}]},
        "temperature": {"value": 1, "unit": "K"}}})") == "/model/colour");
    CHECK(where(R"({"model": {"type": "spin-boson", "amplitudes": {"x": 1, "y": 0},
        "bath": {"modes": [{"omega": {"value": 1, "unit": "rad/s"}, "g": {"value": 1, "unit": "Hz"}}]},
        "temperature": {"value": 1, "unit": "K"}}})") == "<none>");
    CHECK_THROWS_AS(parse_config_text(R"({"model": {}, "extra": 1})"), ConfigError);
    CHECK(parse_formats("csv,svg", "--format") == std::vector<std::string>{"csv", "svg"});
    CHECK_THROWS_AS(parse_formats("csv,pdf", "--format"), ConfigError);
}

TEST_CASE("exit codes") {
    const auto dir = scratch("exit");
    CHECK(run("bound", dir / "missing.json", dir / "o").code == kExitConfig);
    CHECK(run("bound", std::nullopt, dir / "o").code == kExitConfig);
    CHECK(run("bound", write_config(dir, "{\"model\": 3,}"), dir / "o").code == kExitConfig);
    CHECK(run("bound", write_config(dir, std::string("{") + kSmallModel + ", \"wat\": 1}"), dir / "o").code ==
          kExitConfig);

    const auto big = write_config(dir, R"({"model": {
        "type": "spin-boson", "spins_per_qubit": 10,
        "amplitudes": {"x": 0.6, "y": 0.8},
        "bath": {"modes": [{"omega": {"value": 1.0, "unit": "rad/s"}, "g": {"value": 0.2, "unit": "rad/s"}, "truncation": 20}]},
        "temperature": {"value": 0.5, "unit": "rad/s"}},
      "simulate": {"points": 10, "t_max": {"value": 1, "unit": "s"}, "epsilon": {"value": 0.1, "unit": "nats"}}})");
    const Run r = run("simulate", big, dir / "o");
    CHECK(r.code == kExitResource);
    CHECK(r.err.find("resource cap") != std::string::npos);

    const auto sweep3 = write_config(dir, std::string("{") + kSmallModel + R"(, "sweep": {"parameters": [
        {"pointer": "/model/spins_per_qubit", "values": [1]},
        {"pointer": "/model/spins_per_qubit", "values": [1]},
        {"pointer": "/model/spins_per_qubit", "values": [1]}]}})");
    CHECK(run("sweep", sweep3, dir / "o").code == kExitConfig);
}

TEST_CASE("bound on the single-mode configuration") {
    const auto dir = scratch("bound");
    const Run r = run("bound", kDemos / "fig2_single_mode_bound.json", dir, "csv,json");
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "bound_report.json"));
    CHECK(std::abs(j["tau_min_seconds"].get<double>() - 3.3904894099801021e-10) < 1e-12 * 3.39e-10);
    CHECK(j.begin().key() == "_config_hash");
    const std::string csv = slurp(dir / "bound_report.csv");
    CHECK(csv.rfind("# config_hash=" + j["_config_hash"].get<std::string>() + " version=", 0) == 0);

    const auto x1 = write_config(dir, R"({"model": {"type": "spin-boson", "amplitudes": {"x": 1, "y": 0},
        "bath": {"modes": [{"omega": {"value": 1, "unit": "rad/s"}, "g": {"value": 1, "unit": "rad/s"}}]},
        "temperature": {"value": 1, "unit": "K"}}})");
    const Run z = run("bound", x1, dir / "x1");
    CHECK(z.code == kExitOk);
    const auto jz = nlohmann::json::parse(slurp(dir / "x1" / "bound_report.json"));
    CHECK(jz["tau_min_seconds"].get<double>() == 0.0);
    CHECK(jz["warning"] == "no entropy change");
}

TEST_CASE("sweep over spins scales as 1/N and is thread-count independent") {
    const auto dir = scratch("sweep");
    REQUIRE(run("sweep", kDemos / "sweep_spins.json", dir / "a", "csv", 1).code == kExitOk);
    REQUIRE(run("sweep", kDemos / "sweep_spins.json", dir / "b", "csv", 3).code == kExitOk);
    const std::string a = slurp(dir / "a" / "sweep.csv");
    CHECK(a == slurp(dir / "b" / "sweep.csv"));
    const auto rows = csv_rows(a);
    REQUIRE(rows.size() == 4);
    std::size_t col = 0;
    while (rows[0][col] != "tau_min_seconds") ++col;
    const double t1 = std::stod(rows[1][col]);
    CHECK(std::stod(rows[2][col]) == doctest::Approx(t1 / 2).epsilon(1e-14));
    CHECK(std::stod(rows[3][col]) == doctest::Approx(t1 / 4).epsilon(1e-14));
}

TEST_CASE("fig2 preset: monotone with log-log slope -1") {
    const auto dir = scratch("fig2");
    REQUIRE(run("fig2", std::nullopt, dir, "csv,json,svg").code == kExitOk);
    const auto rows = csv_rows(slurp(dir / "fig2.csv"));
    REQUIRE(rows.size() > 10);
    CHECK(rows[0] == std::vector<std::string>{"g_rad_per_s", "theta", "tau_min_seconds"});
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const double g0 = std::stod(rows[i - 1][0]), g1 = std::stod(rows[i][0]);
        const double t0 = std::stod(rows[i - 1][2]), t1 = std::stod(rows[i][2]);
        CHECK(t1 < t0);
        CHECK(std::abs(std::log(t1 / t0) / std::log(g1 / g0) + 1.0) < 1e-6);
    }
    CHECK(fs::exists(dir / "fig2.svg"));
    CHECK(fs::exists(dir / "fig2.json"));
}

TEST_CASE("simulate writes deterministic artifacts") {
    const auto dir = scratch("simulate");
    const auto cfg = write_config(dir, std::string("{") + kSmallModel + R"(,
      "simulate": {"points": 201, "t_max": {"value": 30, "unit": "s"}, "epsilon": {"value": 0.05, "unit": "fraction_of_S_M"}}})");
    REQUIRE(run("simulate", cfg, dir / "a", "csv,json,svg").code == kExitOk);
    REQUIRE(run("simulate", cfg, dir / "b", "csv,json,svg").code == kExitOk);
    for (const char* f : {"trajectory.csv", "verification.json", "trajectory.svg"})
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    const auto v = nlohmann::json::parse(slurp(dir / "a" / "verification.json"));
    CHECK(v["all_passed"] == true);
    CHECK(v["bound_consistent"] == true);
    const auto rows = csv_rows(slurp(dir / "a" / "trajectory.csv"));
    CHECK(rows.size() == 202);
    CHECK(rows[0][0] == "t_seconds");
}
