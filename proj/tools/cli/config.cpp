#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qmt/environment.hpp"
#include "qmt/errors.hpp"

namespace qmt::cli {

namespace {

enum class Dim { Frequency, Temperature, Time, Entropy };

// A JSON value together with its pointer, for diagnostics.
struct Node {
    const json& j;
    std::string ptr;

    [[noreturn]] void error(const std::string& what) const { throw ConfigError(ptr.empty() ? "/" : ptr, what); }

    bool has(const char* key) const { return j.is_object() && j.contains(key); }

    Node at(const char* key) const {
        if (!j.is_object()) error("expected an object");
        if (!j.contains(key)) throw ConfigError(ptr + "/" + key, "missing required field");
        return {j.at(key), ptr + "/" + key};
    }

    Node at(std::size_t i) const { return {j.at(i), ptr + "/" + std::to_string(i)}; }

    void object(std::initializer_list<const char*> allowed) const {
        if (!j.is_object()) error("expected an object");
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : j.items())
            if (!ok.count(k)) throw ConfigError(ptr + "/" + k, "unknown key");
    }

    const json& array() const {
        if (!j.is_array()) error("expected an array");
        return j;
    }

    double number() const {
        if (!j.is_number()) error("expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) error("expected a finite number");
        return v;
    }

    long long integer() const {
        if (!j.is_number_integer()) error("expected an integer");
        return j.get<long long>();
    }

    bool boolean() const {
        if (!j.is_boolean()) error("expected true or false");
        return j.get<bool>();
    }

    std::string string() const {
        if (!j.is_string()) error("expected a string");
        return j.get<std::string>();
    }

    // A number, or [re, im].
    cplx complex() const {
        if (j.is_number()) return {number(), 0.0};
        if (j.is_array() && j.size() == 2) return {at(std::size_t{0}).number(), at(std::size_t{1}).number()};
        error("expected a number or a [re, im] pair");
    }
};

double unit_factor(const Node& n, Dim dim, const std::string& unit) {
    switch (dim) {
    case Dim::Frequency:
        if (unit == "rad/s") return 1.0;
        if (unit == "Hz") return 2.0 * std::numbers::pi;
        n.error("unit must be \"rad/s\" or \"Hz\"");
    case Dim::Time:
        if (unit == "s") return 1.0;
        n.error("unit must be \"s\"");
    default: break;
    }
    n.error("unsupported unit");
}

// {"value": x, "unit": u} converted to internal units.
double quantity(const Node& n, Dim dim) {
    n.object({"value", "unit"});
    const std::string unit = n.at("unit").string();
    const Node v = n.at("value");
    return v.number() * unit_factor(n.at("unit"), dim, unit);
}

Temperature temperature(const Node& n) {
    n.object({"value", "unit"});
    const std::string unit = n.at("unit").string();
    const double v = n.at("value").number();
    if (!(v > 0.0)) n.at("value").error("temperature must be positive");
    if (unit == "K") return Temperature::from_kelvin(v);
    if (unit == "rad/s") return Temperature::from_rad_per_s(v);
    n.at("unit").error("unit must be \"K\" or \"rad/s\"");
}

// {"values": [...], "unit": u}
std::vector<double> quantity_list(const Node& n, Dim dim) {
    n.object({"values", "unit"});
    const double f = unit_factor(n.at("unit"), dim, n.at("unit").string());
    const Node vs = n.at("values");
    std::vector<double> out;
    for (std::size_t i = 0; i < vs.array().size(); ++i) out.push_back(vs.at(i).number() * f);
    return out;
}

std::vector<double> grid(const Node& n) {
    n.object({"start", "stop", "points"});
    const double a = n.at("start").number();
    const double b = n.at("stop").number();
    const long long p = n.at("points").integer();
    if (p < 1) n.at("points").error("grid needs at least one point");
    std::vector<double> out;
    for (long long i = 0; i < p; ++i) out.push_back(p == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(p - 1));
    return out;
}

std::vector<double> log_grid(const Node& n) {
    n.object({"start", "stop", "points"});
    const double a = n.at("start").number();
    const double b = n.at("stop").number();
    if (!(a > 0.0) || !(b > 0.0)) n.error("log grid bounds must be positive");
    const long long p = n.at("points").integer();
    if (p < 1) n.at("points").error("grid needs at least one point");
    std::vector<double> out;
    const double la = std::log10(a);
    const double lb = std::log10(b);
    for (long long i = 0; i < p; ++i) {
        if (i == 0) out.push_back(a);
        else if (i == p - 1) out.push_back(b);
        else out.push_back(std::pow(10.0, la + (lb - la) * static_cast<double>(i) / static_cast<double>(p - 1)));
    }
    return out;
}

BathSpec parse_bath(const Node& n, const Temperature& temp, double tol) {
    n.object({"modes", "ohmic", "tabulated"});
    const int kinds = int(n.has("modes")) + int(n.has("ohmic")) + int(n.has("tabulated"));
    if (kinds != 1) n.error("bath needs exactly one of \"modes\", \"ohmic\", \"tabulated\"");
    if (n.has("modes")) {
        const Node ms = n.at("modes");
        if (ms.array().empty()) ms.error("at least one mode is required");
        DiscreteBath db;
        for (std::size_t i = 0; i < ms.j.size(); ++i) {
            const Node m = ms.at(i);
            m.object({"omega", "g", "truncation"});
            BathMode mode;
            mode.omega = quantity(m.at("omega"), Dim::Frequency);
            mode.g = quantity(m.at("g"), Dim::Frequency);
            if (!(mode.omega > 0.0)) m.at("omega").error("mode frequency must be positive");
            if (!(mode.g > 0.0)) m.at("g").error("coupling must be positive");
            if (m.has("truncation")) {
                const long long t = m.at("truncation").integer();
                if (t < 2) m.at("truncation").error("truncation must be >= 2");
                mode.trunc = static_cast<std::size_t>(t);
            } else {
                mode.trunc = required_truncation(mode.omega, temp, tol);
            }
            db.modes.push_back(mode);
        }
        return BathSpec(std::move(db));
    }
    if (n.has("ohmic")) {
        const Node o = n.at("ohmic");
        o.object({"eta", "omega_c", "omega_max"});
        OhmicDensity d{o.at("eta").number(), quantity(o.at("omega_c"), Dim::Frequency)};
        if (!(d.eta > 0.0)) o.at("eta").error("eta must be positive");
        if (!(d.omega_c > 0.0)) o.at("omega_c").error("omega_c must be positive");
        const double wmax = o.has("omega_max") ? quantity(o.at("omega_max"), Dim::Frequency)
                                               : std::numeric_limits<double>::infinity();
        return BathSpec(ContinuumBath{SpectralDensityModel(d), wmax});
    }
    const Node t = n.at("tabulated");
    t.object({"omega", "J", "omega_max"});
    TabulatedDensity d{quantity_list(t.at("omega"), Dim::Frequency), quantity_list(t.at("J"), Dim::Frequency)};
    const double wmax = t.has("omega_max") ? quantity(t.at("omega_max"), Dim::Frequency)
                                           : std::numeric_limits<double>::infinity();
    return BathSpec(ContinuumBath{SpectralDensityModel(std::move(d)), wmax});
}

HamiltonianOptions parse_hamiltonian(const Node& n) {
    n.object({"environment", "interaction", "apparatus_frequency"});
    HamiltonianOptions h;
    if (n.has("environment")) h.environment = n.at("environment").boolean();
    if (n.has("interaction")) h.interaction = n.at("interaction").boolean();
    if (n.has("apparatus_frequency")) h.apparatus_frequency = quantity(n.at("apparatus_frequency"), Dim::Frequency);
    return h;
}

Amplitudes parse_amplitudes(const Node& n) {
    n.object({"x", "y"});
    try {
        return Amplitudes::make(n.at("x").complex(), n.at("y").complex());
    } catch (const Error& e) {
        n.error("|x|^2 + |y|^2 must equal 1");
    }
}

MeasurementModel build_model(const Node& n) {
    const std::string type = n.at("type").string();
    const bool spin = type == "spin-boson";
    if (!spin && type != "boson-boson") n.at("type").error("type must be \"spin-boson\" or \"boson-boson\"");
    if (spin)
        n.object({"type", "qubits", "spins_per_qubit", "amplitudes", "state", "bath", "temperature", "hamiltonian",
                  "truncation_tolerance", "dimension_cap"});
    else
        n.object({"type", "alpha", "amplitudes", "apparatus_truncation", "bath", "temperature", "hamiltonian",
                  "truncation_tolerance", "dimension_cap"});

    ModelLimits limits;
    if (n.has("truncation_tolerance")) {
        limits.truncation_tolerance = n.at("truncation_tolerance").number();
        if (!(limits.truncation_tolerance > 0.0 && limits.truncation_tolerance < 1.0))
            n.at("truncation_tolerance").error("must lie in (0, 1)");
    }
    if (n.has("dimension_cap")) {
        const long long cap = n.at("dimension_cap").integer();
        if (cap < 1) n.at("dimension_cap").error("must be positive");
        limits.dimension_cap = static_cast<std::size_t>(cap);
    }
    const Temperature temp = temperature(n.at("temperature"));
    const BathSpec bath = parse_bath(n.at("bath"), temp, limits.truncation_tolerance);
    const HamiltonianOptions ham = n.has("hamiltonian") ? parse_hamiltonian(n.at("hamiltonian")) : HamiltonianOptions{};

    if (spin) {
        const long long m = n.has("qubits") ? n.at("qubits").integer() : 1;
        const long long spins = n.has("spins_per_qubit") ? n.at("spins_per_qubit").integer() : 1;
        if (m < 1 || m > 6) n.at("qubits").error("qubits must lie in [1, 6]");
        if (spins < 1 || spins > 12) n.at("spins_per_qubit").error("spins_per_qubit must lie in [1, 12]");
        if (n.has("amplitudes") == n.has("state")) n.error("give exactly one of \"amplitudes\" or \"state\"");
        Vector state;
        if (n.has("amplitudes")) {
            if (m != 1) n.at("amplitudes").error("\"amplitudes\" applies to one qubit; use \"state\"");
            const Amplitudes a = parse_amplitudes(n.at("amplitudes"));
            state.resize(2);
            state << a.x, a.y;
        } else {
            const Node s = n.at("state");
            const std::size_t dim = std::size_t{1} << m;
            if (s.array().size() != dim) s.error("state needs 2^qubits = " + std::to_string(dim) + " amplitudes");
            state.resize(static_cast<Eigen::Index>(dim));
            for (std::size_t i = 0; i < dim; ++i) state[static_cast<Eigen::Index>(i)] = s.at(i).complex();
            if (std::abs(state.squaredNorm() - 1.0) > 1e-12) s.error("state is not normalised");
        }
        SpinBosonModel sb = SpinBosonModel::multi(std::move(state), static_cast<int>(m), static_cast<int>(spins), bath, temp);
        sb.hamiltonian = ham;
        sb.limits = limits;
        return sb;
    }
    BosonBosonModel bb{n.at("alpha").complex(), parse_amplitudes(n.at("amplitudes")), 0, bath, temp};
    if (std::abs(bb.alpha) == 0.0) n.at("alpha").error("alpha must be nonzero");
    if (n.has("apparatus_truncation")) {
        const long long t = n.at("apparatus_truncation").integer();
        if (t < 2) n.at("apparatus_truncation").error("must be >= 2");
        bb.apparatus_trunc = static_cast<std::size_t>(t);
    }
    bb.hamiltonian = ham;
    bb.limits = limits;
    return bb;
}

const std::set<std::string> kTopLevel{"model", "bound", "simulate", "sweep", "fig2", "output"};

void check_top_level(const json& config) {
    if (!config.is_object()) throw ConfigError("/", "config must be a JSON object");
    for (const auto& [k, v] : config.items())
        if (!kTopLevel.count(k)) throw ConfigError("/" + k, "unknown key");
}

} // namespace

json parse_config_text(const std::string& text) {
    try {
        json j = json::parse(text);
        check_top_level(j);
        return j;
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col), "JSON syntax error");
    }
}

json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

MeasurementModel parse_model(const json& config) {
    const Node root{config, ""};
    const Node n = root.at("model");
    try {
        return build_model(n);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::TooLarge) throw;
        throw ConfigError("/model", e.what());
    }
}

BoundSection parse_bound(const json& config) {
    BoundSection b;
    if (!config.contains("bound")) return b;
    const Node n{config.at("bound"), "/bound"};
    n.object({"varentropy_cap"});
    if (n.has("varentropy_cap")) {
        const std::string s = n.at("varentropy_cap").string();
        if (s == "f_A") b.cap = CapChoice::FA;
        else if (s == "observed") b.cap = CapChoice::ObservedVarentropy;
        else n.at("varentropy_cap").error("must be \"f_A\" or \"observed\"");
    }
    return b;
}

SimulateSection parse_simulate(const json& config) {
    const Node n = Node{config, ""}.at("simulate");
    n.object({"points", "t_max", "epsilon"});
    SimulateSection s;
    if (n.has("points")) {
        const long long p = n.at("points").integer();
        if (p < 3) n.at("points").error("need at least 3 sample points");
        s.points = static_cast<std::size_t>(p);
    }
    if (n.has("t_max")) {
        s.t_max = quantity(n.at("t_max"), Dim::Time);
        if (!(*s.t_max > 0.0)) n.at("t_max").error("t_max must be positive");
    }
    const Node e = n.at("epsilon");
    e.object({"value", "unit"});
    s.epsilon.value = e.at("value").number();
    if (!(s.epsilon.value > 0.0)) e.at("value").error("epsilon must be positive");
    const std::string unit = e.at("unit").string();
    if (unit == "fraction_of_S_M") s.epsilon.fraction_of_S_M = true;
    else if (unit != "nats") e.at("unit").error("unit must be \"nats\" or \"fraction_of_S_M\"");
    return s;
}

std::vector<SweepParameter> parse_sweep(const json& config) {
    const Node n = Node{config, ""}.at("sweep");
    n.object({"parameters"});
    const Node ps = n.at("parameters");
    if (ps.array().empty()) ps.error("at least one swept parameter is required");
    if (ps.j.size() > 2) ps.error("at most two parameters can be swept");
    std::vector<SweepParameter> out;
    for (std::size_t i = 0; i < ps.j.size(); ++i) {
        const Node p = ps.at(i);
        p.object({"pointer", "values", "log", "linear"});
        SweepParameter sp;
        sp.pointer = p.at("pointer").string();
        json::json_pointer jp;
        try {
            jp = json::json_pointer(sp.pointer);
        } catch (const json::exception&) {
            p.at("pointer").error("malformed JSON pointer");
        }
        if (sp.pointer.rfind("/model", 0) != 0) p.at("pointer").error("swept parameters must live under /model");
        if (!config.contains(jp)) p.at("pointer").error("pointer does not resolve in this config");
        const int kinds = int(p.has("values")) + int(p.has("log")) + int(p.has("linear"));
        if (kinds != 1) p.error("give exactly one of \"values\", \"log\", \"linear\"");
        if (p.has("values")) {
            for (const auto& v : p.at("values").array()) sp.values.push_back(v);
        } else if (p.has("log")) {
            sp.logarithmic = true;
            for (double v : log_grid(p.at("log"))) sp.values.emplace_back(v);
        } else {
            for (double v : grid(p.at("linear"))) sp.values.emplace_back(v);
        }
        if (sp.values.empty()) p.error("empty grid");
        out.push_back(std::move(sp));
    }
    return out;
}

json fig2_preset() {
    return json::parse(R"({
  "fig2": {
    "omega": {"value": 1e9, "unit": "rad/s"},
    "temperature": {"value": 0.002, "unit": "K"},
    "g": {"log": {"start": 1e3, "stop": 1e12, "points": 50}, "unit": "rad/s"}
  }
})");
}

Fig2Section parse_fig2(const json& config) {
    const Node n = Node{config, ""}.at("fig2");
    n.object({"omega", "temperature", "g"});
    Fig2Section f;
    f.omega = quantity(n.at("omega"), Dim::Frequency);
    if (!(f.omega > 0.0)) n.at("omega").error("omega must be positive");
    f.temperature = temperature(n.at("temperature"));
    const Node g = n.at("g");
    g.object({"log", "values", "unit"});
    const double factor = unit_factor(g.at("unit"), Dim::Frequency, g.at("unit").string());
    if (g.has("log") == g.has("values")) g.error("give exactly one of \"log\" or \"values\"");
    if (g.has("log")) {
        f.g = log_grid(g.at("log"));
    } else {
        const Node vs = g.at("values");
        for (std::size_t i = 0; i < vs.array().size(); ++i) f.g.push_back(vs.at(i).number());
    }
    if (f.g.empty()) g.error("empty grid");
    for (double& v : f.g) {
        v *= factor;
        if (!(v > 0.0)) g.error("couplings must be positive");
    }
    return f;
}

std::vector<std::string> parse_formats(const std::string& list, const std::string& where) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item != "csv" && item != "json" && item != "svg")
            throw ConfigError(where, "unknown format '" + item + "' (expected csv, json, svg)");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError(where, "no output formats given");
    return out;
}

OutputSection parse_output(const json& config) {
    OutputSection o;
    if (!config.contains("output")) return o;
    const Node n{config.at("output"), "/output"};
    n.object({"directory", "formats"});
    if (n.has("directory")) o.directory = n.at("directory").string();
    if (n.has("formats")) {
        o.formats.clear();
        const Node fs = n.at("formats");
        for (std::size_t i = 0; i < fs.array().size(); ++i) {
            const std::string f = fs.at(i).string();
            if (f != "csv" && f != "json" && f != "svg") fs.at(i).error("format must be csv, json or svg");
            o.formats.push_back(f);
        }
    }
    return o;
}

} // namespace qmt::cli
