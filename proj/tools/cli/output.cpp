#include "cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qmt/bounds.hpp"

namespace qmt::cli {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const nlohmann::json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string render_csv(const Stamp& stamp, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    std::string out = "# config_hash=" + stamp.hash + " version=" + stamp.version + "\n";
    const auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_field(cells[i]);
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

nlohmann::ordered_json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

std::string render_json(const Stamp& stamp, const nlohmann::ordered_json& body) {
    nlohmann::ordered_json j;
    j["_config_hash"] = stamp.hash;
    j["_version"] = stamp.version;
    for (const auto& [k, v] : body.items()) j[k] = v;
    return j.dump(2) + "\n";
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double map(double v) const {
        const double a = log ? std::log10(v) : v;
        return (a - lo) / (hi - lo);
    }
};

Axis make_axis(const std::vector<const std::vector<double>*>& data, bool log) {
    Axis ax;
    ax.log = log;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* d : data)
        for (double v : *d) {
            if (!std::isfinite(v) || (log && !(v > 0.0))) continue;
            const double a = log ? std::log10(v) : v;
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        lo -= 0.5;
        hi += 0.5;
    }
    if (log) {
        lo = std::floor(lo);
        hi = std::ceil(hi);
    }
    ax.lo = lo;
    ax.hi = hi;
    return ax;
}

std::vector<double> ticks(const Axis& ax) {
    std::vector<double> t;
    if (ax.log) {
        const int span = static_cast<int>(ax.hi - ax.lo);
        const int step = std::max(1, span / 8);
        for (int e = static_cast<int>(ax.lo); e <= static_cast<int>(ax.hi); e += step) t.push_back(std::pow(10.0, e));
        return t;
    }
    for (int i = 0; i <= 5; ++i) t.push_back(ax.lo + (ax.hi - ax.lo) * i / 5.0);
    return t;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

} // namespace

std::string render_svg(const Stamp& stamp, const Plot& plot) {
    const double W = 720, H = 480, L = 90, R = 170, T = 40, B = 60;
    const double pw = W - L - R;
    const double ph = H - T - B;
    std::vector<const std::vector<double>*> xs, ys;
    for (const auto& s : plot.series) {
        xs.push_back(&s.x);
        ys.push_back(&s.y);
    }
    const Axis ax = make_axis(xs, plot.log_x);
    const Axis ay = make_axis(ys, plot.log_y);

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<!-- config_hash=" << stamp.hash << " version=" << stamp.version << " -->\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(plot.title)
      << "</text>\n";
    o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    const char* tick_fmt = "%.3g";
    for (double t : ticks(ax)) {
        const double px = L + ax.map(t) * pw;
        o << "<line x1=\"" << fmt("%.2f", px) << "\" y1=\"" << T + ph << "\" x2=\"" << fmt("%.2f", px) << "\" y2=\""
          << T + ph + 5 << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << fmt("%.2f", px) << "\" y=\"" << T + ph + 20 << "\" text-anchor=\"middle\">"
          << fmt(tick_fmt, t) << "</text>\n";
    }
    for (double t : ticks(ay)) {
        const double py = T + ph - ay.map(t) * ph;
        o << "<line x1=\"" << L - 5 << "\" y1=\"" << fmt("%.2f", py) << "\" x2=\"" << L << "\" y2=\"" << fmt("%.2f", py)
          << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << L - 8 << "\" y=\"" << fmt("%.2f", py + 4) << "\" text-anchor=\"end\">" << fmt(tick_fmt, t)
          << "</text>\n";
    }
    o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(plot.x_label)
      << "</text>\n";
    o << "<text transform=\"translate(20," << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(plot.y_label) << "</text>\n";

    for (std::size_t s = 0; s < plot.series.size(); ++s) {
        const auto& ser = plot.series[s];
        const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
            const double x = ser.x[i];
            const double y = ser.y[i];
            if (!std::isfinite(x) || !std::isfinite(y) || (ax.log && !(x > 0)) || (ay.log && !(y > 0))) continue;
            if (!first) o << ' ';
            first = false;
            o << fmt("%.2f", L + ax.map(x) * pw) << ',' << fmt("%.2f", T + ph - ay.map(y) * ph);
        }
        o << "\"/>\n";
        const double ly = T + 10 + 18 * static_cast<double>(s);
        o << "<line x1=\"" << L + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 30 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << L + pw + 35 << "\" y=\"" << ly + 4 << "\">" << xml_escape(ser.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace qmt::cli
