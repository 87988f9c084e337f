#include "fsheat/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "fsheat/errors.hpp"

namespace fsheat {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("fnv1a64_file: cannot open " + path);
    std::uint64_t h = 14695981039346656037ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {
    require(!header_.empty(), "CsvWriter: empty header");
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
    require(cells.size() == header_.size(), "CsvWriter: row width does not match header");
    std::string line;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    rows_.push_back(std::move(line));
}

std::string CsvWriter::str() const {
    std::string out;
    for (size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const std::string& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("CsvWriter: cannot open " + path);
    out << str();
    if (!out) throw ConfigError("CsvWriter: write failed for " + path);
}

std::string CsvWriter::num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string CsvWriter::num(std::int64_t v) { return std::to_string(v); }

namespace {

// Round tick values for axis labels.
std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void span_of(const std::vector<SvgSeries>& series, double& x_lo, double& x_hi,
             double& y_lo, double& y_hi) {
    x_lo = y_lo = std::numeric_limits<double>::infinity();
    x_hi = y_hi = -std::numeric_limits<double>::infinity();
    for (const SvgSeries& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (!(x_lo <= x_hi)) { x_lo = 0.0; x_hi = 1.0; }
    if (!(y_lo <= y_hi)) { y_lo = 0.0; y_hi = 1.0; }
    if (x_lo == x_hi) { x_lo -= 0.5; x_hi += 0.5; }
    if (y_lo == y_hi) { y_lo -= 0.5; y_hi += 0.5; }
}

} // namespace

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series) {
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const double W = 720, H = 480, ml = 80, mr = 24, mt = 48, mb = 56;
    const double pw = W - ml - mr, ph = H - mt - mb;
    double x_lo, x_hi, y_lo, y_hi;
    span_of(series, x_lo, x_hi, y_lo, y_hi);
    auto px = [&](double x) { return ml + pw * (x - x_lo) / (x_hi - x_lo); };
    auto py = [&](double y) { return mt + ph * (1.0 - (y - y_lo) / (y_hi - y_lo)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" << title << "</text>\n";
    svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double fx = x_lo + (x_hi - x_lo) * k / 5.0;
        const double fy = y_lo + (y_hi - y_lo) * k / 5.0;
        svg << "<line x1=\"" << px(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(fx)
            << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
            << tick_label(fx) << "</text>\n"
            << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml << "\" y2=\""
            << py(fy) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">"
            << tick_label(fy) << "</text>\n";
    }
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
        << "</text>\n"
        << "<text x=\"18\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << y_label << "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
        std::ostringstream pts;
        bool open = false;
        auto flush = [&]() {
            if (open) svg << "<polyline fill=\"none\" stroke=\"" << color
                          << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
            pts.str("");
            open = false;
        };
        for (size_t i = 0; i < series[s].x.size(); ++i) {
            const double x = series[s].x[i], y = series[s].y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) {
                flush();
                continue;
            }
            pts << px(x) << "," << py(y) << " ";
            open = true;
        }
        flush();
        const double ly = mt + 16 + 18.0 * s;
        svg << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw - 120
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n"
            << "<text x=\"" << ml + pw - 114 << "\" y=\"" << ly + 4
            << "\" font-size=\"11\" font-family=\"sans-serif\">" << series[s].label << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("write_svg_lines: cannot open " + path);
    out << svg.str();
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    return std::strtoull(s.c_str(), nullptr, 16);
}

} // namespace

void RunRecord::add_artifact(const std::string& dir, const std::string& name) {
    manifest[name] = fnv1a64_file(dir + "/" + name);
}

void RunRecord::write(const std::string& dir) const {
    nlohmann::json j;
    j["command"] = command;
    j["code_version"] = code_version;
    j["seed"] = seed;
    j["wall_seconds"] = wall_seconds;
    j["n_blowups"] = n_blowups;
    j["config"] = config;
    j["constants"] = constants;
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [name, sum] : manifest) m[name] = hex64(sum);
    j["manifest"] = m;
    std::ofstream out(dir + "/run.json", std::ios::binary);
    if (!out) throw ConfigError("RunRecord: cannot open " + dir + "/run.json");
    out << j.dump(2) << '\n';
}

RunRecord RunRecord::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("RunRecord: cannot open " + path);
    nlohmann::json j;
    in >> j;
    RunRecord r;
    r.command = j.at("command").get<std::string>();
    r.code_version = j.at("code_version").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.n_blowups = j.at("n_blowups").get<int>();
    r.config = j.at("config");
    for (const auto& [k, v] : j.at("constants").items()) r.constants[k] = v.get<double>();
    for (const auto& [k, v] : j.at("manifest").items()) r.manifest[k] = parse_hex64(v.get<std::string>());
    return r;
}

void verify_run_dir(const std::string& dir) {
    const RunRecord r = RunRecord::load(dir + "/run.json");
    for (const auto& [name, sum] : r.manifest) {
        std::uint64_t actual = 0;
        try {
            actual = fnv1a64_file(dir + "/" + name);
        } catch (const ConfigError&) {
            throw PropertyError("verify_run_dir: missing artifact " + name);
        }
        if (actual != sum)
            throw PropertyError("verify_run_dir: checksum mismatch for " + name);
    }
}

} // namespace fsheat
