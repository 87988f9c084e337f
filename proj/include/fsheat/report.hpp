#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace fsheat {

inline constexpr const char* kCodeVersion = "0.1.0";

// FNV-1a, 64-bit; the checksum used in run manifests.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);

// CSV with a fixed header, "." decimal separator and LF newlines.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);
    std::string str() const;
    void write(const std::string& path) const;

    // Shortest decimal that round-trips; "nan"/"inf" spelled out.
    static std::string num(double v);
    static std::string num(std::int64_t v);

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
};

// Self-contained SVG line chart (axes, ticks, legend); non-finite points
// break the polyline instead of poisoning it.
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

// Reproducibility envelope of one CLI invocation: resolved config, seed,
// timing and a checksum manifest of every artifact written next to it.
struct RunRecord {
    std::string command;
    std::string code_version = kCodeVersion;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    int n_blowups = 0;
    nlohmann::json config;
    std::map<std::string, double> constants;
    std::map<std::string, std::uint64_t> manifest;

    void add_artifact(const std::string& dir, const std::string& name);
    void write(const std::string& dir) const;
    static RunRecord load(const std::string& path);
};

// Loads <dir>/run.json and checks every manifest entry against the files on
// disk. Throws PropertyError on a missing file or checksum mismatch.
void verify_run_dir(const std::string& dir);

} // namespace fsheat
