#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "fsheat/errors.hpp"
#include "fsheat/report.hpp"

using namespace fsheat;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("fsheat_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("fnv1a64 matches published vectors") {
    CHECK(fnv1a64("", 0) == 14695981039346656037ULL);
    CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ULL);
}

TEST_CASE("fnv1a64_file equals the in-memory hash") {
    TempDir tmp;
    const std::string p = tmp.str() + "/blob.bin";
    const std::string content = "line one\nline two\n";
    std::ofstream(p, std::ios::binary) << content;
    CHECK(fnv1a64_file(p) == fnv1a64(content.data(), content.size()));
    CHECK_THROWS_AS(fnv1a64_file(tmp.str() + "/missing"), ConfigError);
}

TEST_CASE("csv numbers round-trip and use '.' decimals") {
    CHECK(CsvWriter::num(0.1) == "0.1");
    CHECK(CsvWriter::num(-3.0) == "-3");
    CHECK(CsvWriter::num(std::nan("")) == "nan");
    for (double v : {1.0 / 3.0, 6.02e23, -1.7976931348623157e308, 5e-324, 0.0}) {
        const std::string s = CsvWriter::num(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
        CHECK(s.find(',') == std::string::npos);
    }
}

TEST_CASE("csv writer emits header plus LF rows") {
    CsvWriter w({"t", "value"});
    w.add_row({"0.5", "1.25"});
    w.add_row({"1", "nan"});
    CHECK(w.str() == "t,value\n0.5,1.25\n1,nan\n");
    CHECK_THROWS_AS(w.add_row({"only-one"}), ConfigError);
}

TEST_CASE("run record round-trips and verifies its manifest") {
    TempDir tmp;
    CsvWriter w({"a", "b"});
    w.add_row({"1", "2"});
    w.write(tmp.str() + "/table.csv");

    RunRecord rec;
    rec.command = "simulate";
    rec.seed = 99;
    rec.config = {{"alpha", 2.0}, {"cells", 32}};
    rec.constants["mu1"] = 2.4674;
    rec.add_artifact(tmp.str(), "table.csv");
    rec.write(tmp.str());

    const RunRecord back = RunRecord::load(tmp.str() + "/run.json");
    CHECK(back.command == "simulate");
    CHECK(back.seed == 99);
    CHECK(back.code_version == kCodeVersion);
    CHECK(back.config["cells"] == 32);
    CHECK(back.constants.at("mu1") == doctest::Approx(2.4674));
    CHECK(back.manifest.at("table.csv") == rec.manifest.at("table.csv"));

    verify_run_dir(tmp.str());
    std::ofstream(tmp.str() + "/table.csv", std::ios::binary) << "tampered";
    CHECK_THROWS_AS(verify_run_dir(tmp.str()), PropertyError);
    std::filesystem::remove(tmp.str() + "/table.csv");
    CHECK_THROWS_AS(verify_run_dir(tmp.str()), PropertyError);
}

TEST_CASE("svg plot writes well-formed polylines and breaks at NaN") {
    TempDir tmp;
    SvgSeries s;
    s.label = "series";
    s.x = {0.0, 1.0, 2.0, 3.0, 4.0};
    s.y = {0.0, 1.0, std::nan(""), 2.0, 3.0};
    const std::string p = tmp.str() + "/plot.svg";
    write_svg_lines(p, "title", "t", "v", {s});
    const std::string svg = slurp(p);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
    size_t n_poly = 0;
    for (size_t at = svg.find("<polyline"); at != std::string::npos;
         at = svg.find("<polyline", at + 1))
        ++n_poly;
    CHECK(n_poly == 2); // the NaN splits one series into two segments
}
