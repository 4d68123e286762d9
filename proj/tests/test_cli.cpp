#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using pimsim::cli::run_cli;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(std::move(args), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("pimsim_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return (path / name).string();
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"analyze-mult", "--width", "9"}).code == 2);
    CHECK(cli({"analyze-mult", "--mode", "sloppy"}).code == 2);
    CHECK(cli({"simulate-macro"}).code == 2);
    CHECK(cli({"cost", "--clock-mhz", "-5"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("analyze-mult prints stats to stdout") {
    auto r = cli({"analyze-mult", "--width", "4", "--mode", "exact"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["total_cases"] == 256);
    CHECK(j["exact_cases"] == 256);
    CHECK(j["max_abs_error"] == 0);
}

TEST_CASE("analyze-mult writes both artifacts to --out") {
    TempDir d;
    auto r = cli({"--out", d.path.string(), "analyze-mult", "--width", "6", "--mode", "approx", "--bins", "8"});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    auto j = json::parse(slurp(d.path / "error_stats.json"));
    CHECK(j["total_cases"] == 4096);
    auto csv = slurp(d.path / "error_histogram.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
    auto again = cli({"analyze-mult", "--width", "6", "--mode", "approx", "--threads", "3"});
    CHECK(json::parse(again.out) == j);
}

TEST_CASE("simulate-macro") {
    TempDir d;
    auto pairs = d.file("p.csv", "a,b\n# comment\n255,255\n3,3\n0,9\n");
    auto r = cli({"simulate-macro", "--pairs", pairs, "--mode", "approx"});
    REQUIRE(r.code == 0);
    CHECK(r.out ==
          "index,a,b,cycles,product,residual_error,core_product,equal\n"
          "0,255,255,3,64064,961,64064,true\n"
          "1,3,3,2,9,0,9,true\n"
          "2,0,9,0,0,0,0,true\n");
    auto bad = d.file("bad.csv", "1,2\n3,4\nx,5\n");
    auto b = cli({"simulate-macro", "--pairs", bad});
    CHECK(b.code == 2);
    CHECK(b.err.find("row 3") != std::string::npos);
    auto missing = cli({"simulate-macro", "--pairs", (d.path / "none.csv").string()});
    CHECK(missing.code == 1);
    auto empty = cli({"simulate-macro", "--pairs", d.file("e.csv", "")});
    CHECK(empty.code == 0);
    CHECK(empty.out == "index,a,b,cycles,product,residual_error,core_product,equal\n");
}

TEST_CASE("map and cost chain through a plan file") {
    TempDir d;
    auto layer = d.file("layer.json",
                        R"({"name":"c1","kind":"conv","filter_width":3,"depth":4,"filters":16,)"
                        R"("in_height":8,"in_width":8,"stride":1,"padding":1})");
    auto r = cli({"--out", d.path.string(), "map", "--layer", layer, "--mode", "approx"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(d.path / "plan.json"));
    auto trace = slurp(d.path / "trace.csv");
    CHECK(trace.rfind("phase,op,bank,column,cycles\n", 0) == 0);
    auto c = cli({"cost", "--plan", (d.path / "plan.json").string(), "--mode", "approx"});
    REQUIRE(c.code == 0);
    auto j = json::parse(c.out);
    CHECK(j["valid"] == true);
    CHECK_FALSE(j["warnings"].empty());
    auto bad = d.file("bad.json", R"({"name":"x","kind":"fc","depth":0,"filters":2})");
    CHECK(cli({"map", "--layer", bad}).code == 2);
}

TEST_CASE("cost for the built-in workload") {
    auto r = cli({"cost", "--workload", "vgg16"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    bool seen = false;
    for (const auto& m : j["metrics"]) {
        if (m["name"] == "1a1w_throughput_ops_per_s") {
            CHECK(m["value"] == 341e9);
            seen = true;
        }
    }
    CHECK(seen);
}

TEST_CASE("config file") {
    TempDir d;
    auto cfg = d.file("c.json", R"({"macro":{"clock_mhz":166.5},"mode":"exact"})");
    auto r = cli({"--config", cfg, "cost"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("170500000000") != std::string::npos);
    auto unknown = d.file("u.json", R"({"colour":1})");
    CHECK(cli({"--config", unknown, "cost"}).code == 2);
}

TEST_CASE("infer on the fixture MLP is deterministic") {
    TempDir d;
    auto w = data_path("mlp_16_8_4.csv");
    auto in = data_path("mlp_inputs.csv");
    auto a = cli({"--out", d.path.string(), "infer", "--weights", w, "--inputs", in, "--mode", "approx"});
    REQUIRE(a.code == 0);
    auto first = slurp(d.path / "qor_report.json");
    auto outputs = slurp(d.path / "outputs.csv");
    auto b = cli({"--out", d.path.string(), "--threads", "4", "infer", "--weights", w, "--inputs", in, "--mode",
                  "approx"});
    REQUIRE(b.code == 0);
    CHECK(slurp(d.path / "qor_report.json") == first);
    CHECK(slurp(d.path / "outputs.csv") == outputs);
    CHECK(json::parse(first)["batch"] == 64);
    auto bad = cli({"infer", "--weights", d.file("w.csv", ""), "--inputs", in});
    CHECK(bad.code == 1);
}
