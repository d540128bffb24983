// Unit tests: config parsing/hashing and the command-line harness contract
// (exit codes, artifact layout, determinism across worker counts).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lab/config.hpp"

using namespace lab;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::temp_directory_path() / "wavekin-cli-test";

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WAVEKIN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TmpDirs {
    TmpDirs() {
        fs::remove_all(kTmp);
        fs::create_directories(kTmp);
    }
};

} // namespace

TEST_CASE("config: parsing, defaults and hashing") {
    Config c = parse_config_text("# comment\n d = 2 \n\neps=0.5\nname = bump profile\n");
    CHECK(c.get_int("d") == 2);
    CHECK(c.get_double("eps") == 0.5);
    CHECK(c.get_string("name") == "bump profile");
    CHECK(c.get_int("missing", 7) == 7);
    CHECK(c.has("eps"));
    CHECK(!c.has("nope"));
    CHECK_THROWS(c.get_double("nope"));

    // hash depends on raw bytes, not parsed content
    Config c2 = parse_config_text("d = 2\neps = 0.5\n");
    Config c3 = parse_config_text("d = 2\neps = 0.5\n");
    CHECK(config_hash(c2) == config_hash(c3));
    CHECK(config_hash(c) != config_hash(c2));
}

TEST_CASE("cli: usage errors and exit codes") {
    TmpDirs tmp;
    CHECK(run_cli("selftest") == 0);
    CHECK(run_cli("") == 1);            // missing subcommand
    CHECK(run_cli("frobnicate") == 1);  // unknown subcommand
    CHECK(run_cli("simulate") == 1);    // missing --config

    write_file(kTmp / "empty.cfg", "");
    CHECK(run_cli("simulate --config " + (kTmp / "empty.cfg").string()) == 1);

    // both coupling keys set at once
    write_file(kTmp / "both.cfg",
               "d = 2\neps = 0.5\ngamma = 0.45\nlambda = 1.0\nensemble_size = 2\n"
               "t_final = 0.1\ndt = 0.05\nseed = 1\n");
    CHECK(run_cli("simulate --config " + (kTmp / "both.cfg").string() + " --out " +
                  (kTmp / "o0").string()) == 1);

    // resource cap: diagram enumeration refuses order 4
    write_file(kTmp / "d4.cfg", "diagram_order = 4\n");
    CHECK(run_cli("diagrams --config " + (kTmp / "d4.cfg").string() + " --out " +
                  (kTmp / "o1").string()) == 3);
}

TEST_CASE("cli: simulate reruns are byte-identical across worker counts") {
    TmpDirs tmp;
    write_file(kTmp / "sim.cfg",
               "d = 2\neps = 0.5\ngamma = 0.45\nensemble_size = 12\n"
               "t_final = 0.2\ndt = 0.01\nseed = 42\n");
    const std::string cfg = (kTmp / "sim.cfg").string();
    CHECK(run_cli("simulate --config " + cfg + " --out " + (kTmp / "a").string() +
                  " --workers 1") == 0);
    CHECK(run_cli("simulate --config " + cfg + " --out " + (kTmp / "b").string() +
                  " --workers 3") == 0);
    const std::string csv_a = slurp(kTmp / "a" / "spectrum.csv");
    CHECK(!csv_a.empty());
    CHECK(csv_a == slurp(kTmp / "b" / "spectrum.csv"));
    // config copied verbatim, artifacts name the config hash
    CHECK(slurp(kTmp / "a" / "config.txt") == slurp(kTmp / "sim.cfg"));
    CHECK(csv_a.rfind("# config ", 0) == 0);
    // manifest exists and mentions the subcommand
    const std::string manifest = slurp(kTmp / "a" / "manifest.json");
    CHECK(manifest.find("\"simulate\"") != std::string::npos);
    CHECK(manifest.find("config_hash") != std::string::npos);

    // --seed overrides the config seed and changes the data
    CHECK(run_cli("simulate --config " + cfg + " --out " + (kTmp / "c").string() +
                  " --seed 43") == 0);
    CHECK(csv_a != slurp(kTmp / "c" / "spectrum.csv"));
}

TEST_CASE("cli: diagrams counts and kwe trajectory artifacts") {
    TmpDirs tmp;
    write_file(kTmp / "diag.cfg", "diagram_order = 1\nadjacency = 1\n");
    CHECK(run_cli("diagrams --config " + (kTmp / "diag.cfg").string() + " --out " +
                  (kTmp / "d").string()) == 0);
    const std::string counts = slurp(kTmp / "d" / "counts.csv");
    CHECK(counts.find("1,1,6,4") != std::string::npos); // 1 history, 6 pairings, 4 degenerate
    CHECK(!slurp(kTmp / "d" / "diagrams.json").empty());

    write_file(kTmp / "kwe.cfg",
               "d = 2\nh = 0.25\nt_final = 0.25\ndt = 0.25\n"
               "quad_angle = 12\nquad_radial = 8\nquad_plane = 8\n");
    CHECK(run_cli("kwe --config " + (kTmp / "kwe.cfg").string() + " --out " +
                  (kTmp / "k").string()) == 0);
    const std::string drift = slurp(kTmp / "k" / "drift.json");
    CHECK(drift.find("\"mass\"") != std::string::npos);
    CHECK(slurp(kTmp / "k" / "density.csv").rfind("# config ", 0) == 0);
}

TEST_CASE("cli: amplitude table lists both evaluation methods per diagram") {
    TmpDirs tmp;
    write_file(kTmp / "amp.cfg",
               "d = 2\neps = 1.0\nlambda = 1.2\norder = 1\nt = 0.4\nmethod = both\n");
    CHECK(run_cli("amplitudes --config " + (kTmp / "amp.cfg").string() + " --out " +
                  (kTmp / "m").string()) == 0);
    std::ifstream f(kTmp / "m" / "amplitudes.csv");
    std::string line;
    std::getline(f, line); // hash
    std::getline(f, line); // header
    int rows = 0, time_rows = 0, resolvent_rows = 0;
    double re_time = 0.0, re_res = 0.0;
    while (std::getline(f, line)) {
        ++rows;
        if (line.find(",time,") != std::string::npos) {
            ++time_rows;
            if (time_rows == 1) re_time = std::stod(line.substr(line.find("0,") + 2));
        }
        if (line.find(",resolvent,") != std::string::npos) {
            ++resolvent_rows;
            if (resolvent_rows == 1) re_res = std::stod(line.substr(line.find("0,") + 2));
        }
    }
    CHECK(rows == 12); // 6 pairings x 2 methods at order 1
    CHECK(time_rows == 6);
    CHECK(resolvent_rows == 6);
    CHECK(re_time == doctest::Approx(re_res).epsilon(1e-6));
}
