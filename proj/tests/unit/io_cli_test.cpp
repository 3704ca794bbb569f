#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "core/errors.hpp"
#include "core/io.hpp"

using namespace slelab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the CLI with sh -c semantics; returns the process exit code.
int run_cli(const std::string& args, std::string* out_path = nullptr) {
    const char* cli = std::getenv("SLELAB_CLI");
    REQUIRE(cli != nullptr);
    const fs::path log = fs::temp_directory_path() / "slelab_cli_log.txt";
    const std::string cmd =
        std::string(cli) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (out_path) *out_path = log.string();
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

SleCurveSample tiny_sample() {
    SleCurveSample s;
    s.kind = "chordal";
    s.kappa = 3.0;
    s.dt_base = 0.25;
    s.stop_criterion = "t_cap";
    s.curve.points = {Cpx(0.0, 0.0), Cpx(0.1, 0.57735026918962573),
                      Cpx(-0.03, 0.81649658092772603)};
    s.curve.times = {0.0, 0.25, 0.5};
    s.driving.times = s.curve.times;
    s.driving.values = {0.0, 0.1, -0.13};
    return s;
}

}  // namespace

TEST_CASE("json save and load round trip with ordered keys") {
    const fs::path dir = fresh_dir("slelab_io_test");
    Json j;
    j["zeta"] = 1.5;
    j["alpha"] = Json::array({1, 2, 3});
    j["nested"]["pi"] = 3.14159;
    const std::string p = (dir / "x.json").string();
    save_json_atomic(p, j);
    CHECK(load_json(p) == j);
    // Ordered serialization: insertion order survives, so fingerprints are
    // stable across runs.
    const std::string text = slurp(p);
    CHECK(text.find("zeta") < text.find("alpha"));
    CHECK_THROWS_AS(load_json((dir / "missing.json").string()), SlelabError);
    fs::remove_all(dir);
}

TEST_CASE("curve csv is headered and exact") {
    const fs::path dir = fresh_dir("slelab_csv_test");
    const SleCurveSample s = tiny_sample();
    const std::string p = (dir / "curve.csv").string();
    write_curve_csv(p, s);
    std::ifstream in(p);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,re,im");
    int rows = 0;
    while (std::getline(in, line)) {
        double t, re, im;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &re, &im) == 3);
        CHECK(t == s.curve.times[rows]);
        CHECK(re == s.curve.points[rows].real());  // %.17g survives the round trip
        CHECK(im == s.curve.points[rows].imag());
        ++rows;
    }
    CHECK(rows == 3);

    write_curve_sidecar(p, s, 42);
    const Json side = load_json(p + ".json");
    CHECK(side["kind"] == "chordal");
    CHECK(side["kappa"] == 3.0);
    CHECK(side["seed"] == 42);
    CHECK(side["stop_criterion"] == "t_cap");
    fs::remove_all(dir);
}

TEST_CASE("config fingerprints are stable and sensitive") {
    Json a;
    a["experiment_id"] = "thm1";
    a["kappa"] = 4.0;
    Json b = a;
    b["kappa"] = 3.0;
    const std::string fa = config_fingerprint(a);
    CHECK(fa == config_fingerprint(a));
    CHECK(fa != config_fingerprint(b));
    CHECK(fa.size() == 16);
    for (char c : fa) CHECK(std::isxdigit(static_cast<unsigned char>(c)));
}

TEST_CASE("run manifest round trips") {
    RunManifest m;
    m.run_id = "thm1-s5-deadbeef";
    m.config_hash = "deadbeefdeadbeef";
    m.created_at = iso8601_now();
    m.outputs = {"runs/x/record.json"};
    m.status = "running";
    m.cells_done = {true, false, true};
    const RunManifest back = RunManifest::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    CHECK(back.cells_done.size() == 3);
}

TEST_CASE("cli samples a curve deterministically") {
    const fs::path dir = fresh_dir("slelab_cli_sample");
    const std::string out = (dir / "c.csv").string();
    const std::string args =
        "sample --kind chordal --kappa 2.6666666666666665 --dt 0.002 --tmax 0.3 "
        "--seed 11 --out " + out;
    REQUIRE(run_cli(args) == 0);
    REQUIRE(fs::exists(out));
    REQUIRE(fs::exists(out + ".json"));
    const std::string first = slurp(out);
    CHECK(first.substr(0, 7) == "t,re,im");
    REQUIRE(run_cli(args) == 0);
    CHECK(slurp(out) == first);  // byte-identical rerun
    const Json side = load_json(out + ".json");
    CHECK(side["seed"] == 11);
    fs::remove_all(dir);
}

TEST_CASE("cli rejects invalid arguments with exit code 2") {
    const fs::path dir = fresh_dir("slelab_cli_bad");
    const std::string out = (dir / "c.csv").string();
    CHECK(run_cli("sample --kind chordal --kappa 6.0 --dt 0.01 --tmax 0.1 --out " + out) == 2);
    CHECK(run_cli("experiment --id not_an_experiment --out " + dir.string()) == 2);
    fs::remove_all(dir);
}

TEST_CASE("cli experiment writes and resumes a run directory") {
    const fs::path dir = fresh_dir("slelab_cli_exp");
    const std::string common =
        "experiment --id at_most_half --replicates 600 --instances 1 --seed 3 "
        "--run-id demo --out " + dir.string();
    REQUIRE(run_cli(common) == 0);
    const fs::path rdir = dir / "demo";
    REQUIRE(fs::exists(rdir / "record.json"));
    REQUIRE(fs::exists(rdir / "cells.csv"));
    const Json rec1 = load_json((rdir / "record.json").string());
    const Json man = load_json((rdir / "manifest.json").string());
    CHECK(man["status"] == "done");
    CHECK(man["run_id"] == "demo");

    // Resume recomputes nothing (all units cached) and reproduces the record.
    const std::string resume =
        "experiment --id at_most_half --replicates 600 --instances 1 --seed 3 "
        "--resume demo --out " + dir.string();
    REQUIRE(run_cli(resume) == 0);
    Json rec2 = load_json((rdir / "record.json").string());
    rec1.at("wall_time_s");
    rec2["wall_time_s"] = rec1["wall_time_s"];
    CHECK(rec2 == rec1);

    // Resuming under a changed config must refuse to mix results.
    const std::string drifted =
        "experiment --id at_most_half --replicates 700 --instances 1 --seed 3 "
        "--resume demo --out " + dir.string();
    CHECK(run_cli(drifted) == 2);
    fs::remove_all(dir);
}
