#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_raw(const std::string& shell) {
    FILE* pipe = popen((shell + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string text;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) text.append(buf, n);
    int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
}

RunResult run_cli(const std::string& args) {
    return run_raw(std::string("env -u CONELAB_OUT ") + CONELAB_BIN_PATH + " " + args);
}

std::string fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "conelab-cli-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string write_file(const std::string& dir, const std::string& name,
                       const std::string& text) {
    fs::path p = fs::path(dir) / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json manifest(const std::string& dir) {
    return json::parse(slurp((fs::path(dir) / "run.json").string()));
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

std::vector<std::string> cells_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

bool has_check(const json& man, const std::string& name, const std::string& verdict) {
    for (const json& c : man["checks"])
        if (c["name"] == name && c["verdict"] == verdict) return true;
    return false;
}

const std::string kEuclid = R"({"metric": {"kind": "euclidean"}})";

}  // namespace

TEST_CASE("version and argument errors") {
    RunResult v = run_cli("--version");
    CHECK(v.code == 0);
    CHECK(v.out.find("conelab 0.1.0") != std::string::npos);

    CHECK(run_cli("").code == 2);
    CHECK(run_cli("no-such-command").code == 2);
}

TEST_CASE("configuration errors exit with code two") {
    std::string dir = fresh_dir("config-errors");

    RunResult missing = run_cli("classify --config /nonexistent/nowhere.json");
    CHECK(missing.code == 2);
    CHECK(missing.out.find("config file not found") != std::string::npos);

    std::string bad = write_file(dir, "bad.json", "{not json");
    RunResult parse = run_cli("classify --config " + bad);
    CHECK(parse.code == 2);
    CHECK(parse.out.find("config is not valid JSON") != std::string::npos);

    std::string arr = write_file(dir, "arr.json", "[1, 2]");
    CHECK(run_cli("classify --config " + arr).out.find("config root must be a JSON object") !=
          std::string::npos);

    std::string empty = write_file(dir, "empty.json", "{}");
    RunResult schema = run_cli("classify --config " + empty + " --out " + dir + "/o1");
    CHECK(schema.code == 2);
    CHECK(schema.out.find("schema error, missing keys: metric (object with 'kind')") !=
          std::string::npos);

    std::string nokind = write_file(dir, "nokind.json", R"({"metric": {"n": 3}})");
    CHECK(run_cli("classify --config " + nokind + " --out " + dir + "/o2")
              .out.find("schema error, missing keys: metric.kind") != std::string::npos);

    std::string torus = write_file(dir, "torus.json", R"({"metric": {"kind": "torus"}})");
    RunResult unknown = run_cli("classify --config " + torus + " --out " + dir + "/o3");
    CHECK(unknown.code == 2);
    CHECK(unknown.out.find("unknown metric kind 'torus'") != std::string::npos);

    std::string badn =
        write_file(dir, "badn.json", R"({"metric": {"kind": "euclidean", "n": "three"}})");
    CHECK(run_cli("classify --config " + badn + " --out " + dir + "/o4")
              .out.find("key 'n' must be an integer") != std::string::npos);
}

TEST_CASE("classification run and manifest shape") {
    std::string dir = fresh_dir("classify");
    std::string cfg = write_file(dir, "cfg.json", kEuclid);
    RunResult r = run_cli("classify --config " + cfg + " --out " + dir + "/out");
    CHECK(r.code == 0);
    CHECK(r.out.find("classification: pass") != std::string::npos);
    CHECK(r.out.find("degree-match: pass") != std::string::npos);
    CHECK(r.out.find("manifest: ") != std::string::npos);

    json man = manifest(dir + "/out");
    CHECK(man["tool"] == "conelab 0.1.0");
    CHECK(man["command"] == "classify");
    CHECK(man["seed"] == 987654321u);
    CHECK(man["paper_factors"] == false);
    CHECK(man["exit_code"] == 0);
    CHECK(man["artifacts"].empty());
    CHECK(man["durations_ms"].contains("total"));
    CHECK(man["config_digest"].get<std::string>().size() == 16);
    for (const json& c : man["checks"]) CHECK(c["verdict"] == "pass");
}

TEST_CASE("curvature artifacts") {
    SUBCASE("flat space has identically vanishing components") {
        std::string dir = fresh_dir("curvature-flat");
        std::string cfg = write_file(dir, "cfg.json", kEuclid);
        RunResult r = run_cli("curvature --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        CHECK(r.out.find("ricci-min: pass") != std::string::npos);

        json man = manifest(dir + "/out");
        REQUIRE(man["artifacts"].size() == 1);
        CHECK(man["artifacts"][0]["path"] == "ricci.csv");
        CHECK(man["artifacts"][0]["header"] == "r,ric_rr,ric_tan");

        std::vector<std::string> rows = lines_of(slurp(dir + "/out/ricci.csv"));
        REQUIRE(!rows.empty());
        CHECK(rows[0] == "r,ric_rr,ric_tan");
        CHECK(rows.size() == man["artifacts"][0]["rows"].get<std::size_t>() + 1);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            std::vector<std::string> cells = cells_of(rows[i]);
            REQUIRE(cells.size() == 3);
            CHECK(std::abs(std::stod(cells[1])) <= 1e-12);
            CHECK(std::abs(std::stod(cells[2])) <= 1e-12);
        }
    }

    SUBCASE("doubly warped model emits all five sectional components") {
        std::string dir = fresh_dir("curvature-ni");
        std::string cfg = write_file(dir, "cfg.json", R"({"metric": {"kind": "ni"}})");
        RunResult r = run_cli("curvature --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        CHECK(r.out.find("sectional-min: pass") != std::string::npos);
        json man = manifest(dir + "/out");
        CHECK(man["artifacts"][0]["path"] == "sectional.csv");
        CHECK(man["artifacts"][0]["header"] == "r,K_x1x2,K_xy,K_y1y2,K_rx,K_ry");
    }
}

TEST_CASE("spectrum command") {
    SUBCASE("explicit cross-section data with integer degrees") {
        std::string dir = fresh_dir("spectrum-explicit");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "cone": {"kappa": 3.0, "mass": 12.566370614359172,
                     "entries": [{"lambda": 0, "multiplicity": 1},
                                 {"lambda": 2, "multiplicity": 3},
                                 {"lambda": 6, "multiplicity": 5}]}})");
        RunResult r = run_cli("spectrum --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        CHECK(r.out.find("exponent-roundtrip: pass") != std::string::npos);

        std::vector<std::string> rows = lines_of(slurp(dir + "/out/spectrum.csv"));
        REQUIRE(rows.size() == 4);
        CHECK(rows[0] == "k,lambda,multiplicity,alpha");
        CHECK(rows[2] == "1,2,3,1");
        CHECK(rows[3] == "2,6,5,2");
    }

    SUBCASE("tangent cone of a model metric") {
        std::string dir = fresh_dir("spectrum-cone");
        std::string cfg = write_file(
            dir, "cfg.json", R"({"metric": {"kind": "asym-conical", "beta": 0.8}})");
        RunResult r = run_cli("spectrum --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        json man = manifest(dir + "/out");
        CHECK(has_check(man, "exponent-roundtrip", "pass"));
        CHECK(man["artifacts"][0]["rows"].get<std::size_t>() >= 5);
    }
}

TEST_CASE("three circles scans") {
    SUBCASE("flat-model averages satisfy the implication off the spectrum") {
        std::string dir = fresh_dir("tc-flat");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "metric": {"kind": "euclidean"},
            "operation": {"alpha": 1.5, "r_max": 32}})");
        RunResult r = run_cli("three-circles --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        CHECK(r.out.find("off-spectrum: pass") != std::string::npos);
        CHECK(r.out.find("implication-all: pass") != std::string::npos);

        std::vector<std::string> rows = lines_of(slurp(dir + "/out/three_circles.csv"));
        CHECK(rows[0] == "r,J_r,J_half,J_quarter,premise,conclusion");
        for (std::size_t i = 1; i < rows.size(); ++i) {
            std::vector<std::string> cells = cells_of(rows[i]);
            REQUIRE(cells.size() == 6);
            CHECK(cells[4] == "1");
            CHECK(cells[5] == "1");
        }
    }

    SUBCASE("explicit cone harmonic") {
        std::string dir = fresh_dir("tc-cone");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "cone": {"sphere_dim": 2, "beta": 0.8, "count": 8},
            "harmonic": [{"c": 1.0, "mode": 1}, {"c": 0.5, "mode": 4}],
            "operation": {"alpha": 2.0, "r_min": 1, "r_max": 16}})");
        RunResult r = run_cli("three-circles --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        CHECK(r.out.find("implication-all: pass") != std::string::npos);
    }

    SUBCASE("a degree on the spectrum is reported and fails the run") {
        std::string dir = fresh_dir("tc-on-spectrum");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "metric": {"kind": "euclidean"},
            "operation": {"alpha": 1.0, "r_max": 16}})");
        RunResult r = run_cli("three-circles --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 1);
        CHECK(r.out.find("off-spectrum: fail") != std::string::npos);
        CHECK(manifest(dir + "/out")["exit_code"] == 1);
    }

    SUBCASE("the degree is required") {
        std::string dir = fresh_dir("tc-no-alpha");
        std::string cfg = write_file(dir, "cfg.json", kEuclid);
        RunResult r = run_cli("three-circles --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 2);
        CHECK(r.out.find("schema error, missing keys: operation.alpha") != std::string::npos);
    }
}

TEST_CASE("frequency command") {
    SUBCASE("flat model passes every check") {
        std::string dir = fresh_dir("freq-flat");
        std::string cfg = write_file(dir, "cfg.json", kEuclid);
        RunResult r = run_cli("frequency --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        for (const char* name : {"derivative-identity: pass", "i1-constancy: pass",
                                 "frequency-limit: pass", "d-doubling: pass"})
            CHECK(r.out.find(name) != std::string::npos);

        json man = manifest(dir + "/out");
        CHECK(man["artifacts"][0]["header"] == "r,I,D,E,F,freq,W");
        std::vector<std::string> rows = lines_of(slurp(dir + "/out/frequency.csv"));
        CHECK(rows.size() == man["artifacts"][0]["rows"].get<std::size_t>() + 1);
    }

    SUBCASE("non-maximal growth downgrades the Green-based checks") {
        std::string dir = fresh_dir("freq-ding");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "metric": {"kind": "ding"},
            "operation": {"r_max": 40}})");
        RunResult r = run_cli("frequency --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 1);
        CHECK(r.out.find("derivative-identity: skipped") != std::string::npos);
        CHECK(r.out.find("distance surrogate") != std::string::npos);
        CHECK(r.out.find("i1-constancy: skipped") != std::string::npos);
        CHECK(r.out.find("d-doubling: fail") != std::string::npos);
    }

    SUBCASE("wide window factors") {
        std::string dir = fresh_dir("freq-paper");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "metric": {"kind": "euclidean"},
            "operation": {"r_max": 8192}})");
        RunResult r =
            run_cli("frequency --paper-factors --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        CHECK(r.out.find("d-doubling: pass") != std::string::npos);
        CHECK(r.out.find("factor 8192") != std::string::npos);
        CHECK(manifest(dir + "/out")["paper_factors"] == true);
    }
}

TEST_CASE("existence command") {
    SUBCASE("flat model succeeds through every stage") {
        std::string dir = fresh_dir("exist-flat");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "metric": {"kind": "euclidean"},
            "operation": {"k": 1, "d": 1.5}})");
        RunResult r = run_cli("existence --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        for (const char* name :
             {"preconditions: pass", "normalize: pass", "doubling: pass", "cascade: pass",
              "envelope: pass", "sup-convergence: pass", "nonconstancy: pass"})
            CHECK(r.out.find(name) != std::string::npos);

        std::vector<std::string> rows = lines_of(slurp(dir + "/out/levels.csv"));
        CHECK(rows[0] == "level,R,doubling,cascade,envelope,sup_diff");
        CHECK(rows.size() == 7);
        CHECK(manifest(dir + "/out")["exit_code"] == 0);
    }

    SUBCASE("the default degree sits above the first tangent-cone exponent") {
        std::string dir = fresh_dir("exist-asym");
        std::string cfg = write_file(
            dir, "cfg.json", R"({"metric": {"kind": "asym-conical", "beta": 0.8}})");
        RunResult r = run_cli("existence --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 0);
        CHECK(r.out.find("nonconstancy: pass") != std::string::npos);
    }

    SUBCASE("bounded warps fail the doubling stage") {
        std::string dir = fresh_dir("exist-ding");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "metric": {"kind": "ding"},
            "operation": {"k": 1, "d": 2.0}})");
        RunResult r = run_cli("existence --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 1);
        CHECK(r.out.find("doubling: fail") != std::string::npos);
        CHECK(r.out.find("cascade: skipped") != std::string::npos);
        CHECK(manifest(dir + "/out")["exit_code"] == 1);
        CHECK(lines_of(slurp(dir + "/out/levels.csv")).size() == 2);
    }

    SUBCASE("a degree on the spectrum is a precondition failure") {
        std::string dir = fresh_dir("exist-spectrum");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "metric": {"kind": "euclidean"},
            "operation": {"k": 1, "d": 2.0}})");
        RunResult r = run_cli("existence --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 2);
        CHECK(r.out.find("preconditions: precondition-failed") != std::string::npos);
        CHECK(r.out.find("spectrum") != std::string::npos);
        CHECK(manifest(dir + "/out")["exit_code"] == 2);
    }
}

TEST_CASE("verification scenarios") {
    SUBCASE("doubly warped reference parameters") {
        std::string dir = fresh_dir("verify-ni");
        RunResult r = run_cli("verify-ni --out " + dir + "/out");
        CHECK(r.code == 0);
        json man = manifest(dir + "/out");
        for (int i = 1; i <= 8; ++i) CHECK(has_check(man, "assp" + std::to_string(i), "pass"));
        for (const char* name : {"gluing-fiber", "gluing-base", "sectional-positivity",
                                 "sectional-min-stability", "growth-degree"})
            CHECK(has_check(man, name, "pass"));
        CHECK(fs::exists(dir + "/out/sectional.csv"));
    }

    SUBCASE("a perturbed tail constant is caught") {
        std::string dir = fresh_dir("verify-ni-bad");
        std::string cfg = write_file(dir, "cfg.json", R"({
            "metric": {"kind": "ni", "params": {"c0": 3.0}}})");
        RunResult r = run_cli("verify-ni --config " + cfg + " --out " + dir + "/out");
        CHECK(r.code == 1);
        CHECK(r.out.find("assp4: fail") != std::string::npos);
    }

    SUBCASE("bounded warp scenario") {
        std::string dir = fresh_dir("verify-ding");
        RunResult r = run_cli("verify-ding --out " + dir + "/out");
        CHECK(r.code == 0);
        json man = manifest(dir + "/out");
        for (const char* name :
             {"gluing", "ricci-nonnegative", "growth-degree", "mode-classification"})
            CHECK(has_check(man, name, "pass"));
        CHECK(r.out.find("expected rate") != std::string::npos);
    }
}

TEST_CASE("output directory resolution") {
    std::string base = fresh_dir("outdirs");
    std::string cfg = write_file(base, "cfg.json", kEuclid);

    SUBCASE("environment variable beats the flag") {
        std::string flagged = base + "/by-flag", forced = base + "/by-env";
        RunResult r = run_raw("env CONELAB_OUT=" + forced + " " + CONELAB_BIN_PATH +
                              " classify --config " + cfg + " --out " + flagged);
        CHECK(r.code == 0);
        CHECK(fs::exists(forced + "/run.json"));
        CHECK_FALSE(fs::exists(flagged));
    }

    SUBCASE("config key used when no flag is given") {
        std::string from_cfg = base + "/from-cfg";
        std::string cfg2 = write_file(base, "cfg2.json", R"({"out": ")" + from_cfg +
                                                             R"(", "metric": {"kind": "euclidean"}})");
        CHECK(run_cli("classify --config " + cfg2).code == 0);
        CHECK(fs::exists(from_cfg + "/run.json"));
    }

    SUBCASE("default is runs/<command> under the working directory") {
        RunResult r = run_raw("cd " + base + " && env -u CONELAB_OUT " + CONELAB_BIN_PATH +
                              " classify --config " + cfg);
        CHECK(r.code == 0);
        CHECK(fs::exists(base + "/runs/classify/run.json"));
    }
}

TEST_CASE("deterministic artifacts and digests") {
    std::string base = fresh_dir("determinism");
    std::string cfg = write_file(base, "cfg.json", R"({
        "metric": {"kind": "euclidean"},
        "operation": {"r_max": 20}})");

    SUBCASE("reruns emit byte-identical tables and equal digests") {
        CHECK(run_cli("frequency --config " + cfg + " --out " + base + "/a").code == 0);
        CHECK(run_cli("frequency --config " + cfg + " --out " + base + "/b").code == 0);
        CHECK(slurp(base + "/a/frequency.csv") == slurp(base + "/b/frequency.csv"));
        json ma = manifest(base + "/a"), mb = manifest(base + "/b");
        CHECK(ma["config_digest"] == mb["config_digest"]);
        CHECK(ma["checks"].dump() == mb["checks"].dump());
        CHECK(ma["artifacts"].dump() == mb["artifacts"].dump());
    }

    SUBCASE("the digest ignores key order") {
        std::string c1 = write_file(base, "k1.json", R"({"metric": {"kind": "euclidean", "n": 3}})");
        std::string c2 = write_file(base, "k2.json", R"({"metric": {"n": 3, "kind": "euclidean"}})");
        CHECK(run_cli("classify --config " + c1 + " --out " + base + "/k1").code == 0);
        CHECK(run_cli("classify --config " + c2 + " --out " + base + "/k2").code == 0);
        CHECK(manifest(base + "/k1")["config_digest"] == manifest(base + "/k2")["config_digest"]);
    }

    SUBCASE("tolerance and seed overrides are part of the digest") {
        std::string e = write_file(base, "e.json", kEuclid);
        CHECK(run_cli("classify --config " + e + " --out " + base + "/d0").code == 0);
        CHECK(run_cli("classify --tol 0.001 --config " + e + " --out " + base + "/d1").code == 0);
        CHECK(run_cli("classify --seed 42 --config " + e + " --out " + base + "/d2").code == 0);
        json d0 = manifest(base + "/d0"), d1 = manifest(base + "/d1"), d2 = manifest(base + "/d2");
        CHECK(d0["config_digest"] != d1["config_digest"]);
        CHECK(d0["config_digest"] != d2["config_digest"]);
        CHECK(d2["seed"] == 42u);
    }

    SUBCASE("pipeline level tables rerun identically") {
        std::string cfg2 = write_file(base, "p.json", R"({
            "metric": {"kind": "euclidean"},
            "operation": {"k": 1, "d": 1.5}})");
        CHECK(run_cli("existence --config " + cfg2 + " --out " + base + "/p1").code == 0);
        CHECK(run_cli("existence --config " + cfg2 + " --out " + base + "/p2").code == 0);
        CHECK(slurp(base + "/p1/levels.csv") == slurp(base + "/p2/levels.csv"));
    }
}
