#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "roadval_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
    std::string log = (work_dir() / "last_run.log").string();
    std::string cmd = "ROADVAL_OUT_DIR='" + work_dir().string() + "' '" + CLI_BINARY "' " + args +
                      " >'" + log + "' 2>&1";
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

// Shared small pipeline artifacts, produced once.
void ensure_pipeline() {
    static bool done = [] {
        RunResult s = run(
            "synth --seed 404 --roads 3 --noise 0.008 "
            "--inject-kind vector_offset_px --inject-magnitude 30");
        REQUIRE(s.exit_code == 0);
        RunResult e = run(
            "extract --image " + (work_dir() / "image.ppm").string() +
            " --truth " + (work_dir() / "scene.json").string() +
            " --corrupted " + (work_dir() / "corrupted.json").string() +
            " --n-per-class 120 --label-seed 5");
        REQUIRE(e.exit_code == 0);
        RunResult t = run("train --data " + (work_dir() / "rows.tsv").string() + " --box-c 10");
        REQUIRE(t.exit_code == 0);
        return true;
    }();
    (void)done;
}

}  // namespace

TEST_CASE("unknown flags exit with status 2") {
    RunResult r = run("synth --no-such-flag 1");
    CHECK(r.exit_code == 2);
    RunResult top = run("--bogus");
    CHECK(top.exit_code == 2);
}

TEST_CASE("missing required options fail cleanly") {
    RunResult r = run("train");
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("--data") != std::string::npos);
}

TEST_CASE("roc on a malformed dataset names the offending file") {
    fs::path bad = work_dir() / "bad_rows.tsv";
    {
        std::ofstream out(bad);
        out << "# roadval descriptor dump v1\nnot a row\n";
    }
    fs::path model = work_dir() / "model.json";
    ensure_pipeline();
    RunResult r = run("roc --data " + bad.string() + " --model " + model.string());
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("error:") != std::string::npos);

    RunResult missing = run("roc --data /nonexistent/rows.tsv --model " + model.string());
    CHECK(missing.exit_code != 0);
    CHECK(missing.output.find("/nonexistent/rows.tsv") != std::string::npos);
}

TEST_CASE("full pipeline smoke: synth, extract, train, validate, conflate, roc") {
    ensure_pipeline();
    CHECK(fs::exists(work_dir() / "scene.json"));
    CHECK(fs::exists(work_dir() / "image.ppm"));
    CHECK(fs::exists(work_dir() / "corrupted.json"));
    CHECK(first_line(work_dir() / "rows.tsv") == "# roadval descriptor dump v1");

    RunResult v = run("validate --scene " + (work_dir() / "corrupted.json").string() +
                      " --image " + (work_dir() / "image.ppm").string() + " --model " +
                      (work_dir() / "model.json").string());
    CHECK(v.exit_code == 0);
    CHECK(first_line(work_dir() / "report.tsv") == "# roadval validation report v1");
    CHECK(slurp(work_dir() / "report.tsv").find("inconsistent") != std::string::npos);

    RunResult c = run("conflate --scene " + (work_dir() / "corrupted.json").string() +
                      " --image " + (work_dir() / "image.ppm").string() + " --model " +
                      (work_dir() / "model.json").string());
    CHECK(c.exit_code == 0);
    CHECK(fs::exists(work_dir() / "conflated.ppm"));
    CHECK(slurp(work_dir() / "conflated.json").find("conflation") != std::string::npos);

    RunResult r = run("roc --data " + (work_dir() / "rows.tsv").string() + " --model " +
                      (work_dir() / "model.json").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("auc") != std::string::npos);
    CHECK(first_line(work_dir() / "roc.tsv") == "# roadval roc v1");
    CHECK(fs::exists(work_dir() / "roc.ppm"));
}

TEST_CASE("a clean scene validates as fully consistent") {
    ensure_pipeline();
    RunResult v = run("validate --scene " + (work_dir() / "scene.json").string() + " --image " +
                      (work_dir() / "image.ppm").string() + " --model " +
                      (work_dir() / "model.json").string() + " --out-report " +
                      (work_dir() / "clean_report.tsv").string());
    CHECK(v.exit_code == 0);
    std::ifstream rep(work_dir() / "clean_report.tsv");
    std::string line;
    int segments = 0;
    while (std::getline(rep, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++segments;
        CHECK(line.find("\tconsistent") != std::string::npos);
        CHECK(line.find("inconsistent") == std::string::npos);
    }
    CHECK(segments == 3);
}

TEST_CASE("artifacts are bit-identical under the same seed") {
    ensure_pipeline();
    fs::path alt = work_dir() / "again";
    fs::create_directories(alt);
    std::string log = (alt / "run.log").string();
    std::string cmd = "ROADVAL_OUT_DIR='" + alt.string() + "' '" + CLI_BINARY +
                      std::string("' synth --seed 404 --roads 3 --noise 0.008 "
                                  "--inject-kind vector_offset_px --inject-magnitude 30 >'") +
                      log + "' 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(slurp(alt / "scene.json") == slurp(work_dir() / "scene.json"));
    CHECK(slurp(alt / "image.ppm") == slurp(work_dir() / "image.ppm"));
    CHECK(slurp(alt / "corrupted.json") == slurp(work_dir() / "corrupted.json"));
}

TEST_CASE("version banners lead every artifact") {
    ensure_pipeline();
    CHECK(first_line(work_dir() / "rows.tsv").find("v1") != std::string::npos);
    CHECK(slurp(work_dir() / "model.json").find("\"version\"") != std::string::npos);
    CHECK(slurp(work_dir() / "scene.json").find("\"version\"") != std::string::npos);
}
