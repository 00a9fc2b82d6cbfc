#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "nq/cli.hpp"
#include "nq/errors.hpp"

using namespace nq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nq_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

RunConfig config(Command c, const std::string& spec, const fs::path& out) {
    RunConfig r;
    r.command = c;
    r.spec_path = fs::path(NQ_SPECS_DIR) / spec;
    r.output_dir = out;
    r.tolerances.restarts = 3;
    return r;
}

int quiet_run(const RunConfig& c) {
    std::ostringstream out, err;
    return run(c, out, err);
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p)); }

}  // namespace

TEST_CASE("number formatting and hashing") {
    CHECK(csv_number(0.1) == "0.10000000000000001");
    CHECK(csv_number(2.0) == "2");
    CHECK(csv_number(-1.0 / 0.0) == "-inf");
    CHECK(csv_number(1.0 / 0.0) == "inf");
    CHECK(std::stod(csv_number(1.0 / 3.0)) == 1.0 / 3.0);
    // Published FNV-1a 64 test vectors.
    CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
    CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("atomic_write replaces content and leaves no temporaries") {
    const fs::path dir = scratch("atomic");
    fs::create_directories(dir);
    atomic_write(dir / "x.txt", "one");
    atomic_write(dir / "x.txt", "two\n");
    CHECK(read_text_file(dir / "x.txt") == "two\n");
    int files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    CHECK_THROWS_AS(atomic_write(dir / "missing" / "y.txt", "z"), Error);
}

TEST_CASE("extremal run writes report and manifest with infinities as strings") {
    const fs::path out = scratch("extremal");
    REQUIRE(quiet_run(config(Command::Extremal, "indefinite_negative.ini", out)) == 0);
    const auto report = load_json(out / "report.json");
    CHECK(report.at("lambda_star_max") == "inf");
    CHECK(report.at("lambda_max") == "inf");
    CHECK(report.at("lambda_min").is_number());
    CHECK(report.at("tolerances").at("restarts") == 3.0);
    const auto manifest = load_json(out / "manifest.json");
    CHECK(manifest.at("status") == 0);
    REQUIRE(manifest.at("outputs").size() == 1);
    CHECK(manifest.at("outputs")[0].at("file") == "report.json");
    CHECK(manifest.at("outputs")[0].at("fnv1a") == hex64(fnv1a(read_text_file(out / "report.json"))));
    // Keys come out sorted.
    const std::string text = read_text_file(out / "manifest.json");
    CHECK(text.find("\"command\"") < text.find("\"config_hash\""));
    CHECK(text.find("\"config_hash\"") < text.find("\"outputs\""));
}

TEST_CASE("manifests are identical across runs and output directories") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    auto c = config(Command::Solve, "convex_concave.ini", a);
    c.lambda = 3.0;
    REQUIRE(quiet_run(c) == 0);
    c.output_dir = b;
    REQUIRE(quiet_run(c) == 0);
    CHECK(read_text_file(a / "manifest.json") == read_text_file(b / "manifest.json"));
    CHECK(read_text_file(a / "solve.json") == read_text_file(b / "solve.json"));

    const std::string spec_text = read_text_file(c.spec_path);
    const std::string h = config_hash(c, spec_text);
    c.seed = 1;
    CHECK(config_hash(c, spec_text) != h);
    c.seed = 0;
    c.tolerances.residual = 1e-6;
    CHECK(config_hash(c, spec_text) != h);
}

TEST_CASE("fiber and anchor artifacts") {
    const fs::path out = scratch("fiber");
    REQUIRE(quiet_run(config(Command::Fiber, "convex_concave.ini", out)) == 0);
    const std::string csv = read_text_file(out / "fiber.csv");
    CHECK(csv.rfind("t,r,dr\n", 0) == 0);
    CHECK(csv.find('\r') == std::string::npos);
    const auto crit = load_json(out / "criticals.json");
    CHECK(crit.at("shape_class") == "UniqueMax");
    CHECK(crit.at("limit_at_infinity") == "-inf");
    CHECK(crit.at("critical_points").size() == 1);

    const fs::path an = scratch("anchor");
    REQUIRE(quiet_run(config(Command::Anchor, "matrix.ini", an)) == 0);
    CHECK(load_json(an / "anchor.json").at("max_abs_diff").get<double>() < 1e-8);
    CHECK(quiet_run(config(Command::Anchor, "convex_concave.ini", scratch("anchor_bad"))) == 2);
}

TEST_CASE("solve, verify and sweep") {
    const fs::path out = scratch("solve");
    auto c = config(Command::Solve, "convex_concave.ini", out);
    c.lambda = 2.0;
    REQUIRE(quiet_run(c) == 0);
    const auto solve = load_json(out / "solve.json");
    CHECK(solve.at("branches").at("N1").at("verification").at("passed") == true);
    CHECK(solve.at("branches").at("N2").at("phi").get<double>() < 0);

    auto v = config(Command::Verify, "convex_concave.ini", scratch("verify"));
    v.lambda = 2.0;
    v.solution_path = out / "solution_N1.csv";
    CHECK(quiet_run(v) == 0);
    CHECK(load_json(v.output_dir / "verify.json").at("branch") == "N1");
    v.lambda = 2.5;  // not on this Nehari manifold
    CHECK(quiet_run(v) == 1);

    auto s = config(Command::Sweep, "convex_concave.ini", scratch("sweep"));
    s.lambdas = {0.0, 2.0, 1e3};
    CHECK(quiet_run(s) == 0);
    const std::string table = read_text_file(s.output_dir / "table.csv");
    CHECK(table.rfind("lambda,phi1,phi2,residual1,residual2,status1,status2\n", 0) == 0);
    CHECK(table.find("BranchEmpty,BranchEmpty") != std::string::npos);
}

TEST_CASE("configuration errors exit 2 and still leave a manifest") {
    const fs::path out = scratch("errors");
    auto c = config(Command::Solve, "convex_concave.ini", out);
    CHECK(quiet_run(c) == 2);  // no lambda
    CHECK(load_json(out / "manifest.json").at("error").at("error") == "ConfigError");
    c.spec_path = fs::path(NQ_SPECS_DIR) / "does_not_exist.ini";
    CHECK(quiet_run(c) == 2);
}
