#include "greensolve/io.hpp"
#include "greensolve/solver.hpp"

#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using greensolve::io::json;

namespace {

const std::string cli = GREENSOLVE_CLI_PATH;
const fs::path configs = GREENSOLVE_CONFIG_DIR;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("greensolve_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Runs the tool with stderr captured to `dir/stderr.txt`; returns the exit code.
int run(const std::string& args, const fs::path& dir) {
    const std::string cmd = "'" + cli + "' " + args + " 2> '" + (dir / "stderr.txt").string() + "' > /dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string config(const std::string& name) { return "--config '" + (configs / name).string() + "'"; }

} // namespace

TEST_CASE("green writes a table with G(1) = 1/e", "[cli]") {
    const auto dir = scratch("green");
    REQUIRE(run("green " + config("diag_minus1.json") + " --grid-t-max 4096 --out '" + dir.string() + "'", dir) == 0);
    std::ifstream table(dir / "g_function.csv");
    const auto rows = greensolve::io::read_green_csv(table);
    bool found = false;
    for (const auto& [t, g] : rows)
        if (std::abs(t - 1.0) < 1e-12) {
            found = true;
            CHECK(std::abs(g(0, 0) - std::exp(-1.0)) < 1e-4);
        }
    CHECK(found);
    const auto report = read_json(dir / "report.json");
    CHECK(report["passed"] == true);
    CHECK(std::abs(report["green"]["l1_norm"].get<double>() - 1.0) < 1e-3);
}

TEST_CASE("builtin example passes its residual checks", "[cli]") {
    const auto dir = scratch("example");
    REQUIRE(run("solve " + config("example_6_5.json") + " --out '" + dir.string() + "'", dir) == 0);
    const auto report = read_json(dir / "report.json");
    CHECK(report["solution"]["residual_variation_of_constants"].get<double>() <= 1e-3);
    CHECK(report["solution"]["residual_integral_form"].get<double>() <= 1e-3);
    CHECK(fs::exists(dir / "solution.csv"));
    CHECK(fs::exists(dir / "g_function.csv"));
    const auto u = greensolve::io::read_sampled_csv((dir / "solution.csv").string());
    CHECK(u.dimension() == 2);
}

TEST_CASE("resonant scenario exits 1 and names the violation", "[cli]") {
    const auto dir = scratch("resonant");
    CHECK(run("solve " + config("resonant.json") + " --out '" + dir.string() + "'", dir) == 1);
    CHECK(read_json(dir / "report.json")["error"]["kind"] == "NonResonanceViolation");
    CHECK(read_json(dir / "stderr.txt")["error"]["kind"] == "NonResonanceViolation");
}

TEST_CASE("config and usage errors exit 2", "[cli]") {
    const auto dir = scratch("errors");
    write_file(dir / "missing.json", R"({"name": "m", "generator": {"kind": "matrix", "matrix": {"diagonal": [-1]}}, "input": {"csv": "nowhere.csv"}})");
    CHECK(run("solve --config '" + (dir / "missing.json").string() + "' --out '" + dir.string() + "'", dir) == 2);
    CHECK(read_json(dir / "stderr.txt")["error"]["kind"] == "ConfigError");
    CHECK(run("solve --no-such-flag", dir) == 2);
    CHECK(run("frobnicate", dir) == 2);
    CHECK(run("solve --config '" + (dir / "absent.json").string() + "'", dir) == 2);
    write_file(dir / "broken.json", "{not json");
    CHECK(run("solve --config '" + (dir / "broken.json").string() + "' --out '" + dir.string() + "'", dir) == 2);
    CHECK(run("counterexample --n-max 500 --out '" + dir.string() + "'", dir) == 2);
}

TEST_CASE("counterexample increments approach 1", "[cli]") {
    const auto dir = scratch("counterexample");
    REQUIRE(run("counterexample --n-max 50 --out '" + dir.string() + "'", dir) == 0);
    const auto r = read_json(dir / "report.json")["counterexample"];
    const auto& inc = r["increments"];
    REQUIRE(inc.size() == 49);
    CHECK(inc.back()["increment"].get<double>() > 0.97);
    CHECK(inc.back()["increment"].get<double>() > inc[0]["increment"].get<double>());
    CHECK(r["stepanoff_norm"].get<double>() <= 2.0);
}

TEST_CASE("spectrum on a builtin trig input", "[cli]") {
    const auto dir = scratch("spectrum");
    REQUIRE(run("spectrum " + config("example_6_5.json") + " --out '" + dir.string() + "'", dir) == 0);
    const auto r = read_json(dir / "report.json");
    CHECK(r["method"] == "exact");
    CHECK(r["spectrum"]["points"] == json::array({2.0}));
}

TEST_CASE("decay fit for the oracle family", "[cli]") {
    const auto dir = scratch("decay");
    REQUIRE(run("decay " + config("oracle_power_07.json") + " --out '" + dir.string() + "'", dir) == 0);
    const double theta = read_json(dir / "report.json")["fit"]["theta_hat"].get<double>();
    CHECK(theta >= 0.63);
    CHECK(theta <= 0.77);
}

TEST_CASE("identical config and seed give byte-identical reports", "[cli]") {
    const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    REQUIRE(run("solve " + config("random_dense.json") + " --seed 11 --out '" + a.string() + "'", a) == 0);
    REQUIRE(run("solve " + config("random_dense.json") + " --seed 11 --out '" + b.string() + "'", b) == 0);
    REQUIRE(run("solve " + config("random_dense.json") + " --seed 12 --out '" + c.string() + "'", c) == 0);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "solution.csv") == slurp(b / "solution.csv"));
    CHECK(slurp(a / "report.json") != slurp(c / "report.json"));
}

TEST_CASE("the manifest reproduces the run", "[cli]") {
    const auto first = scratch("manifest_first"), second = scratch("manifest_second");
    REQUIRE(run("solve " + config("random_dense.json") + " --seed 5 --tol-residual 2e-3 --grid-t-max 48 --out '" + first.string() + "'", first) == 0);
    const auto manifest = read_json(first / "manifest.json");
    CHECK(manifest.contains("timestamp"));
    CHECK(manifest["scenario"]["seed"] == 5);
    CHECK(manifest["scenario"]["grid"]["t_max"] == 48.0);
    CHECK(manifest["scenario"]["tolerances"]["residual"] == 2e-3);
    write_file(second / "scenario.json", manifest["scenario"].dump());
    REQUIRE(run(manifest["command"].get<std::string>() + " --config '" + (second / "scenario.json").string() + "' --out '" + second.string() + "'", second) == 0);
    CHECK(slurp(first / "report.json") == slurp(second / "report.json"));
}

TEST_CASE("verify accepts a true solution and rejects a perturbed one", "[cli]") {
    using namespace greensolve;
    const auto dir = scratch("verify");
    const auto g = gen::GeneratorSpec::from_matrix(linalg::ComplexMatrix{{-1.0, 2.0}, {0.0, -3.0}});
    const auto p = harmonic::TrigPolynomial::exponential(0.8, linalg::ComplexVector{1.0, linalg::cplx(0.0, 1.0)});
    const auto u = solver::solve_trig(g, p);
    io::write_sampled_csv((dir / "u.csv").string(), u.sample(-10.0, 0.01, 2001));
    io::write_sampled_csv((dir / "phi.csv").string(), p.sample(-10.0, 0.01, 2001));
    write_file(dir / "verify.json", R"({"name": "verify", "generator": {"kind": "matrix", "matrix": {"re": [[-1, 2], [0, -3]]}},
                                        "input": {"u_csv": "u.csv", "phi_csv": "phi.csv"}})");
    CHECK(run("verify --config '" + (dir / "verify.json").string() + "' --out '" + dir.string() + "'", dir) == 0);

    auto bad = u.sample(-10.0, 0.01, 2001).values();
    for (std::size_t i = 1000; i < 1100; ++i) bad[i][0] += 0.5;
    io::write_sampled_csv((dir / "u.csv").string(), harmonic::SampledFunction(-10.0, 0.01, bad));
    CHECK(run("verify --config '" + (dir / "verify.json").string() + "' --out '" + dir.string() + "'", dir) == 1);
}
