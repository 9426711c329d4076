#include "greensolve/io.hpp"
#include "greensolve/scenario.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace greensolve;
using namespace greensolve::io;
using linalg::ComplexMatrix;
using linalg::ComplexVector;
using linalg::cplx;

TEST_CASE("matrix JSON round trip", "[io]") {
    std::mt19937_64 rng(testsupport::default_seed);
    const auto m = testsupport::random_matrix(rng, 3);
    const auto back = matrix_from_json(to_json(m));
    CHECK(linalg::max_abs_diff(m, back) == 0.0);
    const auto d = matrix_from_json(json::parse(R"({"diagonal": {"re": [-1, -2], "im": [0, 3]}})"));
    CHECK(d.is_diagonal());
    CHECK(d(1, 1) == cplx(-2.0, 3.0));
    CHECK_THROWS_AS(matrix_from_json(json::parse(R"({"re": [[1, 2], [3]]})")), ConfigError);
    CHECK_THROWS_AS(matrix_from_json(json::parse(R"({"rows": 3, "re": [[1]]})")), ConfigError);
}

TEST_CASE("generator JSON round trip", "[io]") {
    const auto g = gen::GeneratorSpec::from_matrix(ComplexMatrix{{0.0, 1.0}, {-1.0, 0.0}});
    const auto back = generator_from_json(to_json(g));
    CHECK(back.is_matrix());
    CHECK(back.K() == g.K());
    const auto oracle = generator_from_json(json::parse(R"({"kind": "oracle", "family": {"exponent": 0.7, "count": 50}, "theta": 0.7})"));
    CHECK_FALSE(oracle.is_matrix());
    CHECK(oracle.dimension() == 50);
    const auto again = generator_from_json(to_json(oracle));
    CHECK(again.theta() == oracle.theta());
    CHECK(linalg::max_abs_diff(again.matrix(), oracle.matrix()) == 0.0);
    CHECK_THROWS_AS(generator_from_json(json::parse(R"({"kind": "banana"})")), ConfigError);
}

TEST_CASE("spectrum set JSON uses null for infinite ends", "[io]") {
    const double inf = std::numeric_limits<double>::infinity();
    const SpectrumSet s({3.0}, {{-inf, -1.5}, {-0.5, 0.5}});
    const auto j = to_json(s);
    CHECK(j["intervals"][0][0].is_null());
    CHECK(spectrum_set_from_json(j) == s);
    CHECK(spectrum_set_from_json(json("R")) == SpectrumSet::whole_line());
    CHECK_THROWS_AS(spectrum_set_from_json(json::parse(R"({"intervals": [[2, 1]]})")), ConfigError);
}

TEST_CASE("trig polynomial JSON round trip", "[io]") {
    harmonic::TrigPolynomial p(2);
    p.add(1.25, ComplexVector{1.0, cplx(0.0, -2.0)});
    p.add(-0.5, ComplexVector{0.0, 3.0});
    const auto back = trig_from_json(to_json(p), 2);
    REQUIRE(back.terms().size() == 2);
    for (double t : {0.0, 2.0}) CHECK((back(t) - p(t)).norm() == 0.0);
    CHECK_THROWS_AS(trig_from_json(to_json(p), 3), ConfigError);
}

TEST_CASE("sampled function CSV round trip is exact", "[io]") {
    std::mt19937_64 rng(testsupport::default_seed + 1);
    std::vector<ComplexVector> v;
    for (int i = 0; i < 50; ++i) v.push_back(testsupport::random_vector(rng, 2));
    const harmonic::SampledFunction f(-1.5, 0.01, v);
    std::stringstream ss;
    write_sampled_csv(ss, f);
    const auto back = read_sampled_csv(ss);
    CHECK(back.t0() == f.t0());
    CHECK(back.step() == f.step());
    REQUIRE(back.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) CHECK((back[i] - f[i]).norm() == 0.0);

    std::stringstream bad("t0,step,dim\n0,0.1,2\n1,2,3\n");
    CHECK_THROWS_AS(read_sampled_csv(bad), ConfigError);
    std::stringstream noheader("1,2\n");
    CHECK_THROWS_AS(read_sampled_csv(noheader), ConfigError);
    CHECK_THROWS_AS(read_sampled_csv(std::string("/nonexistent/phi.csv")), ConfigError);
}

TEST_CASE("Green table CSV", "[io]") {
    const auto c = cutoff::cutoff_resolvent(gen::GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0})), SpectrumSet::whole_line());
    const auto gf = green::build_green(c, 64.0, 32);
    std::stringstream ss;
    write_green_csv(ss, gf, 2.0, 0.5);
    const auto rows = read_green_csv(ss);
    REQUIRE(rows.size() == 8);
    for (const auto& [t, g] : rows) {
        const double expected = t > 0 ? std::exp(-t) : 0.0;
        CHECK(std::abs(g(0, 0) - expected) < 1e-4);
    }
}

TEST_CASE("scenario resolution fills defaults and validates", "[io][scenario]") {
    const auto base = std::filesystem::temp_directory_path();
    const auto s = scenario::resolve(json::parse(R"({"input": {"builtin": "example_6_5"}})"), {}, base);
    CHECK(s["name"] == "example_6_5");
    CHECK(s["grid"]["t_max"] == 256.0);
    CHECK(s["grid"]["n_near"] == 32);
    CHECK(s["tolerances"]["residual"] == 1e-3);
    CHECK(s["seed"] == scenario::default_seed);
    // Resolution is idempotent.
    CHECK(scenario::resolve(s, {}, base) == s);

    scenario::Overrides o;
    o.t_max = 128.0;
    o.tol_residual = 1e-5;
    const auto t = scenario::resolve(json::parse(R"({"input": {"builtin": "example_6_5"}})"), o, base);
    CHECK(t["grid"]["t_max"] == 128.0);
    CHECK(t["tolerances"]["residual"] == 1e-5);

    CHECK_THROWS_AS(scenario::resolve(json::parse(R"({"generator": {"kind": "matrix", "matrix": {"diagonal": [-1]}}})"), {}, base), ConfigError);
    CHECK_THROWS_AS(scenario::resolve(json::parse(R"({"name": "x", "generator": {}, "grid": {"t_max": 5}})"), {}, base), ConfigError);
    CHECK_THROWS_AS(scenario::resolve(json::parse(R"({"name": "x", "generator": {}, "input": {"csv": "no_such_file.csv"}})"), {}, base),
                    ConfigError);
    CHECK_THROWS_AS(scenario::resolve(json::parse(R"({"input": {"builtin": "nope"}})"), {}, base), ConfigError);
}

TEST_CASE("scenario runs in process", "[io][scenario]") {
    const auto base = std::filesystem::temp_directory_path();
    const auto s = scenario::resolve(json::parse(R"({"input": {"builtin": "example_6_5"}})"), {}, base);
    const auto out = scenario::run("solve", s);
    CHECK(out.passed);
    CHECK(out.report["solution"]["solution_spectrum"]["points"] == json::array({2.0}));
    CHECK(out.solution.has_value());
    CHECK(out.green != nullptr);
    const auto sp = scenario::run("spectrum", s);
    CHECK(sp.report["method"] == "exact");
    CHECK(sp.report["spectrum"]["points"] == json::array({2.0}));
}
