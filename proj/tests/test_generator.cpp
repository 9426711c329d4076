#include "greensolve/generator.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace greensolve;
using namespace greensolve::gen;
using linalg::ComplexMatrix;
using linalg::cplx;
using linalg::operator_norm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<cplx> power_family(double exponent, int count) {
    std::vector<cplx> poles;
    for (int k = 1; k <= count; ++k) poles.emplace_back(-std::pow(k, exponent), k);
    return poles;
}

} // namespace

TEST_CASE("resolvent of scalar generators", "[generator]") {
    const auto g = GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0}));
    CHECK(linalg::max_abs_diff(resolvent(g, 0.0), ComplexMatrix::diagonal({1.0})) < 1e-15);
    const auto r1 = resolvent(g, 1.0);
    CHECK(std::abs(r1(0, 0) - 1.0 / cplx(1.0, 1.0)) < 1e-15);
    CHECK_THAT(operator_norm(r1), WithinRel(1.0 / std::sqrt(2.0), 1e-14));
}

TEST_CASE("resolvent of the pole family near a pole", "[generator]") {
    const auto g = GeneratorSpec::from_poles(power_family(0.7, 50), 0.7);
    const auto r = resolvent(g, 25.0);
    double biggest = 0.0;
    for (auto v : r.raw()) biggest = std::max(biggest, std::abs(v));
    CHECK_THAT(biggest, WithinRel(std::pow(25.0, -0.7), 0.05));
}

TEST_CASE("resolvent refuses points of K", "[generator]") {
    const auto g = GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0, cplx(0, 2)}));
    CHECK_THROWS_AS(resolvent(g, 2.0), SpectrumHit);
    CHECK_THROWS_AS(resolvent(g, 2.0 + 5e-9), SpectrumHit);
    CHECK_NOTHROW(resolvent(g, 2.0 + 1e-6));
}

TEST_CASE("resolvent derivatives by matrix powers", "[generator]") {
    const auto g = GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0}));
    CHECK(linalg::max_abs_diff(resolvent_derivative(g, 0.0, 0), resolvent(g, 0.0)) == 0.0);
    CHECK(std::abs(resolvent_derivative(g, 0.0, 1)(0, 0) - cplx(0, -1)) < 1e-15);
    CHECK(std::abs(resolvent_derivative(g, 0.0, 2)(0, 0) - cplx(-2, 0)) < 1e-15);
    CHECK_THROWS_AS(resolvent_derivative(g, 0.0, 3), DomainError);
}

TEST_CASE("resolvent derivatives match central differences", "[generator][property]") {
    std::mt19937_64 rng(testsupport::default_seed + 10);
    std::uniform_real_distribution<double> pick(-6.0, 6.0);
    const ComplexMatrix rot{{0.0, 1.0}, {-1.0, 0.0}};
    const auto g = GeneratorSpec::from_matrix(rot);
    const auto m = GeneratorSpec::from_matrix(testsupport::random_matrix(rng, 4));
    for (const auto* gen : {&g, &m}) {
        int tested = 0;
        while (tested < 10) {
            const double t = pick(rng);
            if (gen->distance_to_K(t) < 1.0) continue;
            ++tested;
            const double h = 1e-4;
            for (int k = 1; k <= 2; ++k) {
                const auto fd = (1.0 / (2 * h)) * (resolvent_derivative(*gen, t + h, k - 1) -
                                                    resolvent_derivative(*gen, t - h, k - 1));
                const auto exact = resolvent_derivative(*gen, t, k);
                CHECK(operator_norm(fd - exact) <= 1e-4 * operator_norm(exact));
            }
        }
    }
}

TEST_CASE("Neumann bracket for large |t|", "[generator][property]") {
    std::mt19937_64 rng(testsupport::default_seed + 11);
    for (int trial = 0; trial < 5; ++trial) {
        auto a = testsupport::random_matrix(rng, 3);
        a *= 5.0 / operator_norm(a);
        const auto g = GeneratorSpec::from_matrix(a);
        for (double t : {50.0, -50.0, 400.0, -3000.0}) {
            const double r = operator_norm(resolvent(g, t));
            CHECK(r >= 1.0 / (2 * std::abs(t)));
            CHECK(r <= 2.0 / std::abs(t));
        }
    }
}

TEST_CASE("derivative bound formula", "[generator]") {
    CHECK_THAT(derivative_bound(1.0, 0.9, 10.0, 0), WithinRel(std::pow(10.0, -0.9), 1e-14));
    CHECK_THAT(derivative_bound(1.0, 0.9, 10.0, 1), WithinRel(std::pow(10.0, -1.8), 1e-14));
    const auto g = GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0, cplx(0, 2)}));
    CHECK_THAT(derivative_bound(g, g.a(), 0), WithinRel(g.eta() * std::pow(g.a(), -g.delta()), 1e-14));
    CHECK_THROWS_AS(derivative_bound(g, 1.0, 0), DomainError);
}

TEST_CASE("derivative bound dominates the derivatives on the probe", "[generator][property]") {
    std::mt19937_64 rng(testsupport::default_seed + 12);
    const auto m = GeneratorSpec::from_matrix(testsupport::random_matrix(rng, 4));
    const auto o = GeneratorSpec::from_poles(power_family(0.7, 200), 0.7);
    for (const auto* g : {&m, &o})
        for (double t : g->default_probe())
            for (int k = 0; k <= 2; ++k)
                CHECK(operator_norm(resolvent_derivative(*g, t, k)) <= derivative_bound(*g, t, k) * (1 + 1e-12));
}

TEST_CASE("decay fit", "[generator]") {
    const auto scalar = GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0}));
    const auto fit = fit_decay(scalar);
    CHECK(fit.theta_hat >= 0.95);
    CHECK(fit.theta_hat <= 1.05);
    CHECK(fit.delta < 1.0);

    const auto family = GeneratorSpec::from_poles(power_family(0.7, 200));
    const auto f7 = fit_decay(family);
    CHECK(f7.theta_hat >= 0.63);
    CHECK(f7.theta_hat <= 0.77);
    CHECK(family.delta() <= family.theta());
    CHECK(family.delta() > 0.5);

    CHECK_THROWS_AS(GeneratorSpec::from_poles(power_family(0.3, 200)), DecayViolation);
    const auto declared = GeneratorSpec::from_poles(power_family(0.3, 200), 0.7);
    CHECK_THROWS_AS(fit_decay(declared), DecayViolation);
}

TEST_CASE("decay fit preconditions", "[generator]") {
    const auto g = GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0}));
    CHECK_THROWS_AS(fit_decay(g, {1, 2, 3}), DomainError);
    std::vector<double> narrow;
    for (int i = 0; i < 20; ++i) narrow.push_back(1.0 + i);
    CHECK_THROWS_AS(fit_decay(g, narrow), DomainError);
    std::vector<double> inside = g.default_probe();
    inside[0] = 0.5;
    CHECK_THROWS_AS(fit_decay(g, inside), DomainError);
}

TEST_CASE("imaginary spectrum and a", "[generator]") {
    auto [k1, a1] = imaginary_spectrum(GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0, cplx(0, 2)})));
    CHECK(k1 == std::vector<double>{2.0});
    CHECK(a1 == 3.0);
    auto [k2, a2] = imaginary_spectrum(GeneratorSpec::from_matrix(ComplexMatrix::diagonal({-1.0, -2.0})));
    CHECK(k2.empty());
    CHECK(a2 == 1.0);
    auto [k3, a3] = imaginary_spectrum(GeneratorSpec::from_matrix(ComplexMatrix{{0.0, 1.0}, {-1.0, 0.0}}));
    REQUIRE(k3.size() == 2);
    CHECK_THAT(k3[0], WithinAbs(-1.0, 1e-12));
    CHECK_THAT(k3[1], WithinAbs(1.0, 1e-12));
    CHECK_THAT(a3, WithinAbs(2.0, 1e-12));
}

TEST_CASE("eta covers the probe grid", "[generator]") {
    const auto g = GeneratorSpec::from_poles(power_family(0.7, 200), 0.7);
    for (double t : g.default_probe())
        CHECK(std::pow(std::abs(t), g.delta()) * operator_norm(resolvent(g, t)) <= g.eta() * (1 + 1e-12));
}
