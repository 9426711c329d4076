#include "greensolve/harmonic.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace greensolve;
using namespace greensolve::harmonic;
using linalg::ComplexMatrix;
using linalg::ComplexVector;
using linalg::cplx;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double pi = std::numbers::pi;

SampledFunction sample_fn(double t0, double step, std::size_t count, const std::function<ComplexVector(double)>& f) {
    std::vector<ComplexVector> v;
    for (std::size_t i = 0; i < count; ++i) v.push_back(f(t0 + static_cast<double>(i) * step));
    return SampledFunction(t0, step, std::move(v));
}

ComplexVector scalar(cplx z) { return ComplexVector(std::vector<cplx>{z}); }

TrigPolynomial two_tone() {
    TrigPolynomial p(1);
    p.add(1.0, scalar(1.0));
    p.add(std::sqrt(2.0), scalar(1.0));
    return p;
}

} // namespace

TEST_CASE("trig polynomials merge frequencies and bound their sup", "[harmonic]") {
    TrigPolynomial p(2);
    p.add(1.0, ComplexVector{1.0, 0.0});
    p.add(1.0, ComplexVector{0.0, 2.0});
    p.add(-3.0, ComplexVector{cplx(0, 1), 0.0});
    REQUIRE(p.terms().size() == 2);
    CHECK(p.sup_bound() <= std::sqrt(5.0) + 1.0 + 1e-12);
    for (double t : {0.0, 0.7, -4.0}) CHECK(p(t).norm() <= p.sup_bound());
    const auto q = p.translated(0.5);
    for (double t : {0.0, 1.3}) CHECK((q(t) - p(t + 0.5)).norm() < 1e-14);
}

TEST_CASE("trig_spectrum examples", "[harmonic]") {
    CHECK(trig_spectrum(TrigPolynomial(1)).empty());
    CHECK(trig_spectrum(TrigPolynomial::exponential(2.0, scalar(1.0))) == SpectrumSet::from_points({2.0}));
    TrigPolynomial p(2);
    p.add(1.0, ComplexVector{1.0, 0.0});
    p.add(-1.0, ComplexVector{0.0, 1.0});
    CHECK(trig_spectrum(p) == SpectrumSet::from_points({-1.0, 1.0}));
}

TEST_CASE("convolve_trig examples", "[harmonic]") {
    TrigPolynomial p(2);
    p.add(0.5, ComplexVector{1.0, 2.0});
    p.add(-2.0, ComplexVector{cplx(0, 1), 0.0});
    const auto same = convolve_trig([](double) { return ComplexMatrix::identity(2); }, p);
    for (double t : {0.0, 1.0, -2.5}) CHECK((same(t) - p(t)).norm() < 1e-15);

    const ComplexMatrix a{{-1.0, 2.0}, {0.0, -3.0}};
    auto resolvent = [&](double lambda) { return linalg::inverse(cplx(0.0, lambda) * ComplexMatrix::identity(2) - a); };
    const auto single = convolve_trig(resolvent, TrigPolynomial::exponential(0.5, ComplexVector{1.0, 1.0}));
    REQUIRE(single.terms().size() == 1);
    CHECK((single.terms()[0].x - resolvent(0.5) * ComplexVector{1.0, 1.0}).norm() < 1e-14);

    const auto vanished = convolve_trig([](double) { return ComplexMatrix::zeros(2); }, p);
    CHECK(trig_spectrum(vanished).empty());
}

TEST_CASE("spectral inclusion for diagonal symbols on random trig polynomials", "[harmonic][property]") {
    std::mt19937_64 rng(testsupport::default_seed);
    std::uniform_real_distribution<double> freq(-5.0, 5.0), coin(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        TrigPolynomial p(3);
        const int terms = 1 + trial % 6;
        for (int j = 0; j < terms; ++j) p.add(std::round(freq(rng) * 4.0) / 4.0, testsupport::random_vector(rng, 3));
        // Symbol vanishes on a random half of the frequency lattice.
        const double cut = freq(rng);
        auto symbol = [&](double lambda) {
            if (lambda < cut) return ComplexMatrix::zeros(3);
            return ComplexMatrix::diagonal({1.0, cplx(0, lambda), 2.0});
        };
        const auto out = convolve_trig(symbol, p);
        const auto sp = trig_spectrum(out);
        CHECK(trig_spectrum(p).includes(sp));
        for (double l : sp.points()) CHECK(l >= cut);
    }
}

TEST_CASE("spectrum_estimate examples", "[harmonic]") {
    const std::size_t n = 1u << 14;
    const double step = 0.01;
    const auto f = sample_fn(0.0, step, n, [](double t) { return scalar(std::polar(1.0, 2.0 * t)); });
    const auto sp = spectrum_estimate(f, 0.5);
    REQUIRE(sp.points().size() == 1);
    CHECK(std::abs(sp.points()[0] - 2.0) <= frequency_bin(f));

    const auto c = sample_fn(0.0, step, 2048, [](double) { return scalar(cplx(0.3, -1.0)); });
    CHECK(spectrum_estimate(c, 0.5) == SpectrumSet::from_points({0.0}));

    const auto mix = sample_fn(0.0, step, n, [](double t) { return scalar(std::polar(1.0, 2.0 * t) + 0.001 * std::polar(1.0, 7.0 * t)); });
    const auto sm = spectrum_estimate(mix, 0.5);
    REQUIRE(sm.points().size() == 1);
    CHECK(std::abs(sm.points()[0] - 2.0) <= frequency_bin(mix));

    CHECK_THROWS_AS(spectrum_estimate(sample_fn(0.0, step, 1000, [](double) { return scalar(1.0); }), 0.5), TooFewSamples);
}

TEST_CASE("Fejer approximation of a pure exponential is a single line", "[harmonic][fejer]") {
    // Step chosen so 2n is a whole number of samples and 2 sits on the lattice pi/n.
    const double n = pi;
    const double step = 2.0 * pi / 4096.0;
    const auto f = sample_fn(-n, step, 4097, [](double t) { return scalar(std::polar(1.0, 2.0 * t)); });
    const auto fa = fejer_approximation(f, n, SpectrumSet::from_points({5.0}));
    REQUIRE(fa.poly.terms().size() == 1);
    CHECK_THAT(fa.poly.terms()[0].lambda, WithinAbs(2.0, 1e-12));
    // Fejer weight 1 - 2/K on the line.
    CHECK_THAT(std::abs(fa.poly.terms()[0].x[0]), WithinAbs(1.0 - 2.0 / fa.order, 1e-12));
    CHECK(fa.avoids_M);
    CHECK(fa.sup_bound_ok);
}

TEST_CASE("Fejer approximation of a constant", "[harmonic][fejer]") {
    const cplx c(0.7, -0.2);
    const double n = 4.0, step = 0.01;
    const auto f = sample_fn(-n, step, 801, [&](double) { return scalar(c); });
    const auto fa = fejer_approximation(f, n, SpectrumSet::from_points({1.0}));
    CHECK(fa.avoids_M);
    for (double t : {-3.0, 0.0, 2.5}) CHECK(std::abs(fa.poly(t)[0] - c) < 1e-10);
}

TEST_CASE("Fejer approximation of a square profile", "[harmonic][fejer]") {
    auto square = [](double t) { return scalar(std::sin(3.0 * t) >= 0.0 ? 1.0 : -1.0); };
    const SpectrumSet M({}, {{5.6, 6.4}});
    // n a multiple of pi/3 keeps the profile 2n-periodic.
    for (double n : {pi, 2 * pi, 3 * pi}) {
        const auto f = sample_fn(-n, 1e-3, static_cast<std::size_t>(std::llround(2 * n / 1e-3)) + 1, square);
        const auto fa = fejer_approximation(f, n, M);
        CHECK(fa.sup_norm <= f.sup_bound() + 1.0);
        CHECK(fa.sup_bound_ok);
        CHECK(fa.avoids_M);
        for (const auto& t : fa.poly.terms()) CHECK(!M.contains(t.lambda));
        // L1 error falls along the doubling sequence of orders.
        REQUIRE(fa.history.size() >= 2);
        for (std::size_t i = 1; i < fa.history.size(); ++i) CHECK(fa.history[i].second <= fa.history[i - 1].second);
    }
}

TEST_CASE("Fejer approximation rejects M next to dominant content", "[harmonic][fejer]") {
    const double n = pi, step = 2.0 * pi / 4096.0;
    const auto f = sample_fn(-n, step, 4097, [](double t) { return scalar(std::polar(1.0, 2.0 * t)); });
    CHECK_THROWS_AS(fejer_approximation(f, n, SpectrumSet::from_points({2.5})), SeparationError);
    CHECK_THROWS_AS(fejer_approximation(f, 10.0, SpectrumSet()), DomainError);
}

TEST_CASE("mean operator examples", "[harmonic][mean]") {
    const auto c = sample_fn(0.0, 0.01, 500, [](double) { return scalar(cplx(2.0, 1.0)); });
    const auto mc = mean_operator(c, 0.5);
    for (std::size_t i = 0; i < mc.size(); i += 37) CHECK(std::abs(mc[i][0] - cplx(2.0, 1.0)) < 1e-12);

    const auto e = sample_fn(0.0, 1e-3, 5001, [](double t) { return scalar(std::polar(1.0, 2.0 * t)); });
    const auto me = mean_operator(e, 1.0);
    const cplx factor = (std::polar(1.0, 2.0) - 1.0) / cplx(0.0, 2.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < me.size(); ++i) worst = std::max(worst, std::abs(me[i][0] - std::polar(1.0, 2.0 * me.t(i)) * factor));
    CHECK(worst < 1e-6);

    const auto ms = mean_operator(e, 1e-3);
    double gap = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) gap = std::max(gap, (ms[i] - e[i]).norm());
    CHECK(gap <= 2e-3);

    CHECK_THROWS_AS(mean_operator(e, 6.0), WindowTooWide);
    CHECK_THROWS_AS(mean_operator(e, 1e-4), DomainError);
}

TEST_CASE("mean of exponentials for random frequencies and windows", "[harmonic][mean][property]") {
    std::mt19937_64 rng(testsupport::default_seed + 7);
    std::uniform_real_distribution<double> lam(-10.0, 10.0), win(0.1, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double l = lam(rng), h = win(rng);
        const auto e = sample_fn(0.0, 1e-3, 4001, [&](double t) { return scalar(std::polar(1.0, l * t)); });
        const auto m = mean_operator(e, h);
        const cplx factor = (std::polar(1.0, l * h) - 1.0) / cplx(0.0, l * h);
        double worst = 0.0;
        for (std::size_t i = 0; i < m.size(); i += 7) worst = std::max(worst, std::abs(m[i][0] - std::polar(1.0, l * m.t(i)) * factor));
        CHECK(worst < 1e-6 * std::max(1.0, l * l));
    }
}

TEST_CASE("mean operator is linear and translation equivariant", "[harmonic][mean][property]") {
    std::mt19937_64 rng(testsupport::default_seed + 11);
    const double step = 0.01;
    std::vector<ComplexVector> fv, gv;
    for (int i = 0; i < 1200; ++i) {
        fv.push_back(testsupport::random_vector(rng, 2));
        gv.push_back(testsupport::random_vector(rng, 2));
    }
    const SampledFunction f(0.0, step, fv), g(0.0, step, gv);
    const cplx alpha(0.3, -1.2);
    std::vector<ComplexVector> comb;
    for (std::size_t i = 0; i < fv.size(); ++i) comb.push_back(alpha * fv[i] + gv[i]);
    const double h = 0.537;
    const auto mf = mean_operator(f, h), mg = mean_operator(g, h), mc = mean_operator(SampledFunction(0.0, step, comb), h);
    double lin = 0.0;
    for (std::size_t i = 0; i < mc.size(); ++i) lin = std::max(lin, (mc[i] - alpha * mf[i] - mg[i]).norm());
    CHECK(lin < 1e-10);

    // f_a(t) = f(t + a) with a = 3 steps: the shifted grid overlaps exactly.
    const std::size_t shift = 3;
    const auto fa = f.slice(shift, f.size() - shift);
    const auto mfa = mean_operator(fa, h);
    double tr = 0.0;
    for (std::size_t i = 0; i < mfa.size(); ++i) tr = std::max(tr, (mfa[i] - mf[i + shift]).norm());
    CHECK(tr < 1e-10);
}

TEST_CASE("ap_detector examples", "[harmonic][ap]") {
    const auto e = sample_fn(0.0, 0.01, 8001, [](double t) { return scalar(std::polar(1.0, t)); });
    const auto ev = ap_detector(e, 0.01, 10.0);
    CHECK(ev.is_ap_evidence);
    REQUIRE(!ev.almost_periods.empty());
    CHECK(std::abs(std::remainder(ev.almost_periods.front(), 2 * pi)) < 0.02);

    const auto ramp = sample_fn(0.0, 0.01, 8001, [](double t) { return scalar(t); });
    CHECK_FALSE(ap_detector(ramp, 0.01, 10.0).is_ap_evidence);

    CHECK_THROWS_AS(ap_detector(e, 0.01, 20.0), DomainError);
}

TEST_CASE("ap_detector is translation invariant", "[harmonic][ap][property]") {
    auto f = [](double t) { return scalar(std::polar(1.0, t) + 0.5 * std::polar(1.0, 3.0 * t)); };
    const auto base = sample_fn(0.0, 0.01, 8001, f);
    const bool flag = ap_detector(base, 0.02, 10.0).is_ap_evidence;
    for (double a : {1.0, 5.0}) {
        const auto shifted = sample_fn(a, 0.01, 8001, f);
        CHECK(ap_detector(shifted, 0.02, 10.0).is_ap_evidence == flag);
    }
}

TEST_CASE("two-tone almost periods", "[harmonic][ap]") {
    // e^{it} + e^{i sqrt2 t} has eps = 0.05 almost periods, but successive ones
    // sit up to ~440 apart on (0, 800], so window 200 is too short while 500 is ample.
    const auto p = two_tone();
    const auto narrow = ap_detector(p.sample(0.0, 0.01, 160001), 0.05, 200.0);
    CHECK_FALSE(narrow.is_ap_evidence);
    CHECK(narrow.period_density * 200.0 > 430.0);
    CHECK(narrow.period_density * 200.0 < 450.0);
    const auto wide = ap_detector(p.sample(0.0, 0.02, 200001), 0.05, 500.0);
    CHECK(wide.is_ap_evidence);
}
