#pragma once

// Bounded solutions of u' = Au + phi on the line: the exact trig solution,
// the convolution u = G * phi, mild-solution residuals and the end-to-end
// pipelines, plus the spike input whose solution is bounded but not
// uniformly continuous.

#include "greensolve/cutoff.hpp"
#include "greensolve/errors.hpp"
#include "greensolve/generator.hpp"
#include "greensolve/green.hpp"
#include "greensolve/harmonic.hpp"
#include "greensolve/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

namespace greensolve::solver {

using harmonic::SampledFunction;
using harmonic::TrigPolynomial;
using linalg::ComplexMatrix;
using linalg::ComplexVector;
using linalg::cplx;

inline constexpr double resonance_tolerance = 1e-6;
inline constexpr double pipeline_gap = 1e-3;

inline double distance_to_spectrum(const gen::GeneratorSpec& g, double lambda) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& mu : g.spectrum()) d = std::min(d, std::abs(cplx(0.0, lambda) - mu));
    return d;
}

/// sum_j e^{i lambda_j t} R(i lambda_j, A) x_j.
inline TrigPolynomial solve_trig(const gen::GeneratorSpec& g, const TrigPolynomial& p) {
    if (p.dimension() != g.dimension() && !p.empty()) throw DimensionMismatch("solve_trig: input dimension differs from A");
    for (const auto& t : p.terms())
        if (distance_to_spectrum(g, t.lambda) < resonance_tolerance)
            throw ResonanceError("solve_trig: frequency " + std::to_string(t.lambda) + " resonates with the spectrum of A");
    return harmonic::convolve_trig([&](double lambda) { return gen::resolvent(g, lambda); }, p);
}

struct Convolution {
    SampledFunction solution;
    double truncation_bound = 0.0; ///< sup|phi| * 2 c2 / t_max
    double kernel_reach = 0.0;     ///< |t| beyond which G was dropped as negligible
};

namespace detail {

/// Smallest reach past which every sampled ||G|| stays below tol * max.
inline double kernel_reach(const green::GreenFunction& gf, double tol) {
    double biggest = 0.0;
    std::vector<double> norms(gf.node_count());
    for (std::size_t j = 0; j < norms.size(); ++j) {
        norms[j] = gf.layout().norm(gf.sample(j));
        biggest = std::max(biggest, norms[j]);
    }
    const auto nodes = gf.nodes();
    double reach = 0.0;
    for (std::size_t j = 0; j < norms.size(); ++j)
        if (norms[j] > tol * biggest) reach = std::max(reach, std::abs(nodes[j]));
    // Round out to the end of the panel holding the last significant node.
    for (const auto& p : gf.series().panels())
        if (std::abs(p.lo) <= reach || std::abs(p.hi) <= reach) reach = std::max({reach, std::abs(p.lo), std::abs(p.hi)});
    return std::min(reach, gf.t_max());
}

/// Linear convolution of two sequences by FFT (zero padded).
inline std::vector<cplx> fft_convolve(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::size_t len = 1;
    while (len < a.size() + b.size()) len <<= 1;
    std::vector<cplx> fa(len), fb(len);
    std::copy(a.begin(), a.end(), fa.begin());
    std::copy(b.begin(), b.end(), fb.begin());
    harmonic::detail::dft(fa, true);
    harmonic::detail::dft(fb, true);
    for (std::size_t i = 0; i < len; ++i) fa[i] *= fb[i] / static_cast<double>(len);
    harmonic::detail::dft(fa, false);
    fa.resize(a.size() + b.size() - 1);
    return fa;
}

} // namespace detail

/// u = G * phi on the part of phi's grid lying t_max inside both ends. The
/// integral over each half-line uses the fourth-order end-corrected trapezoid
/// weights (3/8, 7/6, 23/24, 1, ...) so the jump of G at 0 costs nothing.
inline Convolution convolve_green(const green::GreenFunction& gf, const SampledFunction& phi) {
    if (phi.dimension() != gf.dimension()) throw DimensionMismatch("convolve_green: phi dimension differs from G");
    const double h = phi.step();
    const std::size_t margin = static_cast<std::size_t>(std::ceil(gf.t_max() / h - 1e-9));
    if (phi.size() <= 2 * margin) throw InsufficientSpan("convolve_green: phi must extend t_max beyond the output window");

    const double reach = detail::kernel_reach(gf, 1e-14);
    const std::size_t L = std::max<std::size_t>(3, std::min(margin, static_cast<std::size_t>(std::ceil(reach / h))));
    const auto& layout = gf.layout();
    const std::size_t n = gf.dimension(), w = layout.width();

    // Kernel samples k_j = weight_j G(j h) for j in [-L, L], stored at index j + L.
    std::vector<std::vector<cplx>> kernel(2 * L + 1, std::vector<cplx>(w));
    parallel_for(2 * L + 1, [&](std::size_t idx) {
        const long j = static_cast<long>(idx) - static_cast<long>(L);
        const std::size_t aj = static_cast<std::size_t>(std::abs(j));
        if (j == 0) return;
        double weight = 1.0;
        if (aj == 1) weight = 7.0 / 6.0;
        if (aj == 2) weight = 23.0 / 24.0;
        if (aj == L) weight = 0.5;
        layout.write(gf.at(static_cast<double>(j) * h), kernel[idx]);
        for (auto& v : kernel[idx]) v *= weight * h;
    });
    {
        std::vector<cplx> lo(w), hi(w);
        layout.write(gf.near_zero_values()[0], lo);
        layout.write(gf.near_zero_values()[1], hi);
        for (std::size_t e = 0; e < w; ++e) kernel[L][e] = 3.0 / 8.0 * h * (lo[e] + hi[e]);
    }

    const std::size_t out_n = phi.size() - 2 * margin;
    std::vector<ComplexVector> out(out_n, ComplexVector(n));
    // Column b of phi against kernel entry (a, b) accumulates into output a.
    std::vector<std::vector<cplx>> phi_cols(n, std::vector<cplx>(phi.size()));
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < phi.size(); ++i) phi_cols[b][i] = phi[i][b];
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (layout.diagonal) {
        for (std::size_t a = 0; a < n; ++a) pairs.push_back({a, a});
    } else {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) pairs.push_back({a, b});
    }
    std::vector<std::vector<cplx>> partial(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        const auto [a, b] = pairs[p];
        const std::size_t e = layout.diagonal ? a : a * n + b;
        std::vector<cplx> k(2 * L + 1);
        for (std::size_t idx = 0; idx < k.size(); ++idx) k[idx] = kernel[idx][e];
        partial[p] = detail::fft_convolve(phi_cols[b], k);
    });
    // (phi * k)[i + L] = sum_j k_j phi_{i - j}; output i sits at phi index margin + i.
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const std::size_t a = pairs[p].first;
        for (std::size_t i = 0; i < out_n; ++i) out[i][a] += partial[p][margin + i + L];
    }

    Convolution res;
    const double bound = gf.l1_norm() * phi.sup_bound();
    double actual = 0.0;
    for (const auto& v : out) actual = std::max(actual, v.norm());
    res.solution = SampledFunction(phi.t(margin), h, std::move(out), std::max(bound, actual));
    res.truncation_bound = phi.sup_bound() * gf.tail_mass();
    res.kernel_reach = static_cast<double>(L) * h;
    return res;
}

namespace detail {

/// Fourth-order cumulative integrals I_k = int_{t_0}^{t_k} f along a uniform
/// grid (interior steps use -1, 13, 13, -1 over 24; the end steps use the
/// one-sided 5, 8, -1 over 12 rule).
inline std::vector<ComplexVector> cumulative_integral(const std::vector<ComplexVector>& f, double h) {
    const std::size_t n = f.size();
    const std::size_t dim = n ? f[0].size() : 0;
    std::vector<ComplexVector> I(n, ComplexVector(dim));
    for (std::size_t k = 0; k + 1 < n; ++k) {
        for (std::size_t d = 0; d < dim; ++d) {
            cplx inc;
            if (n < 3) {
                inc = 0.5 * h * (f[k][d] + f[k + 1][d]);
            } else if (k == 0) {
                inc = h / 12.0 * (5.0 * f[0][d] + 8.0 * f[1][d] - f[2][d]);
            } else if (k + 2 >= n) {
                inc = h / 12.0 * (-f[k - 1][d] + 8.0 * f[k][d] + 5.0 * f[k + 1][d]);
            } else {
                inc = h / 24.0 * (-f[k - 1][d] + 13.0 * f[k][d] + 13.0 * f[k + 1][d] - f[k + 2][d]);
            }
            I[k + 1][d] = I[k][d] + inc;
        }
    }
    return I;
}

inline void require_common_grid(const SampledFunction& u, const SampledFunction& phi) {
    if (u.dimension() != phi.dimension()) throw DimensionMismatch("u and phi differ in dimension");
    if (std::abs(u.step() - phi.step()) > 1e-12 * u.step()) throw DomainError("u and phi must share a grid step");
    if (!phi.grid_index(u.t0()) || !phi.grid_index(u.t_end())) throw DomainError("phi must cover u's grid");
}

} // namespace detail

/// max over probes (t0, t) of ||u(t) - T(t - t0) u(t0) - int_{t0}^t T(t - s) phi(s) ds|| / (1 + ||u||).
inline double mild_residual_voc(const gen::GeneratorSpec& g, const SampledFunction& u, const SampledFunction& phi,
                                const std::vector<std::pair<double, double>>& probes) {
    if (!g.is_matrix()) throw OracleUnavailable("mild_residual_voc needs the semigroup of a matrix generator");
    detail::require_common_grid(u, phi);
    const double h = u.step();
    const ComplexMatrix E = linalg::matrix_exponential(g.matrix(), h);
    double worst = 0.0;
    for (const auto& [a, b] : probes) {
        const auto ia = u.grid_index(a), ib = u.grid_index(b);
        if (!ia || !ib || *ib < *ia) throw DomainError("mild_residual_voc: probe outside u's grid or reversed");
        if (b - a > 10.0 + 1e-9) throw DomainError("mild_residual_voc: probe length exceeds 10");
        const std::size_t K = *ib - *ia;
        // g_k = T(k h) phi(t - k h), k = 0..K, integrated over s = t - k h.
        std::vector<ComplexVector> gk(K + 1);
        const std::size_t ib_phi = *phi.grid_index(b);
        ComplexMatrix power = ComplexMatrix::identity(g.dimension());
        for (std::size_t k = 0; k <= K; ++k) {
            gk[k] = power * phi[ib_phi - k];
            if (k < K) power = E * power;
        }
        const auto I = detail::cumulative_integral(gk, h);
        ComplexVector r = u[*ib] - power * u[*ia] - I[K];
        worst = std::max(worst, r.norm());
    }
    return worst / (1.0 + u.max_norm());
}

/// Probe pairs (t, t + length) spread across u's grid.
inline std::vector<std::pair<double, double>> default_voc_probes(const SampledFunction& u, double length = 5.0, int count = 8) {
    std::vector<std::pair<double, double>> probes;
    const std::size_t steps = static_cast<std::size_t>(std::floor(std::min(length, u.span()) / u.step()));
    if (steps == 0 || u.size() <= steps) return probes;
    const std::size_t room = u.size() - 1 - steps;
    for (int i = 0; i < count; ++i) {
        const std::size_t s = room * static_cast<std::size_t>(i) / static_cast<std::size_t>(std::max(1, count - 1));
        probes.push_back({u.t(s), u.t(s + steps)});
    }
    return probes;
}

/// max over grid t of ||u(t) - u(0) - A int_0^t u - int_0^t phi|| / (1 + ||u||).
inline double mild_residual_integral(const gen::GeneratorSpec& g, const SampledFunction& u, const SampledFunction& phi) {
    detail::require_common_grid(u, phi);
    const auto zero = u.grid_index(0.0);
    if (!zero) throw DomainError("mild_residual_integral: the grid must contain t = 0");
    const std::size_t z = *zero;
    const std::size_t p0 = *phi.grid_index(u.t0());
    const double h = u.step();
    const auto& A = g.matrix();
    double worst = 0.0;
    for (int dir : {1, -1}) {
        std::vector<ComplexVector> us, ps;
        for (std::size_t i = z;; i += static_cast<std::size_t>(dir)) {
            us.push_back(u[i]);
            ps.push_back(phi[p0 + i]);
            if ((dir > 0 && i + 1 >= u.size()) || (dir < 0 && i == 0)) break;
        }
        const double sh = dir * h;
        const auto Iu = detail::cumulative_integral(us, sh);
        const auto Ip = detail::cumulative_integral(ps, sh);
        for (std::size_t k = 0; k < us.size(); ++k) {
            ComplexVector r = us[k] - us[0] - A * Iu[k] - Ip[k];
            worst = std::max(worst, r.norm());
        }
    }
    return worst / (1.0 + u.max_norm());
}

/// max ||(M_h u)' - A M_h u - M_h phi|| with centred differences.
inline double mean_regularization_check(const gen::GeneratorSpec& g, const SampledFunction& u, const SampledFunction& phi, double h) {
    detail::require_common_grid(u, phi);
    if (h < 4.0 * u.step() * (1.0 - 1e-12)) throw DomainError("mean_regularization_check: h must be at least 4 steps");
    const std::size_t p0 = *phi.grid_index(u.t0());
    const auto v = harmonic::mean_operator(u, h);
    const auto w = harmonic::mean_operator(phi.slice(p0, u.size()), h);
    const auto& A = g.matrix();
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        ComplexVector d = (1.0 / (2.0 * v.step())) * (v[i + 1] - v[i - 1]);
        ComplexVector r = d - A * v[i] - w[i];
        worst = std::max(worst, r.norm());
    }
    return worst;
}

/// sup ||u(t + h) - u(t)|| over the grid, h rounded to whole steps.
inline double modulus_of_continuity(const SampledFunction& u, double h) {
    const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(h / u.step())));
    double worst = 0.0;
    for (std::size_t i = 0; i + m < u.size(); ++i) worst = std::max(worst, (u[i + m] - u[i]).norm());
    return worst;
}

struct PipelineOptions {
    double t_max = 64.0;
    int n_near = 32;
    double step = 0.01;               ///< grid step for trig inputs; samples bring their own
    double half_window = 20.0;       ///< output window [-half_window, half_window]
    double spectrum_threshold = 0.05;
    bool cross_check = true;          ///< trig inputs: also convolve samples with G
};

struct MildSolutionReport {
    SampledFunction solution;
    std::optional<TrigPolynomial> trig_solution;
    double residual_variation_of_constants = std::numeric_limits<double>::quiet_NaN();
    double residual_integral_form = 0.0;
    double sup_norm = 0.0;
    std::vector<std::pair<double, double>> modulus_of_continuity;
    bool spectrum_check = false;
    SpectrumSet input_spectrum;
    SpectrumSet solution_spectrum;
    // Green function summary.
    bool green_built = false;
    std::shared_ptr<const green::GreenFunction> green;
    double l1_norm = 0.0;
    double c2 = 0.0;
    double truncation_bound = 0.0;
    double convolution_vs_trig = std::numeric_limits<double>::quiet_NaN();
    double young_bound = 0.0;
    std::vector<double> K;
    double a = 0.0;
    double delta = 0.0;
    double eta = 0.0;
    double margin = 0.0;
    std::vector<Interval> M;
};

using Input = std::variant<TrigPolynomial, SampledFunction>;

namespace detail {

inline void check_input_spectrum(const gen::GeneratorSpec& g, const SpectrumSet& sp, const SpectrumSet& F, double tol) {
    for (double k : g.K())
        if (sp.distance(k) <= pipeline_gap)
            throw NonResonanceViolation("input spectrum meets the imaginary-axis spectrum of A near " + std::to_string(k));
    for (double p : sp.points())
        if (!F.contains(p, tol)) throw SpectrumNotInF("input frequency " + std::to_string(p) + " lies outside F");
    for (const auto& iv : sp.intervals())
        if (!F.includes(SpectrumSet({}, {iv}), tol)) throw SpectrumNotInF("input spectrum leaves F");
}

inline void finish_report(const gen::GeneratorSpec& g, const SampledFunction& phi_grid, MildSolutionReport& r) {
    const auto& u = r.solution;
    r.sup_norm = std::max(u.max_norm(), 0.0);
    const std::size_t first = *phi_grid.grid_index(u.t0());
    const auto phi = phi_grid.slice(first, u.size());
    if (g.is_matrix()) r.residual_variation_of_constants = mild_residual_voc(g, u, phi, default_voc_probes(u));
    if (u.grid_index(0.0)) {
        r.residual_integral_form = mild_residual_integral(g, u, phi);
    } else {
        // The equation is translation invariant: re-anchor the grid at its middle sample.
        const double shift = u.t(u.size() / 2);
        const SampledFunction us(u.t0() - shift, u.step(), u.values(), u.sup_bound());
        const SampledFunction ps(phi.t0() - shift, phi.step(), phi.values(), phi.sup_bound());
        r.residual_integral_form = mild_residual_integral(g, us, ps);
    }
    for (double h : {1e-2, 1e-1}) r.modulus_of_continuity.push_back({h, modulus_of_continuity(u, h)});
}

} // namespace detail

/// The full solve: spectra, cutoff, Green function, convolution (or the exact
/// trig solution), residuals, spectrum inclusion and continuity probes.
inline MildSolutionReport theorem52_pipeline(const gen::GeneratorSpec& g, const Input& input, const SpectrumSet& F,
                                             const PipelineOptions& opt = {}) {
    MildSolutionReport r;
    std::tie(r.K, r.a) = gen::imaginary_spectrum(g);
    r.delta = g.delta();
    r.eta = g.eta();
    if (const auto* p = std::get_if<TrigPolynomial>(&input)) {
        r.input_spectrum = harmonic::trig_spectrum(*p);
        detail::check_input_spectrum(g, r.input_spectrum, F, 0.0);
        const auto u = solve_trig(g, *p);
        const double h = opt.step;
        const std::size_t margin = static_cast<std::size_t>(std::ceil(opt.t_max / h - 1e-9));
        const std::size_t half = static_cast<std::size_t>(std::llround(opt.half_window / h));
        r.trig_solution = u;
        r.solution_spectrum = harmonic::trig_spectrum(u);
        r.spectrum_check = r.input_spectrum.includes(r.solution_spectrum) && F.includes(r.solution_spectrum);
        r.solution = u.sample(-static_cast<double>(half) * h, h, 2 * half + 1);
        const auto phi = p->sample(-static_cast<double>(half + margin) * h, h, 2 * (half + margin) + 1);
        if (opt.cross_check) {
            const auto c = cutoff::cutoff_resolvent(g, F);
            r.margin = c.bump().margin();
            r.M = c.M();
            const auto gf = std::make_shared<const green::GreenFunction>(green::build_green(c, opt.t_max, opt.n_near));
            const auto conv = convolve_green(*gf, phi);
            double diff = 0.0;
            for (std::size_t i = 0; i < conv.solution.size(); ++i)
                diff = std::max(diff, (conv.solution[i] - r.solution[i]).norm());
            r.convolution_vs_trig = diff;
            r.green_built = true;
            r.green = gf;
            r.l1_norm = gf->l1_norm();
            r.c2 = gf->c2();
            r.truncation_bound = conv.truncation_bound;
            r.young_bound = gf->l1_norm() * phi.sup_bound() + conv.truncation_bound;
        }
        detail::finish_report(g, phi, r);
        return r;
    }

    const auto& phi = std::get<SampledFunction>(input);
    if (phi.dimension() != g.dimension()) throw DimensionMismatch("phi dimension differs from A");
    r.input_spectrum = harmonic::spectrum_estimate(phi, opt.spectrum_threshold);
    const double bin = harmonic::frequency_bin(phi);
    detail::check_input_spectrum(g, r.input_spectrum, F, bin);
    const auto c = cutoff::cutoff_resolvent(g, F);
    r.margin = c.bump().margin();
    r.M = c.M();
    const auto gf = std::make_shared<const green::GreenFunction>(green::build_green(c, opt.t_max, opt.n_near));
    auto conv = convolve_green(*gf, phi);
    r.green_built = true;
    r.green = gf;
    r.l1_norm = gf->l1_norm();
    r.c2 = gf->c2();
    r.truncation_bound = conv.truncation_bound;
    r.young_bound = gf->l1_norm() * phi.sup_bound() + conv.truncation_bound;
    r.solution = std::move(conv.solution);
    if (r.solution.size() >= 1024) {
        r.solution_spectrum = harmonic::spectrum_estimate(r.solution, opt.spectrum_threshold);
        const double ubin = harmonic::frequency_bin(r.solution);
        r.spectrum_check = r.input_spectrum.includes(r.solution_spectrum, std::max(bin, ubin)) &&
                           F.includes(r.solution_spectrum, ubin);
    }
    detail::finish_report(g, phi, r);
    return r;
}

struct Theorem63Result {
    MildSolutionReport report;
    bool ap_evidence = false;
    double period_density = 0.0;
    std::vector<std::pair<double, bool>> precondition; ///< (h, passed)
};

/// Mean-class precondition on phi, the solve, then the AP scan on u.
inline Theorem63Result theorem63_pipeline(const gen::GeneratorSpec& g, const Input& input, const SpectrumSet& F,
                                          const std::vector<double>& h_list, double eps, double window,
                                          const PipelineOptions& opt = {}) {
    Theorem63Result out;
    const double span = 8.0 * window;
    const std::size_t count = static_cast<std::size_t>(std::ceil(span / opt.step)) + 1;
    if (const auto* p = std::get_if<TrigPolynomial>(&input)) {
        // M_h maps e^{i lambda t} x to e^{i lambda t} (e^{i lambda h} - 1)/(i lambda h) x,
        // so the mean stays a trig polynomial with the same exponents.
        for (double hh : h_list) {
            const auto mean = harmonic::convolve_trig(
                [&](double lambda) {
                    const cplx f = lambda == 0.0 ? cplx(1.0) : (std::polar(1.0, lambda * hh) - 1.0) / cplx(0.0, lambda * hh);
                    return f * ComplexMatrix::identity(p->dimension());
                },
                *p);
            const bool ok = harmonic::trig_spectrum(p->pruned(0.0)).includes(harmonic::trig_spectrum(mean));
            out.precondition.push_back({hh, ok});
            if (!ok) throw PreconditionEvidenceFailure("mean of phi left the trig class");
        }
        out.report = theorem52_pipeline(g, input, F, opt);
        const auto u = out.report.trig_solution->sample(0.0, opt.step, count);
        const auto ev = harmonic::ap_detector(u, eps, window);
        out.ap_evidence = ev.is_ap_evidence;
        out.period_density = ev.period_density;
        return out;
    }
    const auto& phi = std::get<SampledFunction>(input);
    for (double hh : h_list) {
        const auto mean = harmonic::mean_operator(phi, hh);
        const auto ev = harmonic::ap_detector(mean, eps, window);
        out.precondition.push_back({hh, ev.is_ap_evidence});
        if (!ev.is_ap_evidence)
            throw PreconditionEvidenceFailure("M_h phi shows no almost-period evidence for h = " + std::to_string(hh));
    }
    out.report = theorem52_pipeline(g, input, F, opt);
    const auto ev = harmonic::ap_detector(out.report.solution, eps, window);
    out.ap_evidence = ev.is_ap_evidence;
    out.period_density = ev.period_density;
    return out;
}

struct SpikeReport {
    int n_max = 0;
    double sup_norm = 0.0;
    std::vector<std::pair<int, double>> increments; ///< (n, |u(n + 1/n) - u(n)|)
    double stepanoff_norm = 0.0;
    bool stepanoff_ok = false;
};

/// u(t) = int_0^inf e^{-s} phi(t - s) ds for phi = sum_{k=2}^{n_max} k 1_[k, k + 1/k].
inline double spike_solution(int n_max, double t) {
    double u = 0.0;
    for (int k = 2; k <= n_max && k < t; ++k) {
        const double end = std::min(t, k + 1.0 / k);
        u += k * (std::exp(end - t) - std::exp(k - t));
    }
    return u;
}

inline SpikeReport counterexample_5_4(int n_max) {
    if (n_max < 2 || n_max > 200) throw DomainError("counterexample_5_4: n_max must lie in [2, 200]");
    SpikeReport r;
    r.n_max = n_max;
    for (int n = 2; n <= n_max; ++n)
        r.increments.push_back({n, std::abs(spike_solution(n_max, n + 1.0 / n) - spike_solution(n_max, n))});
    // u rises on each spike and decays between, so spike ends and a fine grid cover the sup.
    std::vector<double> probes;
    for (int k = 2; k <= n_max; ++k) probes.push_back(k + 1.0 / k);
    const double horizon = n_max + 2.0;
    const std::size_t fine = static_cast<std::size_t>(horizon * 1000.0);
    std::vector<double> sup_parts(fine + 1);
    parallel_for(fine + 1, [&](std::size_t i) { sup_parts[i] = spike_solution(n_max, horizon * static_cast<double>(i) / static_cast<double>(fine)); });
    r.sup_norm = *std::max_element(sup_parts.begin(), sup_parts.end());
    for (double t : probes) r.sup_norm = std::max(r.sup_norm, spike_solution(n_max, t));
    // Stepanoff norm: the window mass int_x^{x+1} |phi| is piecewise linear in x,
    // so its sup sits at x = spike end or spike end - 1.
    auto mass = [&](double x) {
        double m = 0.0;
        for (int k = 2; k <= n_max; ++k) {
            const double lo = std::max(x, static_cast<double>(k)), hi = std::min(x + 1.0, k + 1.0 / k);
            if (hi > lo) m += k * (hi - lo);
        }
        return m;
    };
    for (int k = 2; k <= n_max; ++k)
        for (double x : {static_cast<double>(k), k + 1.0 / k, k - 1.0, k + 1.0 / k - 1.0}) r.stepanoff_norm = std::max(r.stepanoff_norm, mass(x));
    r.stepanoff_ok = r.stepanoff_norm <= 2.0;
    return r;
}

} // namespace greensolve::solver
