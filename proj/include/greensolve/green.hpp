#pragma once

// The Green function G(t) = (1/2pi) int H(s) e^{its} ds of a cutoff resolvent,
// evaluated in the integrated-by-parts form
//   G(t) = (1/2pi) (i/t)^k int H^{(k)}(s) e^{its} ds,  k = 1 for |t| < 1, else 2,
// with H', H'' fitted once on adaptive Legendre panels over [-S, S] and the
// pure-resolvent tails beyond +-S handled by two more integrations by parts.

#include "greensolve/cutoff.hpp"
#include "greensolve/errors.hpp"
#include "greensolve/parallel.hpp"
#include "greensolve/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace greensolve::green {

using linalg::ComplexMatrix;
using linalg::cplx;

inline constexpr double near_zero_cut = 1e-6;
inline constexpr double truncation_target = 1e-8;
inline constexpr double near_zero_budget = 1e-5;

namespace detail {

/// Matrices travel through the quadrature as flat entry vectors: n entries
/// for diagonal storage, n*n row-major otherwise.
struct Layout {
    std::size_t n = 0;
    bool diagonal = false;
    std::size_t width() const { return diagonal ? n : n * n; }

    void write(const ComplexMatrix& m, std::span<cplx> out) const {
        if (diagonal) {
            for (std::size_t i = 0; i < n; ++i) out[i] = m(i, i);
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) out[i * n + j] = m(i, j);
        }
    }
    ComplexMatrix read(std::span<const cplx> in) const {
        if (diagonal) return ComplexMatrix::diagonal(std::vector<cplx>(in.begin(), in.begin() + static_cast<long>(n)));
        return ComplexMatrix(n, n, std::vector<cplx>(in.begin(), in.begin() + static_cast<long>(n * n)));
    }
    double norm(std::span<const cplx> in) const {
        if (diagonal) {
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(in[i]));
            return m;
        }
        return linalg::operator_norm(read(in));
    }
};

inline double max_abs(std::span<const cplx> v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Refines every panel in parallel and concatenates the pieces in order.
inline quad::PanelSeries refine_all(const quad::Sampler& f, const std::vector<quad::Panel>& panels, std::size_t width,
                                    std::span<const quad::Block> blocks, const quad::RefineOptions& opt = {}) {
    std::vector<quad::PanelSeries> parts(panels.size());
    parallel_for(panels.size(), [&](std::size_t i) { parts[i] = quad::refine_panel(f, panels[i], width, blocks, opt); });
    quad::PanelSeries out(width);
    for (const auto& p : parts) out.append(p);
    return out;
}

} // namespace detail

/// Frequency-side data from which G can be evaluated at any t != 0.
class GreenKernel {
public:
    explicit GreenKernel(const cutoff::CutoffResolvent& c) : cutoff_(c) {
        const auto& g = c.generator();
        layout_ = {g.dimension(), g.matrix().is_diagonal()};
        choose_cutoff_frequency();
        build_table();
        for (int side = 0; side < 2; ++side) {
            const double s = side == 0 ? S_ : -S_;
            const auto j = gen::resolvent_jet(g, s, 3);
            tail_[side] = {j.r1, j.r2, j.r3};
        }
    }

    const cutoff::CutoffResolvent& cutoff() const noexcept { return cutoff_; }
    /// Frequency truncation point S.
    double S() const noexcept { return S_; }
    /// Certified bound on the discarded integrand mass beyond +-S (before the
    /// analytic tail correction is added).
    double truncation_bound() const noexcept { return truncation_bound_; }
    /// (1/2pi) int ||H''||, so that ||G(t)|| <= c2 / t^2.
    double c2() const noexcept { return c2_; }
    double h1_l1() const noexcept { return h1_l1_; }
    double h2_l1() const noexcept { return h2_l1_; }
    std::size_t panel_count() const noexcept { return table_.panel_count(); }
    const detail::Layout& layout() const noexcept { return layout_; }

    /// Flat entries of G(t).
    void evaluate(double t, std::span<cplx> out) const {
        if (!(std::abs(t) >= near_zero_cut)) throw NearZero("G is not evaluated within 1e-6 of the origin");
        const int k = std::abs(t) >= 1.0 ? 2 : 1;
        const std::size_t w = layout_.width();
        std::vector<cplx> acc(w, cplx{});
        table_.fourier(t, (k - 1) * w, w, acc);
        // int_S^inf f e^{its} ~ -e^{itS}/(it) [f(S) - f'(S)/(it)], mirrored at -S.
        const cplx it(0.0, t);
        std::vector<cplx> f0(w), f1(w);
        for (int side = 0; side < 2; ++side) {
            const double s = side == 0 ? S_ : -S_;
            layout_.write(tail_[side][k - 1], f0);
            layout_.write(tail_[side][k], f1);
            const cplx pre = (side == 0 ? -1.0 : 1.0) * std::polar(1.0, t * s) / it;
            for (std::size_t e = 0; e < w; ++e) acc[e] += pre * (f0[e] - f1[e] / it);
        }
        const cplx factor = (k == 1 ? cplx(0.0, 1.0 / t) : cplx(-1.0 / (t * t), 0.0)) / (2.0 * std::numbers::pi);
        for (std::size_t e = 0; e < w; ++e) out[e] = factor * acc[e];
    }

    ComplexMatrix operator()(double t) const {
        std::vector<cplx> v(layout_.width());
        evaluate(t, v);
        return layout_.read(v);
    }

private:
    void choose_cutoff_frequency() {
        const auto& g = cutoff_.generator();
        const double b = cutoff_.b();
        const double eta = g.eta(), delta = g.delta();
        auto bound = [&](double S) {
            double worst = 0.0;
            for (int k = 1; k <= 2; ++k) {
                const double p = (k + 1) * delta - 1.0;
                worst = std::max(worst, 2.0 * gen::derivative_bound(eta, delta, S, k) * S / p);
            }
            return worst;
        };
        levels_ = 1;
        S_ = 2.0 * b;
        while (bound(S_) >= truncation_target && levels_ < 40) {
            S_ *= 2.0;
            ++levels_;
        }
        truncation_bound_ = bound(S_);
    }

    void build_table() {
        const auto& g = cutoff_.generator();
        const double b = cutoff_.b();
        const std::size_t w = layout_.width();

        std::vector<double> pts{0.0};
        for (double x = -b; x <= b + 1e-12; x += 0.25) pts.push_back(x);
        for (int j = 0; j <= levels_; ++j) {
            pts.push_back(b * std::ldexp(1.0, j));
            pts.push_back(-b * std::ldexp(1.0, j));
        }
        for (double v : cutoff_.bump().breakpoints()) pts.push_back(v);
        for (double k : g.K()) pts.push_back(k);
        for (const auto& l : g.spectrum())
            if (std::abs(l.imag()) < S_) pts.push_back(l.imag());
        std::erase_if(pts, [&](double v) { return std::abs(v) > S_; });
        const auto panels = quad::panels_from_breakpoints(pts);

        quad::Sampler f = [&](double s, std::span<cplx> out) {
            const auto j = cutoff_.jet(s, 2);
            layout_.write(j[1], out.subspan(0, w));
            layout_.write(j[2], out.subspan(w, w));
        };
        // Global scale per block from the panel endpoints and midpoints.
        double scale1 = 0.0, scale2 = 0.0;
        std::vector<cplx> tmp(2 * w);
        for (const auto& p : panels)
            for (double s : {p.lo, p.center(), p.hi}) {
                if (g.distance_to_K(s) < gen::hit_tolerance && cutoff_.bump()(s) != 1.0) continue;
                f(s, tmp);
                scale1 = std::max(scale1, detail::max_abs(std::span<const cplx>(tmp).subspan(0, w)));
                scale2 = std::max(scale2, detail::max_abs(std::span<const cplx>(tmp).subspan(w, w)));
            }
        const quad::Block blocks[2] = {{0, w, 1e-13 * scale1}, {w, w, 1e-13 * scale2}};
        table_ = detail::refine_all(f, panels, 2 * w, blocks);

        h1_l1_ = table_.integrate([&](std::span<const cplx> v) { return layout_.norm(v.subspan(0, w)); });
        h2_l1_ = table_.integrate([&](std::span<const cplx> v) { return layout_.norm(v.subspan(w, w)); });
        const double p2 = 3.0 * g.delta() - 1.0;
        const double tail2 = 2.0 * gen::derivative_bound(g.eta(), g.delta(), S_, 2) * S_ / p2;
        c2_ = (h2_l1_ + tail2) / (2.0 * std::numbers::pi);
    }

    cutoff::CutoffResolvent cutoff_;
    detail::Layout layout_;
    quad::PanelSeries table_;
    std::array<std::array<ComplexMatrix, 3>, 2> tail_;
    double S_ = 0.0;
    int levels_ = 0;
    double truncation_bound_ = 0.0;
    double c2_ = 0.0;
    double h1_l1_ = 0.0;
    double h2_l1_ = 0.0;
};

/// G(t) for a single t; build a GreenKernel when evaluating many points.
inline ComplexMatrix green_at(const cutoff::CutoffResolvent& c, double t) {
    if (!(std::abs(t) >= near_zero_cut)) throw NearZero("G is not evaluated within 1e-6 of the origin");
    return GreenKernel(c)(t);
}

/// G sampled on a graded grid of Gauss panels over 1e-6 <= |t| <= t_max.
class GreenFunction {
public:
    const cutoff::CutoffResolvent& cutoff() const noexcept { return kernel_->cutoff(); }
    const GreenKernel& kernel() const noexcept { return *kernel_; }
    std::shared_ptr<const GreenKernel> kernel_ptr() const noexcept { return kernel_; }
    double t_max() const noexcept { return t_max_; }
    int n_near() const noexcept { return n_near_; }
    std::size_t dimension() const noexcept { return kernel_->layout().n; }
    const detail::Layout& layout() const noexcept { return kernel_->layout(); }

    /// Panels over the negative and positive half-lines in increasing order.
    const quad::PanelSeries& series() const noexcept { return series_; }
    std::size_t node_count() const noexcept { return series_.panel_count() * quad::panel_order; }

    /// Sample nodes t_j with quadrature weights.
    std::vector<double> nodes() const {
        std::vector<double> t;
        const auto& g = quad::gauss_rule();
        for (const auto& p : series_.panels())
            for (std::size_t i = 0; i < quad::panel_order; ++i) t.push_back(p.center() + p.half() * g.x[i]);
        return t;
    }
    std::vector<double> weights() const {
        std::vector<double> w;
        const auto& g = quad::gauss_rule();
        for (const auto& p : series_.panels())
            for (std::size_t i = 0; i < quad::panel_order; ++i) w.push_back(p.half() * g.w[i]);
        return w;
    }
    /// Flat entries of G at node j.
    std::span<const cplx> sample(std::size_t j) const {
        const std::size_t w = layout().width();
        return series_.node_values(j / quad::panel_order).subspan((j % quad::panel_order) * w, w);
    }
    ComplexMatrix sample_matrix(std::size_t j) const { return layout().read(sample(j)); }

    /// Interpolated G(t) for 1e-6 <= |t| <= t_max, the kernel beyond.
    ComplexMatrix at(double t) const {
        std::vector<cplx> v(layout().width());
        if (std::abs(t) > t_max_ || !series_.evaluate(t, v)) kernel_->evaluate(t, v);
        return layout().read(v);
    }

    double l1_norm() const noexcept { return l1_norm_; }
    double quadrature_mass() const noexcept { return quadrature_mass_; }
    double near_zero_mass() const noexcept { return near_zero_mass_; }
    double tail_mass() const noexcept { return 2.0 * c2() / t_max_; }
    double c2() const noexcept { return kernel_->c2(); }
    /// Near-zero model ||G(t)|| ~ c0 |t|^{delta - 1}, per side (negative, positive).
    std::array<double, 2> near_zero_c0() const noexcept { return c0_; }
    /// G at the innermost nodes, standing in for G(0-) and G(0+).
    const std::array<ComplexMatrix, 2>& near_zero_values() const noexcept { return g0_; }

private:
    friend GreenFunction build_green(const cutoff::CutoffResolvent&, double, int);
    friend GreenFunction build_green(std::shared_ptr<const GreenKernel>, double, int);

    std::shared_ptr<const GreenKernel> kernel_;
    double t_max_ = 0.0;
    int n_near_ = 0;
    quad::PanelSeries series_;
    double l1_norm_ = 0.0;
    double quadrature_mass_ = 0.0;
    double near_zero_mass_ = 0.0;
    std::array<double, 2> c0_{};
    std::array<ComplexMatrix, 2> g0_;
};

inline GreenFunction build_green(std::shared_ptr<const GreenKernel> kernel, double t_max, int n_near) {
    if (!(t_max >= 10.0) || !std::isfinite(t_max)) throw DomainError("build_green: t_max must be at least 10");
    if (n_near < 32) throw DomainError("build_green: n_near must be at least 32");
    GreenFunction gf;
    gf.kernel_ = std::move(kernel);
    gf.t_max_ = t_max;
    gf.n_near_ = n_near;
    const auto& layout = gf.kernel_->layout();
    const std::size_t w = layout.width();
    const double delta = gf.kernel_->cutoff().generator().delta();

    // Dyadic levels t_max 2^-j down to the cut, each split into n_near/32 pieces.
    std::vector<double> pts{near_zero_cut, 1.0};
    const int per_level = std::max(1, n_near / 32);
    for (double hi = t_max; hi > near_zero_cut; hi *= 0.5) {
        const double lo = std::max(hi * 0.5, near_zero_cut);
        for (int q = 0; q <= per_level; ++q) pts.push_back(lo + (hi - lo) * q / per_level);
    }
    std::erase_if(pts, [&](double v) { return v > t_max; });
    const auto positive = quad::panels_from_breakpoints(pts);
    std::vector<quad::Panel> panels;
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) panels.push_back({-it->hi, -it->lo});
    panels.insert(panels.end(), positive.begin(), positive.end());

    quad::Sampler f = [&](double t, std::span<cplx> out) { gf.kernel_->evaluate(t, out); };
    double scale = 0.0;
    {
        std::vector<cplx> tmp(w);
        for (const auto& p : panels)
            for (double t : {p.center(), p.lo == 0 ? p.hi : p.lo}) {
                f(t, tmp);
                scale = std::max(scale, detail::max_abs(tmp));
            }
    }
    const quad::Block block{0, w, 1e-9 * std::max(scale, 1e-300)};
    quad::RefineOptions opt;
    opt.rel_tol = 1e-10;
    gf.series_ = detail::refine_all(f, panels, w, std::span<const quad::Block>(&block, 1), opt);

    gf.quadrature_mass_ = gf.series_.integrate([&](std::span<const cplx> v) { return layout.norm(v); });

    // Near-zero model from the smallest decade on each side.
    const auto nodes = gf.nodes();
    std::array<double, 2> innermost{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    std::array<std::size_t, 2> inner_index{0, 0};
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double at = std::abs(nodes[j]);
        const int side = nodes[j] > 0 ? 1 : 0;
        if (at <= 10.0 * near_zero_cut)
            gf.c0_[side] = std::max(gf.c0_[side], layout.norm(gf.sample(j)) * std::pow(at, 1.0 - delta));
        if (at < innermost[side]) innermost[side] = at, inner_index[side] = j;
    }
    for (int side = 0; side < 2; ++side) gf.g0_[side] = gf.sample_matrix(inner_index[side]);
    gf.near_zero_mass_ = (gf.c0_[0] + gf.c0_[1]) * std::pow(near_zero_cut, delta) / delta;
    if (!(gf.near_zero_mass_ < near_zero_budget))
        throw GridError("build_green: modelled mass inside |t| < 1e-6 exceeds 1e-5");

    gf.l1_norm_ = gf.quadrature_mass_ + gf.near_zero_mass_ + gf.tail_mass();
    return gf;
}

inline GreenFunction build_green(const cutoff::CutoffResolvent& c, double t_max, int n_near) {
    return build_green(std::make_shared<const GreenKernel>(c), t_max, n_near);
}

/// G^(s) = int G(t) e^{-ist} dt from the sampled grid and the near-zero model.
inline ComplexMatrix fourier_transform(const GreenFunction& gf, double s) {
    const std::size_t w = gf.layout().width();
    std::vector<cplx> acc(w, cplx{});
    gf.series().fourier(-s, 0, w, acc);
    for (int side = 0; side < 2; ++side) {
        std::vector<cplx> g0(w);
        gf.layout().write(gf.near_zero_values()[side], g0);
        for (std::size_t e = 0; e < w; ++e) acc[e] += near_zero_cut * g0[e];
    }
    return gf.layout().read(acc);
}

/// max over probes of ||G^(s) - H(s)||.
inline double verify_transform(const GreenFunction& gf, const std::vector<double>& probes) {
    std::vector<double> err(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) {
        err[i] = linalg::operator_norm(fourier_transform(gf, probes[i]) - gf.cutoff().value(probes[i]));
    });
    double worst = 0.0;
    for (double e : err) worst = std::max(worst, e);
    return worst;
}

/// 16 log-spaced probes in [0.05, 50], both signs alternating, plus 0.
inline std::vector<double> default_transform_probes() {
    std::vector<double> probes;
    for (int i = 0; i < 16; ++i) {
        const double s = 0.05 * std::pow(1000.0, i / 15.0);
        probes.push_back(i % 2 == 0 ? s : -s);
    }
    return probes;
}

struct ProofBounds {
    double v1 = 0.0;
    double v2 = 0.0;
    double v3 = 0.0;
    double sum() const { return v1 + v2 + v3; }
};

inline ProofBounds l1_proof_bounds(double eta, double delta, double b, double t) {
    if (!(delta > 0.5) || !(delta < 1.0)) throw DomainError("l1_proof_bounds: delta must lie in (1/2, 1)");
    if (!(t > 0.0 && t <= 1.0)) throw DomainError("l1_proof_bounds: t must lie in (0, 1]");
    ProofBounds v;
    v.v1 = eta * std::pow(b, 1.0 - delta) / (1.0 - delta) * std::pow(t, delta - 1.0);
    v.v2 = eta * std::pow(b, -delta) * std::pow(t, delta - 1.0);
    v.v3 = eta * eta * std::pow(t, 2.0 * delta - 2.0) * std::pow(b, 1.0 - 2.0 * delta) / (2.0 * delta - 1.0);
    return v;
}

inline ProofBounds l1_proof_bounds(const cutoff::CutoffResolvent& c, double t) {
    const auto& g = c.generator();
    return l1_proof_bounds(g.eta(), g.delta(), c.b(), t);
}

/// ||int_b^T R(s) e^{its} ds|| with T = 1e3 b, by adaptive Filon panels.
inline double b_plus_norm(const cutoff::CutoffResolvent& c, double t) {
    const auto& g = c.generator();
    const detail::Layout layout{g.dimension(), g.matrix().is_diagonal()};
    const std::size_t w = layout.width();
    const double b = c.b(), T = 1e3 * b;
    std::vector<double> pts;
    for (double x = b; x < T; x *= 2.0) pts.push_back(x);
    pts.push_back(T);
    for (const auto& l : g.spectrum())
        if (l.imag() > b && l.imag() < T) pts.push_back(l.imag());
    quad::Sampler f = [&](double s, std::span<cplx> out) { layout.write(gen::resolvent(g, s), out); };
    double scale = 0.0;
    {
        std::vector<cplx> tmp(w);
        for (double s : pts) {
            f(s, tmp);
            scale = std::max(scale, detail::max_abs(tmp));
        }
    }
    const quad::Block block{0, w, 1e-13 * scale};
    const auto series = detail::refine_all(f, quad::panels_from_breakpoints(pts), w, std::span<const quad::Block>(&block, 1));
    std::vector<cplx> acc(w, cplx{});
    series.fourier(t, 0, w, acc);
    return layout.norm(acc);
}

} // namespace greensolve::green
