#pragma once

// Panel quadrature on [-1, 1] mapped panels: Gauss-Legendre rules, Legendre
// coefficient fits, and Fourier moments of fitted panels through spherical
// Bessel functions, int_{-1}^{1} P_n(x) e^{i k x} dx = 2 i^n j_n(k).

#include "greensolve/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace greensolve::quad {

using cplx = std::complex<double>;

/// Nodes per panel.
inline constexpr std::size_t panel_order = 16;

struct GaussRule {
    std::array<double, panel_order> x{};
    std::array<double, panel_order> w{};
    /// legendre[n][i] = P_n(x_i)
    std::array<std::array<double, panel_order>, panel_order> legendre{};
};

inline const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        GaussRule r;
        constexpr std::size_t p = panel_order;
        for (std::size_t i = 0; i < p; ++i) {
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(p) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= p; ++k) {
                    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = pk;
                }
                dp = static_cast<double>(p) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            r.x[p - 1 - i] = x;
            r.w[p - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        for (std::size_t i = 0; i < p; ++i) {
            double p0 = 1.0, p1 = r.x[i];
            r.legendre[0][i] = 1.0;
            r.legendre[1][i] = p1;
            for (std::size_t k = 2; k < p; ++k) {
                const double pk = ((2.0 * k - 1.0) * r.x[i] * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
                r.legendre[k][i] = pk;
            }
        }
        return r;
    }();
    return rule;
}

/// j_0..j_{N-1}(x) for real x.
inline std::array<double, panel_order> spherical_bessel(double x) {
    constexpr std::size_t N = panel_order;
    std::array<double, N> j{};
    const double ax = std::abs(x);
    if (ax == 0.0) {
        j[0] = 1.0;
        return j;
    }
    if (ax < 1e-3) {
        // Two-term series, ample at this size.
        double lead = 1.0;
        for (std::size_t n = 0; n < N; ++n) {
            if (n > 0) lead *= ax / (2.0 * n + 1.0);
            j[n] = lead * (1.0 - ax * ax / (2.0 * (2.0 * n + 3.0)));
        }
    } else if (ax > static_cast<double>(N)) {
        j[0] = std::sin(ax) / ax;
        j[1] = std::sin(ax) / (ax * ax) - std::cos(ax) / ax;
        for (std::size_t n = 1; n + 1 < N; ++n) j[n + 1] = (2.0 * n + 1.0) / ax * j[n] - j[n - 1];
    } else {
        // Miller backward recurrence normalised by sum (2n+1) j_n^2 = 1.
        const std::size_t start = N + 24 + static_cast<std::size_t>(ax);
        std::vector<double> f(start + 2, 0.0);
        f[start] = 1e-30;
        for (std::size_t n = start; n >= 1; --n) {
            f[n - 1] = (2.0 * n + 1.0) / ax * f[n] - f[n + 1];
            if (std::abs(f[n - 1]) > 1e200)
                for (std::size_t k = n - 1; k <= start; ++k) f[k] *= 1e-200;
        }
        double s = 0.0;
        for (std::size_t n = 0; n <= start; ++n) s += (2.0 * n + 1.0) * f[n] * f[n];
        double scale = 1.0 / std::sqrt(s);
        const double j0 = std::sin(ax) / ax;
        const double j1 = std::sin(ax) / (ax * ax) - std::cos(ax) / ax;
        const bool use0 = std::abs(j0) >= std::abs(j1);
        if ((use0 ? j0 * f[0] : j1 * f[1]) < 0.0) scale = -scale;
        for (std::size_t n = 0; n < N; ++n) j[n] = f[n] * scale;
    }
    if (x < 0.0)
        for (std::size_t n = 1; n < N; n += 2) j[n] = -j[n];
    return j;
}

/// Weights c_n = 2 i^n j_n(k) so that int_{-1}^{1} sum a_n P_n(x) e^{ikx} dx = sum a_n c_n.
inline std::array<cplx, panel_order> legendre_fourier_weights(double k) {
    const auto j = spherical_bessel(k);
    std::array<cplx, panel_order> c{};
    static constexpr std::array<cplx, 4> ipow{cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    for (std::size_t n = 0; n < panel_order; ++n) c[n] = 2.0 * ipow[n % 4] * j[n];
    return c;
}

/// A function sampled on a panel: values are `width` complex numbers per node.
struct Panel {
    double lo = 0.0;
    double hi = 0.0;
    double center() const { return 0.5 * (lo + hi); }
    double half() const { return 0.5 * (hi - lo); }
};

/// Legendre coefficients of node values: coeff[n*width + e].
inline std::vector<cplx> legendre_coefficients(std::span<const cplx> values, std::size_t width) {
    const auto& g = gauss_rule();
    std::vector<cplx> a(panel_order * width, cplx{});
    for (std::size_t n = 0; n < panel_order; ++n) {
        const double norm = (2.0 * n + 1.0) / 2.0;
        for (std::size_t i = 0; i < panel_order; ++i) {
            const double wp = norm * g.w[i] * g.legendre[n][i];
            const cplx* v = &values[i * width];
            cplx* out = &a[n * width];
            for (std::size_t e = 0; e < width; ++e) out[e] += wp * v[e];
        }
    }
    return a;
}

/// A block of consecutive entries judged together by the refinement test.
struct Block {
    std::size_t offset = 0;
    std::size_t count = 0;
    double abs_tol = 0.0; ///< tail coefficients below this are accepted
};

/// Piecewise Legendre representation of a vector-valued function.
class PanelSeries {
public:
    PanelSeries() = default;
    explicit PanelSeries(std::size_t width) : width_(width) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t panel_count() const noexcept { return panels_.size(); }
    const std::vector<Panel>& panels() const noexcept { return panels_; }

    void add(const Panel& p, std::span<const cplx> node_values) {
        panels_.push_back(p);
        auto a = legendre_coefficients(node_values, width_);
        coeffs_.insert(coeffs_.end(), a.begin(), a.end());
        nodes_.insert(nodes_.end(), node_values.begin(), node_values.end());
    }

    /// Node values of panel `k` (panel_order x width, node-major).
    std::span<const cplx> node_values(std::size_t k) const {
        return {nodes_.data() + k * panel_order * width_, panel_order * width_};
    }

    /// out[e] += int f_e(s) e^{i omega s} ds over all panels, for e in [offset, offset+count).
    void fourier(double omega, std::size_t offset, std::size_t count, std::span<cplx> out) const {
        for (std::size_t k = 0; k < panels_.size(); ++k) {
            const auto& p = panels_[k];
            const double h = p.half();
            const auto c = legendre_fourier_weights(omega * h);
            const cplx phase = h * std::polar(1.0, omega * p.center());
            const cplx* a = &coeffs_[k * panel_order * width_];
            for (std::size_t n = 0; n < panel_order; ++n) {
                const cplx f = phase * c[n];
                const cplx* an = a + n * width_ + offset;
                for (std::size_t e = 0; e < count; ++e) out[e] += f * an[e];
            }
        }
    }

    /// Value of the fitted series at s, assuming panels were added in
    /// increasing order. Returns false when s lies outside every panel.
    bool evaluate(double s, std::span<cplx> out) const {
        auto it = std::upper_bound(panels_.begin(), panels_.end(), s, [](double v, const Panel& p) { return v < p.hi; });
        if (it == panels_.end()) {
            if (panels_.empty() || s != panels_.back().hi) return false;
            it = panels_.end() - 1;
        }
        if (s < it->lo) return false;
        const std::size_t k = static_cast<std::size_t>(it - panels_.begin());
        const double x = (s - it->center()) / it->half();
        std::fill(out.begin(), out.end(), cplx{});
        double p0 = 1.0, p1 = x;
        const cplx* a = &coeffs_[k * panel_order * width_];
        for (std::size_t n = 0; n < panel_order; ++n) {
            double pn;
            if (n == 0) {
                pn = 1.0;
            } else if (n == 1) {
                pn = x;
            } else {
                pn = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / static_cast<double>(n);
                p0 = p1;
                p1 = pn;
            }
            for (std::size_t e = 0; e < width_; ++e) out[e] += pn * a[n * width_ + e];
        }
        return true;
    }

    /// Gauss sum of a scalar functional of the node vectors.
    double integrate(const std::function<double(std::span<const cplx>)>& g) const {
        const auto& rule = gauss_rule();
        double s = 0.0;
        for (std::size_t k = 0; k < panels_.size(); ++k) {
            const double h = panels_[k].half();
            const auto vals = node_values(k);
            for (std::size_t i = 0; i < panel_order; ++i) s += h * rule.w[i] * g(vals.subspan(i * width_, width_));
        }
        return s;
    }

    /// Appends all panels of `other` (same width).
    void append(const PanelSeries& other) {
        panels_.insert(panels_.end(), other.panels_.begin(), other.panels_.end());
        coeffs_.insert(coeffs_.end(), other.coeffs_.begin(), other.coeffs_.end());
        nodes_.insert(nodes_.end(), other.nodes_.begin(), other.nodes_.end());
    }

private:
    std::size_t width_ = 0;
    std::vector<Panel> panels_;
    std::vector<cplx> coeffs_;
    std::vector<cplx> nodes_;
};

using Sampler = std::function<void(double, std::span<cplx>)>;

struct RefineOptions {
    double rel_tol = 1e-10;
    int max_depth = 48;
    std::size_t max_panels = 400000;
};

namespace detail {

inline bool panel_resolved(std::span<const cplx> coeffs, std::size_t width, std::span<const Block> blocks,
                           double rel_tol) {
    for (const auto& b : blocks) {
        double tail = 0.0, local = 0.0;
        for (std::size_t n = 0; n < panel_order; ++n)
            for (std::size_t e = b.offset; e < b.offset + b.count; ++e) {
                const double v = std::abs(coeffs[n * width + e]);
                local = std::max(local, v);
                if (n + 2 >= panel_order) tail = std::max(tail, v);
            }
        if (!(tail <= std::max(rel_tol * local, b.abs_tol))) return false;
    }
    return true;
}

inline void sample_panel(const Sampler& f, const Panel& p, std::size_t width, std::vector<cplx>& vals) {
    const auto& g = gauss_rule();
    vals.assign(panel_order * width, cplx{});
    for (std::size_t i = 0; i < panel_order; ++i)
        f(p.center() + p.half() * g.x[i], std::span<cplx>(vals.data() + i * width, width));
}

inline void refine(const Sampler& f, const Panel& p, std::size_t width, std::span<const Block> blocks,
                   const RefineOptions& opt, int depth, PanelSeries& out) {
    std::vector<cplx> vals;
    sample_panel(f, p, width, vals);
    for (const auto& v : vals)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw GridError("panel refinement met a non-finite sample");
    const auto coeffs = legendre_coefficients(vals, width);
    if (depth >= opt.max_depth || panel_resolved(coeffs, width, blocks, opt.rel_tol)) {
        if (depth >= opt.max_depth && !panel_resolved(coeffs, width, blocks, opt.rel_tol))
            throw GridError("panel refinement depth exhausted");
        out.add(p, vals);
        if (out.panel_count() > opt.max_panels) throw GridError("panel budget exhausted");
        return;
    }
    const double mid = p.center();
    refine(f, {p.lo, mid}, width, blocks, opt, depth + 1, out);
    refine(f, {mid, p.hi}, width, blocks, opt, depth + 1, out);
}

} // namespace detail

/// Adaptive bisection of one panel until every block's last two Legendre
/// coefficients fall below rel_tol times the largest coefficient or the
/// block's absolute tolerance.
inline PanelSeries refine_panel(const Sampler& f, const Panel& p, std::size_t width, std::span<const Block> blocks,
                                const RefineOptions& opt = {}) {
    PanelSeries out(width);
    detail::refine(f, p, width, blocks, opt, 0, out);
    return out;
}

/// Sorted unique breakpoints into consecutive panels.
inline std::vector<Panel> panels_from_breakpoints(std::vector<double> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Panel> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) out.push_back({pts[i], pts[i + 1]});
    return out;
}

} // namespace greensolve::quad
