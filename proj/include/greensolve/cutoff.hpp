#pragma once

// Smooth plateau functions and the cutoff resolvent H = (1 - chi) R.

#include "greensolve/errors.hpp"
#include "greensolve/generator.hpp"
#include "greensolve/sets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace greensolve::cutoff {

using linalg::ComplexMatrix;
using linalg::cplx;

namespace detail {

/// r(x) = f(x) / (f(x) + f(1-x)), f(x) = exp(-1/x), with r' and r''.
/// Outside a thin guard band the ramp is flat to double precision.
inline std::array<double, 3> ramp(double x) {
    constexpr double guard = 1.0 / 700.0;
    if (x <= guard) return {0.0, 0.0, 0.0};
    if (x >= 1.0 - guard) return {1.0, 0.0, 0.0};
    const double y = 1.0 - x;
    const double u = 1.0 / x - 1.0 / y;
    const double du = -1.0 / (x * x) - 1.0 / (y * y);
    const double d2u = 2.0 / (x * x * x) - 2.0 / (y * y * y);
    const double r = 1.0 / (1.0 + std::exp(u));
    const double rc = 1.0 / (1.0 + std::exp(-u)); // 1 - r without cancellation
    const double q = r * rc;
    const double dr = -q * du;
    const double d2r = -dr * (rc - r) * du - q * d2u;
    return {r, dr, d2r};
}

} // namespace detail

/// chi = 1 on the cover fattened by r_inner, 0 beyond r_outer = 2 r_inner.
class PlateauBump {
public:
    PlateauBump() = default;
    PlateauBump(std::vector<Interval> components, double margin)
        : components_(std::move(components)), margin_(margin) {}

    double r_inner() const noexcept { return margin_; }
    double r_outer() const noexcept { return 2.0 * margin_; }
    double margin() const noexcept { return margin_; }
    const std::vector<Interval>& components() const noexcept { return components_; }
    bool empty() const noexcept { return components_.empty(); }

    std::vector<Interval> plateau() const { return fattened(margin_); }
    std::vector<Interval> support() const { return fattened(2.0 * margin_); }

    /// Ramp endpoints of every component, sorted.
    std::vector<double> breakpoints() const {
        std::vector<double> pts;
        for (const auto& c : components_)
            for (double v : {c.lo - 2 * margin_, c.lo - margin_, c.hi + margin_, c.hi + 2 * margin_}) pts.push_back(v);
        std::sort(pts.begin(), pts.end());
        return pts;
    }

    /// chi, chi', chi'' at s.
    std::array<double, 3> jet(double s) const {
        for (const auto& c : components_) {
            const double m = margin_;
            if (s < c.lo - 2 * m || s > c.hi + 2 * m) continue;
            if (s >= c.lo - m && s <= c.hi + m) return {1.0, 0.0, 0.0};
            if (s < c.lo) {
                const auto r = detail::ramp((s - (c.lo - 2 * m)) / m);
                return {r[0], r[1] / m, r[2] / (m * m)};
            }
            const auto r = detail::ramp((c.hi + 2 * m - s) / m);
            return {r[0], -r[1] / m, r[2] / (m * m)};
        }
        return {0.0, 0.0, 0.0};
    }

    double operator()(double s) const { return jet(s)[0]; }

private:
    std::vector<Interval> fattened(double w) const {
        std::vector<Interval> out;
        for (const auto& c : components_) out.push_back({c.lo - w, c.hi + w});
        return out;
    }

    std::vector<Interval> components_;
    double margin_ = 0.0;
};

/// Plateau bump around `cover` whose support stays clear of F.
inline PlateauBump make_bump(std::vector<Interval> cover, const SpectrumSet& F, double margin) {
    if (cover.empty()) return PlateauBump({}, margin > 0 ? margin : 1.0);
    if (!(margin > 0.0) || !std::isfinite(margin)) throw SeparationError("make_bump: margin must be positive");
    for (auto& c : cover) {
        if (!std::isfinite(c.lo) || !std::isfinite(c.hi)) throw SeparationError("make_bump: cover must be compact");
        if (c.lo > c.hi) std::swap(c.lo, c.hi);
    }
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : cover) d = std::min(d, F.distance(c));
    if (!(d > 2.0 * margin)) throw SeparationError("make_bump: dist(cover, F) <= 2 * margin");
    // Components whose supports would overlap are merged into one plateau.
    std::sort(cover.begin(), cover.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::vector<Interval> merged;
    for (const auto& c : cover) {
        if (!merged.empty() && c.lo - merged.back().hi <= 4.0 * margin) {
            merged.back().hi = std::max(merged.back().hi, c.hi);
        } else {
            merged.push_back(c);
        }
    }
    // A merged plateau may now reach into F; that breaks the separation.
    for (const auto& c : merged)
        if (!(F.distance(Interval{c.lo - 2 * margin, c.hi + 2 * margin}) > 0.0))
            throw SeparationError("make_bump: merged plateau meets F");
    return PlateauBump(std::move(merged), margin);
}

inline double bump_derivative(const PlateauBump& bump, double s, int k) {
    if (k < 0 || k > 2) throw DomainError("bump_derivative: k must be 0, 1 or 2");
    return bump.jet(s)[static_cast<std::size_t>(k)];
}

/// H = (1 - chi) R with chi a plateau bump over K.
class CutoffResolvent {
public:
    CutoffResolvent(gen::GeneratorSpec g, PlateauBump bump, SpectrumSet F)
        : generator_(std::move(g)), bump_(std::move(bump)), F_(std::move(F)) {
        M_ = bump_.support();
        double reach = generator_.a();
        for (const auto& iv : M_) reach = std::max({reach, std::abs(iv.lo), std::abs(iv.hi)});
        b_ = reach + 1.0;
    }

    const gen::GeneratorSpec& generator() const noexcept { return generator_; }
    const PlateauBump& bump() const noexcept { return bump_; }
    const SpectrumSet& F() const noexcept { return F_; }
    /// supp chi as a list of closed intervals.
    const std::vector<Interval>& M() const noexcept { return M_; }
    double b() const noexcept { return b_; }
    std::size_t dimension() const noexcept { return generator_.dimension(); }

    ComplexMatrix zero() const {
        if (generator_.matrix().is_diagonal()) return ComplexMatrix::zeros(dimension());
        return ComplexMatrix(dimension(), dimension());
    }

    /// H, H', H'' at s (entries up to kmax filled).
    std::array<ComplexMatrix, 3> jet(double s, int kmax = 2) const {
        const auto chi = bump_.jet(s);
        std::array<ComplexMatrix, 3> out;
        if (chi[0] == 1.0 && chi[1] == 0.0 && chi[2] == 0.0) {
            for (int k = 0; k <= kmax; ++k) out[static_cast<std::size_t>(k)] = zero();
            return out;
        }
        const auto r = gen::resolvent_jet(generator_, s, kmax);
        const double w = 1.0 - chi[0];
        out[0] = w * r.r0;
        if (kmax >= 1) {
            out[1] = w * r.r1;
            if (chi[1] != 0.0) out[1].add_scaled(-chi[1], r.r0);
        }
        if (kmax >= 2) {
            out[2] = w * r.r2;
            if (chi[1] != 0.0) out[2].add_scaled(-2.0 * chi[1], r.r1);
            if (chi[2] != 0.0) out[2].add_scaled(-chi[2], r.r0);
        }
        return out;
    }

    ComplexMatrix value(double s) const { return jet(s, 0)[0]; }

private:
    gen::GeneratorSpec generator_;
    PlateauBump bump_;
    SpectrumSet F_;
    std::vector<Interval> M_;
    double b_ = 1.0;
};

/// Cutoff resolvent for the pair (A, F): cover = K, margin = min(d, 4) / 4 with
/// d = dist(K, F), M = supp chi, b = max(a, sup|M|) + 1.
inline CutoffResolvent cutoff_resolvent(const gen::GeneratorSpec& g, const SpectrumSet& F) {
    std::vector<Interval> cover;
    for (double k : g.K()) cover.push_back({k, k});
    double d = std::numeric_limits<double>::infinity();
    for (double k : g.K()) d = std::min(d, F.distance(k));
    if (!cover.empty() && !(d > 1e-6)) throw SeparationError("cutoff_resolvent: F meets K");
    const double margin = std::min(d, 4.0) / 4.0;
    return CutoffResolvent(g, make_bump(std::move(cover), F, margin), F);
}

inline ComplexMatrix H_derivative(const CutoffResolvent& c, double s, int k) {
    if (k < 0 || k > 2) throw DomainError("H_derivative: k must be 0, 1 or 2");
    return c.jet(s, k)[static_cast<std::size_t>(k)];
}

} // namespace greensolve::cutoff
