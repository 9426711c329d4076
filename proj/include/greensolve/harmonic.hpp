#pragma once

// Trigonometric polynomials, uniformly sampled functions and the spectral
// tools that act on them: exact spectra on the trig class, a windowed DFT
// surrogate for samples, Fejer approximation with exponent avoidance, the
// sliding mean M_h and an almost-period scan.

#include "greensolve/cutoff.hpp"
#include "greensolve/errors.hpp"
#include "greensolve/linalg.hpp"
#include "greensolve/parallel.hpp"
#include "greensolve/sets.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace greensolve::harmonic {

using linalg::ComplexMatrix;
using linalg::ComplexVector;
using linalg::cplx;

class SampledFunction;

struct TrigTerm {
    double lambda = 0.0;
    ComplexVector x;
};

/// sum_j e^{i lambda_j t} x_j with distinct frequencies kept sorted.
class TrigPolynomial {
public:
    TrigPolynomial() = default;
    explicit TrigPolynomial(std::size_t dim) : dim_(dim) {}
    TrigPolynomial(std::size_t dim, std::vector<TrigTerm> terms) : dim_(dim) {
        for (auto& t : terms) add(t.lambda, std::move(t.x));
    }

    /// Single exponential e^{i lambda t} x.
    static TrigPolynomial exponential(double lambda, ComplexVector x) {
        TrigPolynomial p(x.size());
        p.add(lambda, std::move(x));
        return p;
    }

    std::size_t dimension() const noexcept { return dim_; }
    const std::vector<TrigTerm>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }

    /// Adds a term, merging with an equal frequency.
    void add(double lambda, ComplexVector x) {
        if (x.size() != dim_) throw DimensionMismatch("trig term dimension differs");
        auto it = std::lower_bound(terms_.begin(), terms_.end(), lambda,
                                   [](const TrigTerm& t, double l) { return t.lambda < l; });
        if (it != terms_.end() && it->lambda == lambda) {
            it->x += x;
        } else {
            terms_.insert(it, TrigTerm{lambda, std::move(x)});
        }
    }

    ComplexVector operator()(double t) const {
        ComplexVector v(dim_);
        for (const auto& term : terms_) {
            const cplx e = std::polar(1.0, term.lambda * t);
            for (std::size_t i = 0; i < dim_; ++i) v[i] += e * term.x[i];
        }
        return v;
    }

    /// Triangle bound sum ||x_j|| on the sup norm.
    double sup_bound() const {
        double s = 0.0;
        for (const auto& t : terms_) s += t.x.norm();
        return s;
    }

    /// t -> P(t + a).
    TrigPolynomial translated(double a) const {
        TrigPolynomial p(dim_);
        for (const auto& t : terms_) p.terms_.push_back({t.lambda, std::polar(1.0, t.lambda * a) * t.x});
        return p;
    }

    TrigPolynomial& operator*=(cplx s) {
        for (auto& t : terms_) t.x *= s;
        return *this;
    }
    friend TrigPolynomial operator*(cplx s, TrigPolynomial p) { return p *= s; }
    friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) {
        for (const auto& t : b.terms_) a.add(t.lambda, t.x);
        return a;
    }

    /// Drops terms whose amplitude is at most `tol` times the largest one.
    TrigPolynomial pruned(double tol) const {
        double biggest = 0.0;
        for (const auto& t : terms_) biggest = std::max(biggest, t.x.norm());
        TrigPolynomial p(dim_);
        for (const auto& t : terms_)
            if (t.x.norm() > tol * biggest) p.terms_.push_back(t);
        return p;
    }

    SampledFunction sample(double t0, double step, std::size_t count) const;

private:
    std::size_t dim_ = 0;
    std::vector<TrigTerm> terms_;
};

/// Values f(t0 + i step), i < size, with a declared sup bound.
class SampledFunction {
public:
    SampledFunction() = default;
    SampledFunction(double t0, double step, std::vector<ComplexVector> values, std::optional<double> sup_bound = std::nullopt)
        : t0_(t0), step_(step), values_(std::move(values)) {
        if (values_.empty()) throw DomainError("sampled function needs at least one value");
        if (!(step_ > 0.0) || !std::isfinite(step_) || !std::isfinite(t0_)) throw DomainError("sampled function needs a positive step");
        const std::size_t d = values_.front().size();
        for (const auto& v : values_)
            if (v.size() != d) throw DimensionMismatch("sampled values differ in dimension");
        const double m = max_norm();
        if (sup_bound && *sup_bound < m * (1.0 - 1e-12)) throw DomainError("declared sup bound is below the sample maximum");
        sup_bound_ = sup_bound ? std::max(*sup_bound, m) : m;
    }

    double t0() const noexcept { return t0_; }
    double step() const noexcept { return step_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t dimension() const noexcept { return values_.front().size(); }
    double t(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * step_; }
    double t_end() const noexcept { return t(values_.size() - 1); }
    double span() const noexcept { return t_end() - t0_; }
    double sup_bound() const noexcept { return sup_bound_; }
    const std::vector<ComplexVector>& values() const noexcept { return values_; }
    const ComplexVector& operator[](std::size_t i) const { return values_[i]; }

    double max_norm() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, v.norm());
        return m;
    }

    /// Index of the grid point nearest t (clamped).
    std::size_t index_near(double t) const {
        const double x = std::round((t - t0_) / step_);
        if (x <= 0) return 0;
        return std::min(values_.size() - 1, static_cast<std::size_t>(x));
    }
    /// Index of an exact grid point, or nothing.
    std::optional<std::size_t> grid_index(double t) const {
        const double x = (t - t0_) / step_;
        const double r = std::round(x);
        if (std::abs(x - r) > 1e-6 || r < 0 || r > static_cast<double>(values_.size() - 1)) return std::nullopt;
        return static_cast<std::size_t>(r);
    }

    /// Local Lagrange interpolation through eight neighbouring samples.
    ComplexVector interpolate(double t) const {
        const std::size_t n = values_.size();
        const double x = (t - t0_) / step_;
        if (x < -1e-9 || x > static_cast<double>(n - 1) + 1e-9) throw DomainError("interpolation outside the sampled span");
        const std::size_t order = std::min<std::size_t>(8, n);
        long first = static_cast<long>(std::floor(x)) - static_cast<long>(order / 2) + 1;
        first = std::clamp(first, 0L, static_cast<long>(n - order));
        ComplexVector out(dimension());
        for (std::size_t a = 0; a < order; ++a) {
            double w = 1.0;
            const double xa = static_cast<double>(first) + static_cast<double>(a);
            for (std::size_t b = 0; b < order; ++b)
                if (b != a) {
                    const double xb = static_cast<double>(first) + static_cast<double>(b);
                    w *= (x - xb) / (xa - xb);
                }
            const auto& v = values_[static_cast<std::size_t>(first) + a];
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * v[i];
        }
        return out;
    }

    /// Samples from index `first`, `count` of them.
    SampledFunction slice(std::size_t first, std::size_t count) const {
        if (first + count > values_.size() || count == 0) throw DomainError("slice outside the sampled span");
        std::vector<ComplexVector> v(values_.begin() + static_cast<long>(first), values_.begin() + static_cast<long>(first + count));
        return SampledFunction(t(first), step_, std::move(v), sup_bound_);
    }

private:
    double t0_ = 0.0;
    double step_ = 1.0;
    std::vector<ComplexVector> values_;
    double sup_bound_ = 0.0;
};

inline SampledFunction TrigPolynomial::sample(double t0, double step, std::size_t count) const {
    std::vector<ComplexVector> v;
    v.reserve(count);
    for (std::size_t i = 0; i < count; ++i) v.push_back((*this)(t0 + static_cast<double>(i) * step));
    return SampledFunction(t0, step, std::move(v), sup_bound());
}

/// Frequencies carrying a nonzero amplitude.
inline SpectrumSet trig_spectrum(const TrigPolynomial& p) {
    std::vector<double> pts;
    for (const auto& t : p.terms())
        if (t.x.norm() > 0.0) pts.push_back(t.lambda);
    return SpectrumSet::from_points(std::move(pts));
}

using Symbol = std::function<ComplexMatrix(double)>;

/// (lambda_j, x_j) -> (lambda_j, F^(lambda_j) x_j).
inline TrigPolynomial convolve_trig(const Symbol& symbol, const TrigPolynomial& p) {
    TrigPolynomial out(p.dimension());
    for (const auto& t : p.terms()) out.add(t.lambda, symbol(t.lambda) * t.x);
    return out;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// In-place forward or backward DFT of n complex values (unnormalised).
inline void dft(std::vector<cplx>& data, bool forward) {
    if (data.empty()) return;
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), p, p, forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

} // namespace detail

/// Hann-windowed DFT magnitude (combined over components), normalised to 1;
/// returns the local-maximum bins reaching `threshold` as angular frequencies.
inline SpectrumSet spectrum_estimate(const SampledFunction& f, double threshold) {
    const std::size_t n = f.size();
    if (n < 1024) throw TooFewSamples("spectrum_estimate needs at least 1024 samples");
    if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("spectrum_estimate: threshold must lie in (0, 1)");
    std::vector<double> power(n, 0.0);
    std::vector<cplx> buf(n);
    for (std::size_t c = 0; c < f.dimension(); ++c) {
        for (std::size_t k = 0; k < n; ++k) {
            const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1)));
            buf[k] = w * f[k][c];
        }
        detail::dft(buf, true);
        for (std::size_t m = 0; m < n; ++m) power[m] += std::norm(buf[m]);
    }
    double peak = *std::max_element(power.begin(), power.end());
    std::vector<double> freqs;
    if (peak == 0.0) return SpectrumSet();
    const double cut = threshold * threshold * peak; // power compares squared magnitudes
    for (std::size_t m = 0; m < n; ++m) {
        const double left = power[(m + n - 1) % n], right = power[(m + 1) % n];
        if (power[m] < cut || power[m] < left || power[m] <= right) continue;
        const double k = m < (n + 1) / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
        freqs.push_back(2.0 * std::numbers::pi * k / (static_cast<double>(n) * f.step()));
    }
    return SpectrumSet::from_points(std::move(freqs));
}

/// Bin width of the DFT surrogate for f.
inline double frequency_bin(const SampledFunction& f) {
    return 2.0 * std::numbers::pi / (static_cast<double>(f.size()) * f.step());
}

struct FejerApproximation {
    TrigPolynomial poly;
    int order = 0;          ///< Fejer order K (terms |m| < K)
    double l1_error = 0.0;  ///< int_{-n}^{n} ||f - sigma_K|| before the spectral correction
    std::vector<std::pair<int, double>> history; ///< (K, l1 error) for every order tried
    double target = 0.0;
    double sup_norm = 0.0;  ///< sampled sup of the corrected polynomial
    bool sup_bound_ok = false;
    bool avoids_M = false;
};

/// Fejer mean of the 2n-periodised restriction of f to [-n, n], with the
/// exponents near M_avoid removed by multiplying with 1 - psi^ for a plateau
/// psi^ equal to 1 on M_avoid.
inline FejerApproximation fejer_approximation(const SampledFunction& f, double n, const SpectrumSet& M_avoid) {
    if (!(n > 0.0)) throw DomainError("fejer_approximation: n must be positive");
    const double offset = (-n - f.t0()) / f.step();
    const std::size_t count = static_cast<std::size_t>(std::llround(2.0 * n / f.step()));
    if (offset < -0.5 || count == 0) throw DomainError("fejer_approximation: f must cover [-n, n]");
    const std::size_t first = static_cast<std::size_t>(std::llround(offset));
    if (first + count > f.size()) throw DomainError("fejer_approximation: f must cover [-n, n]");
    const double h = f.step();
    const std::size_t dim = f.dimension();
    const double omega = std::numbers::pi / n;
    const double period = 2.0 * n;

    auto coefficient = [&](long m) {
        ComplexVector c(dim);
        for (std::size_t i = 0; i < count; ++i) {
            const double t = f.t(first + i);
            const cplx e = std::polar(h / period, -omega * static_cast<double>(m) * t);
            for (std::size_t d = 0; d < dim; ++d) c[d] += e * f[first + i][d];
        }
        return c;
    };

    double fmax = 0.0;
    for (std::size_t i = 0; i < count; ++i) fmax = std::max(fmax, f[first + i].norm());
    FejerApproximation out;
    out.target = std::max(std::pow(2.0, -n), 1e-3 * fmax);

    std::vector<ComplexVector> coeffs{coefficient(0)};
    std::vector<ComplexVector> neg{ComplexVector(dim)};
    auto build = [&](int K) {
        TrigPolynomial p(dim);
        for (int m = -(K - 1); m <= K - 1; ++m) {
            const double weight = 1.0 - std::abs(m) / static_cast<double>(K);
            const auto& c = m >= 0 ? coeffs[static_cast<std::size_t>(m)] : neg[static_cast<std::size_t>(-m)];
            p.add(omega * m, weight * c);
        }
        return p;
    };
    auto l1_error = [&](const TrigPolynomial& p) {
        double e = 0.0;
        for (std::size_t i = 0; i < count; ++i) e += h * (f[first + i] - p(f.t(first + i))).norm();
        return e;
    };

    const int max_order = static_cast<int>(std::max<std::size_t>(1, count / 2));
    int K = 1;
    TrigPolynomial sigma;
    for (;;) {
        while (static_cast<int>(coeffs.size()) < K) {
            const long m = static_cast<long>(coeffs.size());
            coeffs.push_back(coefficient(m));
            neg.push_back(coefficient(-m));
        }
        sigma = build(K);
        out.l1_error = l1_error(sigma);
        out.order = K;
        out.history.push_back({K, out.l1_error});
        if (out.l1_error <= out.target || K >= max_order) break;
        K = std::min(2 * K, max_order);
    }

    TrigPolynomial poly = sigma.pruned(1e-13);
    if (!M_avoid.empty()) {
        for (const auto& iv : M_avoid.intervals())
            if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw DomainError("fejer_approximation: M must be compact");
        // Dominant content of f: lattice frequencies with a sizeable coefficient.
        double biggest = 0.0;
        for (const auto& t : poly.terms()) biggest = std::max(biggest, t.x.norm());
        std::vector<double> dominant;
        for (const auto& t : poly.terms())
            if (t.x.norm() >= 0.05 * biggest) dominant.push_back(t.lambda);
        const SpectrumSet content = SpectrumSet::from_points(dominant);
        const double d = content.distance(M_avoid);
        if (!(d > omega)) throw SeparationError("fejer_approximation: M lies within one frequency bin of the content of f");
        const auto psi = cutoff::make_bump(M_avoid.as_intervals(), content, std::min(d, 4.0) / 4.0);
        TrigPolynomial corrected(dim);
        for (const auto& t : poly.terms()) {
            const double keep = 1.0 - psi(t.lambda);
            if (keep != 0.0) corrected.add(t.lambda, keep * t.x);
        }
        poly = std::move(corrected);
    }
    out.poly = std::move(poly);

    double sup = 0.0;
    for (std::size_t i = 0; i < 2 * count; ++i) sup = std::max(sup, out.poly(-n + 0.5 * h * static_cast<double>(i)).norm());
    out.sup_norm = sup;
    out.sup_bound_ok = sup <= f.sup_bound() + 1.0;
    out.avoids_M = true;
    for (const auto& t : out.poly.terms())
        if (M_avoid.contains(t.lambda)) out.avoids_M = false;
    return out;
}

/// (M_h f)(t) = (1/h) int_0^h f(t + s) ds by the composite trapezoid rule; the
/// output grid is the input grid shortened by h.
inline SampledFunction mean_operator(const SampledFunction& f, double h) {
    const double step = f.step();
    if (!(h >= step * (1.0 - 1e-12))) throw DomainError("mean_operator: h must be at least one step");
    if (h > f.span()) throw WindowTooWide("mean_operator: window exceeds the sampled span");
    const std::size_t n = f.size(), dim = f.dimension();
    const double q = h / step;
    const std::size_t whole = static_cast<std::size_t>(std::floor(q + 1e-9));
    const double frac = std::max(0.0, q - static_cast<double>(whole));
    const std::size_t reach = whole + (frac > 1e-9 ? 1 : 0);
    if (reach >= n) throw WindowTooWide("mean_operator: window exceeds the sampled span");

    // prefix[k] = trapezoid integral from t_0 to t_k.
    std::vector<ComplexVector> prefix(n, ComplexVector(dim));
    for (std::size_t k = 1; k < n; ++k)
        for (std::size_t d = 0; d < dim; ++d) prefix[k][d] = prefix[k - 1][d] + 0.5 * step * (f[k - 1][d] + f[k][d]);

    const std::size_t out_n = n - reach;
    std::vector<ComplexVector> out(out_n, ComplexVector(dim));
    for (std::size_t i = 0; i < out_n; ++i) {
        auto& o = out[i];
        const std::size_t j = i + whole;
        for (std::size_t d = 0; d < dim; ++d) {
            cplx s = prefix[j][d] - prefix[i][d];
            if (frac > 1e-9) {
                // Trapezoid on the linear interpolant over the partial step.
                const cplx a = f[j][d], b = f[j + 1][d];
                const cplx end = a + frac * (b - a);
                s += 0.5 * frac * step * (a + end);
            }
            o[d] = s / h;
        }
    }
    return SampledFunction(f.t0(), step, std::move(out), f.sup_bound());
}

struct ApEvidence {
    bool is_ap_evidence = false;
    double period_density = 0.0;      ///< largest gap between almost periods over the window
    std::vector<double> almost_periods;
};

/// Scans shifts tau = m step in (0, span/2] for eps-almost periods and checks
/// that every window-long stretch of (0, span/2] contains one.
inline ApEvidence ap_detector(const SampledFunction& f, double eps, double window) {
    if (!(eps > 0.0) || !(window > 0.0)) throw DomainError("ap_detector: eps and window must be positive");
    if (f.span() < 8.0 * window * (1.0 - 1e-12)) throw DomainError("ap_detector: f must span at least 8 windows");
    const std::size_t n = f.size();
    const std::size_t max_shift = static_cast<std::size_t>(std::floor(0.5 * f.span() / f.step() + 1e-9));
    const auto& v = f.values();
    std::vector<char> good(max_shift + 1, 0);
    const double eps2 = eps * eps;
    auto dist2 = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t d = 0; d < v[a].size(); ++d) s += std::norm(v[a][d] - v[b][d]);
        return s;
    };
    parallel_for(max_shift, [&](std::size_t idx) {
        const std::size_t m = idx + 1;
        const std::size_t overlap = n - m;
        // Coarse pass first so most shifts are rejected early.
        for (std::size_t stride : {std::size_t{97}, std::size_t{1}})
            for (std::size_t i = 0; i < overlap; i += stride)
                if (dist2(i + m, i) > eps2) return;
        good[m] = 1;
    });
    ApEvidence ev;
    for (std::size_t m = 1; m <= max_shift; ++m)
        if (good[m]) ev.almost_periods.push_back(static_cast<double>(m) * f.step());
    const double horizon = static_cast<double>(max_shift) * f.step();
    double prev = 0.0, gap = 0.0;
    for (double tau : ev.almost_periods) {
        gap = std::max(gap, tau - prev);
        prev = tau;
    }
    gap = std::max(gap, horizon - prev);
    ev.period_density = gap / window;
    ev.is_ap_evidence = gap <= window;
    return ev;
}

} // namespace greensolve::harmonic
