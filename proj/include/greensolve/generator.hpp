#pragma once

// The generator A of the evolution equation: a dense matrix, or a finite
// diagonal pole family standing in for an operator whose resolvent decays
// slower than 1/|t|.

#include "greensolve/errors.hpp"
#include "greensolve/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace greensolve::gen {

using linalg::ComplexMatrix;
using linalg::cplx;

inline constexpr double axis_tolerance = 1e-10;  ///< |Re lambda| below this counts as on the axis
inline constexpr double hit_tolerance = 1e-8;    ///< resolvent refuses t this close to K
inline constexpr double delta_margin = 1e-3;

struct DecayFit {
    double theta_hat = 0.0;
    double eta_hat = 0.0;
    double delta = 0.0;
};

class GeneratorSpec {
public:
    enum class Kind { matrix, oracle };

    /// Matrix generator. Bounded A always has ||R(t)|| ~ 1/|t|, so theta = 1
    /// unless a value is declared.
    static GeneratorSpec from_matrix(ComplexMatrix a, std::optional<double> theta = std::nullopt) {
        linalg::detail::require_square(a, "GeneratorSpec");
        if (!a.is_finite()) throw DomainError("generator matrix has non-finite entries");
        GeneratorSpec g;
        g.kind_ = Kind::matrix;
        g.spectrum_ = linalg::eigenvalues(a);
        g.matrix_ = std::move(a);
        g.finish(theta.value_or(1.0));
        return g;
    }

    /// Diagonal pole family with R(t) = diag(1/(it - lambda_k)). The decay
    /// exponent is fitted when not declared.
    static GeneratorSpec from_poles(std::vector<cplx> poles, std::optional<double> theta = std::nullopt);

    Kind kind() const noexcept { return kind_; }
    bool is_matrix() const noexcept { return kind_ == Kind::matrix; }
    /// The matrix A (diagonal storage for pole families).
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    std::size_t dimension() const noexcept { return matrix_.rows(); }
    const std::vector<cplx>& spectrum() const noexcept { return spectrum_; }
    const std::vector<double>& K() const noexcept { return K_; }
    double a() const noexcept { return a_; }
    double theta() const noexcept { return theta_; }
    double delta() const noexcept { return delta_; }
    double eta() const noexcept { return eta_; }
    /// Distance from t to K (infinity when K is empty).
    double distance_to_K(double t) const {
        double d = std::numeric_limits<double>::infinity();
        for (double k : K_) d = std::min(d, std::abs(t - k));
        return d;
    }

    /// Default probe: 64 log-spaced points per sign on [a, upper].
    std::vector<double> default_probe() const {
        std::vector<double> probe;
        const double lo = a_, hi = probe_upper();
        for (int sign : {-1, 1})
            for (int i = 0; i < 64; ++i) {
                const double t = lo * std::pow(hi / lo, static_cast<double>(i) / 63.0);
                probe.push_back(sign * t);
            }
        return probe;
    }

private:
    double probe_upper() const {
        if (kind_ == Kind::matrix) return std::max(1e3 * a_, 10.0 * linalg::operator_norm(matrix_));
        // Beyond the poles the family looks like a bounded operator again, so
        // the fit stops at the pole extent (kept between two and three decades).
        double extent = 0.0;
        for (const auto& l : spectrum_) extent = std::max(extent, std::abs(l.imag()));
        return std::clamp(extent, 1e2 * a_, 1e3 * a_);
    }

    void finish(double theta);

    Kind kind_ = Kind::matrix;
    ComplexMatrix matrix_;
    std::vector<cplx> spectrum_;
    std::vector<double> K_;
    double a_ = 1.0;
    double theta_ = 1.0;
    double delta_ = 1.0 - delta_margin;
    double eta_ = 1.0;

    friend DecayFit fit_decay(const GeneratorSpec&, const std::vector<double>&);
};

/// K and a: K = {Im lambda : |Re lambda| <= 1e-10}, a = max(1, max|K| + 1).
inline std::pair<std::vector<double>, double> imaginary_spectrum(const GeneratorSpec& g) {
    return {g.K(), g.a()};
}

/// R(t) = (itI - A)^{-1}.
inline ComplexMatrix resolvent(const GeneratorSpec& g, double t) {
    if (g.distance_to_K(t) < hit_tolerance) throw SpectrumHit("resolvent: t lies on K");
    const auto& a = g.matrix();
    const std::size_t n = a.rows();
    if (a.is_diagonal()) {
        std::vector<cplx> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = 1.0 / (cplx(0.0, t) - a.raw()[i]);
        return ComplexMatrix::diagonal(std::move(d));
    }
    ComplexMatrix m = (-1.0) * a;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += cplx(0.0, t);
    try {
        return linalg::solve(m, ComplexMatrix::identity(n));
    } catch (const SingularMatrix&) {
        throw SpectrumHit("resolvent: it - A is numerically singular");
    }
}

/// R, R', R'' from one resolvent: R^{(k)} = k! (-i)^k R^{k+1}.
struct ResolventJet {
    ComplexMatrix r0, r1, r2, r3;
};

inline ResolventJet resolvent_jet(const GeneratorSpec& g, double t, int kmax = 3) {
    ResolventJet j;
    j.r0 = resolvent(g, t);
    ComplexMatrix p = j.r0;
    if (kmax >= 1) {
        p = p * j.r0;
        j.r1 = cplx(0.0, -1.0) * p;
    }
    if (kmax >= 2) {
        p = p * j.r0;
        j.r2 = cplx(-2.0, 0.0) * p;
    }
    if (kmax >= 3) {
        p = p * j.r0;
        j.r3 = cplx(0.0, 6.0) * p;
    }
    return j;
}

inline ComplexMatrix resolvent_derivative(const GeneratorSpec& g, double t, int k) {
    if (k < 0 || k > 2) throw DomainError("resolvent_derivative: k must be 0, 1 or 2");
    const auto j = resolvent_jet(g, t, k);
    return k == 0 ? j.r0 : (k == 1 ? j.r1 : j.r2);
}

/// eta_k |t|^{-(k+1) delta} with eta_k = k! eta^{k+1}.
inline double derivative_bound(double eta, double delta, double t, int k) {
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return fact * std::pow(eta, k + 1) * std::pow(std::abs(t), -(k + 1) * delta);
}

inline double derivative_bound(const GeneratorSpec& g, double t, int k) {
    if (std::abs(t) < g.a()) throw DomainError("derivative_bound: |t| < a");
    if (k < 0) throw DomainError("derivative_bound: negative order");
    return derivative_bound(g.eta(), g.delta(), t, k);
}

/// Least-squares decay exponent of ||R(t)|| on the probe, fitted per sign and
/// reduced by the minimum, with eta_hat for the resulting delta.
inline DecayFit fit_decay(const GeneratorSpec& g, const std::vector<double>& probe) {
    if (probe.size() < 16) throw DomainError("fit_decay: need at least 16 probe points");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double t : probe) {
        if (std::abs(t) < g.a()) throw DomainError("fit_decay: probe point inside (-a, a)");
        lo = std::min(lo, std::abs(t));
        hi = std::max(hi, std::abs(t));
    }
    if (hi < 100.0 * lo * (1.0 - 1e-12)) throw DomainError("fit_decay: probe must span two decades");

    std::vector<double> norms(probe.size());
    for (std::size_t i = 0; i < probe.size(); ++i) norms[i] = linalg::operator_norm(resolvent(g, probe[i]));

    double theta_hat = std::numeric_limits<double>::infinity();
    for (int sign : {-1, 1}) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int count = 0;
        double slo = std::numeric_limits<double>::infinity(), shi = 0.0;
        for (std::size_t i = 0; i < probe.size(); ++i) {
            if ((probe[i] > 0) != (sign > 0)) continue;
            const double x = std::log(std::abs(probe[i])), y = std::log(norms[i]);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
            ++count;
            slo = std::min(slo, std::abs(probe[i]));
            shi = std::max(shi, std::abs(probe[i]));
        }
        if (count < 2 || shi <= slo) continue;
        const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        theta_hat = std::min(theta_hat, -slope);
    }
    if (!std::isfinite(theta_hat)) throw DomainError("fit_decay: probe has no usable sign branch");
    if (theta_hat <= 0.5 + delta_margin)
        throw DecayViolation("fit_decay: fitted decay exponent " + std::to_string(theta_hat) + " is not above 1/2");

    DecayFit fit;
    fit.theta_hat = theta_hat;
    fit.delta = std::clamp(std::min(theta_hat, 1.0 - delta_margin), 0.5 + delta_margin, 1.0 - delta_margin);
    for (std::size_t i = 0; i < probe.size(); ++i)
        fit.eta_hat = std::max(fit.eta_hat, std::pow(std::abs(probe[i]), fit.delta) * norms[i]);
    return fit;
}

inline DecayFit fit_decay(const GeneratorSpec& g) { return fit_decay(g, g.default_probe()); }

inline GeneratorSpec GeneratorSpec::from_poles(std::vector<cplx> poles, std::optional<double> theta) {
    if (poles.empty()) throw DomainError("pole family is empty");
    for (const auto& p : poles)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) throw DomainError("pole family has non-finite entries");
    GeneratorSpec g;
    g.kind_ = Kind::oracle;
    g.spectrum_ = poles;
    g.matrix_ = ComplexMatrix::diagonal(std::move(poles));
    g.finish(1.0);
    if (theta) {
        g.finish(*theta);
    } else {
        g.finish(fit_decay(g).theta_hat);
    }
    return g;
}

inline void GeneratorSpec::finish(double theta) {
    if (!(theta > 0.5)) throw DecayViolation("decay exponent must exceed 1/2");
    K_.clear();
    for (const auto& l : spectrum_)
        if (std::abs(l.real()) <= axis_tolerance) K_.push_back(l.imag());
    std::sort(K_.begin(), K_.end());
    K_.erase(std::unique(K_.begin(), K_.end(), [](double x, double y) { return std::abs(x - y) <= axis_tolerance; }),
             K_.end());
    a_ = 1.0;
    for (double k : K_) a_ = std::max(a_, std::abs(k) + 1.0);
    theta_ = theta;
    delta_ = std::clamp(std::min(theta, 1.0 - delta_margin), 0.5 + delta_margin, 1.0 - delta_margin);

    // eta: probe grid plus the points nearest each pole.
    std::vector<double> pts = default_probe();
    for (const auto& l : spectrum_)
        if (std::abs(l.imag()) >= a_) pts.push_back(l.imag());
    eta_ = 0.0;
    for (double t : pts) {
        if (distance_to_K(t) < hit_tolerance) continue;
        eta_ = std::max(eta_, std::pow(std::abs(t), delta_) * linalg::operator_norm(resolvent(*this, t)));
    }
    if (!(eta_ > 0.0)) eta_ = 1.0;
}

} // namespace greensolve::gen
