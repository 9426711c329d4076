#pragma once

// Dense complex linear algebra for the small operators (n <= 64) this library
// works with. A ComplexMatrix may carry diagonal storage, which keeps the
// diagonal resolvent families (hundreds of poles) cheap; arithmetic between two
// diagonal matrices stays diagonal and anything else falls back to dense.

#include "greensolve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace greensolve::linalg {

using cplx = std::complex<double>;

inline constexpr double singular_tolerance = 1e-14;

class ComplexVector {
public:
    ComplexVector() = default;
    explicit ComplexVector(std::size_t n, cplx value = {}) : data_(n, value) {}
    ComplexVector(std::initializer_list<cplx> values) : data_(values) {}
    explicit ComplexVector(std::vector<cplx> values) : data_(std::move(values)) {}

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    cplx* data() noexcept { return data_.data(); }
    const cplx* data() const noexcept { return data_.data(); }
    std::span<cplx> span() noexcept { return data_; }
    std::span<const cplx> span() const noexcept { return data_; }
    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    /// Euclidean norm.
    double norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool is_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](cplx v) {
            return std::isfinite(v.real()) && std::isfinite(v.imag());
        });
    }

    ComplexVector& operator+=(const ComplexVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    ComplexVector& operator-=(const ComplexVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    ComplexVector& operator*=(cplx s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend ComplexVector operator+(ComplexVector a, const ComplexVector& b) { return a += b; }
    friend ComplexVector operator-(ComplexVector a, const ComplexVector& b) { return a -= b; }
    friend ComplexVector operator*(cplx s, ComplexVector a) { return a *= s; }
    friend ComplexVector operator*(ComplexVector a, cplx s) { return a *= s; }
    friend bool operator==(const ComplexVector&, const ComplexVector&) = default;

private:
    void check_same(const ComplexVector& o) const {
        if (o.size() != size()) throw DimensionMismatch("vector sizes differ");
    }
    std::vector<cplx> data_;
};

class ComplexMatrix {
public:
    enum class Storage { dense, diagonal };

    ComplexMatrix() = default;
    /// Dense zero matrix.
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}
    /// Dense matrix from row-major entries.
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> row_major)
        : rows_(rows), cols_(cols), data_(std::move(row_major)) {
        if (data_.size() != rows * cols) throw DimensionMismatch("entry count does not match shape");
    }
    /// Dense matrix from nested rows, e.g. {{1, 1}, {0, 2}}.
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionMismatch("ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix identity(std::size_t n) { return diagonal(std::vector<cplx>(n, 1.0)); }
    static ComplexMatrix zeros(std::size_t n) { return diagonal(std::vector<cplx>(n, 0.0)); }
    static ComplexMatrix diagonal(std::vector<cplx> entries) {
        ComplexMatrix m;
        m.rows_ = m.cols_ = entries.size();
        m.storage_ = Storage::diagonal;
        m.data_ = std::move(entries);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    bool is_diagonal() const noexcept { return storage_ == Storage::diagonal; }
    Storage storage() const noexcept { return storage_; }

    /// Raw storage: n entries for diagonal storage, rows*cols row-major otherwise.
    std::span<const cplx> raw() const noexcept { return data_; }
    std::span<cplx> raw() noexcept { return data_; }

    cplx operator()(std::size_t i, std::size_t j) const {
        if (storage_ == Storage::diagonal) return i == j ? data_[i] : cplx{};
        return data_[i * cols_ + j];
    }
    /// Mutable access; switches diagonal storage to dense when writing off the diagonal.
    cplx& operator()(std::size_t i, std::size_t j) {
        if (storage_ == Storage::diagonal) {
            if (i == j) return data_[i];
            densify();
        }
        return data_[i * cols_ + j];
    }

    ComplexMatrix dense() const {
        if (storage_ == Storage::dense) return *this;
        ComplexMatrix d(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i) d.data_[i * cols_ + i] = data_[i];
        return d;
    }
    void densify() {
        if (storage_ == Storage::diagonal) *this = dense();
    }

    std::vector<cplx> diagonal_entries() const {
        std::vector<cplx> d(std::min(rows_, cols_));
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
        return d;
    }

    bool is_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](cplx v) {
            return std::isfinite(v.real()) && std::isfinite(v.imag());
        });
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Maximum absolute row sum.
    double inf_norm() const {
        if (storage_ == Storage::diagonal) return max_abs();
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += std::abs(data_[i * cols_ + j]);
            m = std::max(m, s);
        }
        return m;
    }

    ComplexMatrix adjoint() const {
        if (storage_ == Storage::diagonal) {
            ComplexMatrix r = *this;
            for (auto& v : r.data_) v = std::conj(v);
            return r;
        }
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r.data_[j * rows_ + i] = std::conj(data_[i * cols_ + j]);
        return r;
    }

    ComplexMatrix& operator*=(cplx s) {
        for (auto& v : data_) v *= s;
        return *this;
    }
    ComplexMatrix& operator+=(const ComplexMatrix& o) { return add_scaled(1.0, o); }
    ComplexMatrix& operator-=(const ComplexMatrix& o) { return add_scaled(-1.0, o); }

    /// this += alpha * o, keeping diagonal storage when both operands have it.
    ComplexMatrix& add_scaled(cplx alpha, const ComplexMatrix& o) {
        if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionMismatch("matrix shapes differ");
        if (storage_ == o.storage_) {
            for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * o.data_[i];
        } else if (o.storage_ == Storage::diagonal) {
            for (std::size_t i = 0; i < rows_; ++i) data_[i * cols_ + i] += alpha * o.data_[i];
        } else {
            densify();
            for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * o.data_[i];
        }
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw DimensionMismatch("inner dimensions differ");
        if (a.is_diagonal() && b.is_diagonal()) {
            ComplexMatrix r = a;
            for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] *= b.data_[i];
            return r;
        }
        if (a.is_diagonal()) {
            ComplexMatrix r = b;
            for (std::size_t i = 0; i < r.rows_; ++i)
                for (std::size_t j = 0; j < r.cols_; ++j) r.data_[i * r.cols_ + j] *= a.data_[i];
            return r;
        }
        if (b.is_diagonal()) {
            ComplexMatrix r = a;
            for (std::size_t i = 0; i < r.rows_; ++i)
                for (std::size_t j = 0; j < r.cols_; ++j) r.data_[i * r.cols_ + j] *= b.data_[j];
            return r;
        }
        ComplexMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a.data_[i * a.cols_ + k];
                if (aik == cplx{}) continue;
                const cplx* brow = &b.data_[k * b.cols_];
                cplx* rrow = &r.data_[i * r.cols_];
                for (std::size_t j = 0; j < b.cols_; ++j) rrow[j] += aik * brow[j];
            }
        return r;
    }

    friend ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x) {
        if (a.cols_ != x.size()) throw DimensionMismatch("matrix-vector dimensions differ");
        ComplexVector y(a.rows_);
        if (a.is_diagonal()) {
            for (std::size_t i = 0; i < a.rows_; ++i) y[i] = a.data_[i] * x[i];
            return y;
        }
        for (std::size_t i = 0; i < a.rows_; ++i) {
            cplx s{};
            for (std::size_t j = 0; j < a.cols_; ++j) s += a.data_[i * a.cols_ + j] * x[j];
            y[i] = s;
        }
        return y;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Storage storage_ = Storage::dense;
    std::vector<cplx> data_;
};

/// Max-abs entry distance, a cheap closeness check used by tests.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).max_abs();
}

namespace detail {

inline void require_square(const ComplexMatrix& a, const char* what) {
    if (!a.is_square() || a.rows() == 0) throw DimensionMismatch(std::string(what) + ": matrix must be square");
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.
inline std::vector<double> hermitian_eigenvalues(ComplexMatrix h) {
    h.densify();
    const std::size_t n = h.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                total += std::norm(h(i, j));
                if (i != j) off += std::norm(h(i, j));
            }
        if (off <= 1e-30 * total || off == 0.0) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx hpq = h(p, q);
                const double apq = std::abs(hpq);
                if (apq == 0.0) continue;
                const double app = h(p, p).real();
                const double aqq = h(q, q).real();
                // Unitary diagonal similarity making h(p, q) real and positive.
                const cplx phase = hpq / apq;
                for (std::size_t k = 0; k < n; ++k) h(k, q) *= std::conj(phase);
                for (std::size_t k = 0; k < n; ++k) h(q, k) *= phase;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx hkp = h(k, p), hkq = h(k, q);
                    h(k, p) = c * hkp - s * hkq;
                    h(k, q) = s * hkp + c * hkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx hpk = h(p, k), hqk = h(q, k);
                    h(p, k) = c * hpk - s * hqk;
                    h(q, k) = s * hpk + c * hqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = h(i, i).real();
    return ev;
}

struct LuFactors {
    ComplexMatrix lu;
    std::vector<std::size_t> perm;
    double min_pivot = std::numeric_limits<double>::infinity();
};

/// LU with partial pivoting. Pivots below `floor` are replaced by `floor`
/// (inverse iteration wants that); `solve` checks min_pivot itself.
inline LuFactors lu_factor(const ComplexMatrix& a, double floor = 0.0) {
    LuFactors f{a.dense(), std::vector<std::size_t>(a.rows()), std::numeric_limits<double>::infinity()};
    const std::size_t n = a.rows();
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    auto& m = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > best) best = std::abs(m(i, k)), piv = i;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
        }
        f.min_pivot = std::min(f.min_pivot, best);
        if (best <= floor) m(k, k) = floor > 0 ? cplx(floor, 0.0) : m(k, k);
        const cplx pivot = m(k, k);
        if (pivot == cplx{}) continue;
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx l = m(i, k) / pivot;
            m(i, k) = l;
            if (l == cplx{}) continue;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
        }
    }
    return f;
}

inline void lu_solve_inplace(const LuFactors& f, std::span<cplx> x_in, std::vector<cplx>& work) {
    const std::size_t n = f.perm.size();
    const auto& m = f.lu;
    work.assign(n, cplx{});
    for (std::size_t i = 0; i < n; ++i) work[i] = x_in[f.perm[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) work[i] -= m(i, j) * work[j];
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t j = ii + 1; j < n; ++j) work[ii] -= m(ii, j) * work[j];
        work[ii] /= m(ii, ii);
    }
    std::copy(work.begin(), work.end(), x_in.begin());
}

} // namespace detail

/// Spectral norm (largest singular value). Power iteration on A^H A with a
/// Jacobi fallback when the iteration stalls on a tight singular-value gap.
inline double operator_norm(const ComplexMatrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    if (a.is_diagonal()) return a.max_abs();
    const double scale = a.max_abs();
    if (scale == 0.0) return 0.0;
    if (a.rows() == 1 || a.cols() == 1) {
        double s = 0.0;
        for (auto v : a.raw()) s += std::norm(v);
        return std::sqrt(s);
    }
    const ComplexMatrix b = a.adjoint() * a;
    const std::size_t n = b.rows();
    ComplexVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = cplx(1.0 + 0.37 * static_cast<double>(i), 0.11 * static_cast<double>(i % 3));
    v *= 1.0 / v.norm();
    double mu = 0.0;
    for (int it = 0; it < 2000; ++it) {
        ComplexVector w = b * v;
        double next = 0.0;
        for (std::size_t i = 0; i < n; ++i) next += (std::conj(v[i]) * w[i]).real();
        const double wn = w.norm();
        if (wn == 0.0) break;
        w *= 1.0 / wn;
        v = std::move(w);
        if (it > 2 && std::abs(next - mu) <= 1e-15 * std::abs(next)) return std::sqrt(std::max(next, 0.0));
        mu = next;
    }
    const auto ev = detail::hermitian_eigenvalues(b);
    return std::sqrt(std::max(0.0, *std::max_element(ev.begin(), ev.end())));
}

/// Solves A X = B by LU with partial pivoting.
inline ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b) {
    detail::require_square(a, "solve");
    if (b.rows() != a.rows()) throw DimensionMismatch("solve: right-hand side rows differ");
    const double scale = a.inf_norm();
    if (a.is_diagonal()) {
        ComplexMatrix x = b;
        const auto d = a.raw();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (std::abs(d[i]) < singular_tolerance * scale || d[i] == cplx{})
                throw SingularMatrix("solve: zero pivot on diagonal");
        if (x.is_diagonal()) {
            for (std::size_t i = 0; i < d.size(); ++i) x.raw()[i] /= d[i];
        } else {
            for (std::size_t i = 0; i < x.rows(); ++i)
                for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) /= d[i];
        }
        return x;
    }
    const auto f = detail::lu_factor(a);
    if (!(f.min_pivot >= singular_tolerance * scale) || f.min_pivot == 0.0)
        throw SingularMatrix("solve: pivot magnitude below 1e-14 * ||A||");
    ComplexMatrix x = b.dense();
    const std::size_t n = a.rows();
    std::vector<cplx> col(n), work;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) col[i] = x(i, j);
        detail::lu_solve_inplace(f, col, work);
        for (std::size_t i = 0; i < n; ++i) x(i, j) = col[i];
    }
    return x;
}

inline ComplexMatrix inverse(const ComplexMatrix& a) {
    return solve(a, ComplexMatrix::identity(a.rows()));
}

struct EigenPair {
    cplx value;
    ComplexVector vector; ///< unit 2-norm
    double residual;      ///< ||(A - value I) vector||
};

namespace detail {

/// Eigenvalues of a dense matrix: Householder reduction to Hessenberg form,
/// then single-shift complex QR with Wilkinson shifts and deflation.
inline std::vector<cplx> hessenberg_qr_eigenvalues(ComplexMatrix h) {
    h.densify();
    const std::size_t n = h.rows();
    const double norm = std::max(h.inf_norm(), std::numeric_limits<double>::min());

    for (std::size_t k = 0; k + 2 < n; ++k) {
        std::vector<cplx> v(n - k - 1);
        double xnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) v[i - k - 1] = h(i, k), xnorm += std::norm(h(i, k));
        xnorm = std::sqrt(xnorm);
        if (xnorm == 0.0) continue;
        const cplx phase = std::abs(v[0]) > 0 ? v[0] / std::abs(v[0]) : cplx(1.0);
        v[0] += phase * xnorm;
        double vn = 0.0;
        for (auto& c : v) vn += std::norm(c);
        vn = std::sqrt(vn);
        if (vn == 0.0) continue;
        for (auto& c : v) c /= vn;
        for (std::size_t j = 0; j < n; ++j) {
            cplx s{};
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i - k - 1]) * h(i, j);
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= 2.0 * v[i - k - 1] * s;
        }
        for (std::size_t i = 0; i < n; ++i) {
            cplx s{};
            for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j - k - 1];
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= 2.0 * s * std::conj(v[j - k - 1]);
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }

    std::vector<cplx> eig(n);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
    int iter = 0;
    int total = 0;
    std::vector<double> cs(n);
    std::vector<cplx> sn(n);
    while (hi >= 0) {
        if (hi == 0) {
            eig[0] = h(0, 0);
            --hi;
            continue;
        }
        std::ptrdiff_t l = hi;
        while (l > 0) {
            double s = std::abs(h(l, l)) + std::abs(h(l - 1, l - 1));
            if (s == 0.0) s = norm;
            if (std::abs(h(l, l - 1)) <= eps * s) {
                h(l, l - 1) = 0.0;
                break;
            }
            --l;
        }
        if (l == hi) {
            eig[hi] = h(hi, hi);
            --hi;
            iter = 0;
            continue;
        }
        ++iter;
        if (++total > 100 * static_cast<int>(n) + 100)
            throw NoConvergence("eigenvalues: QR iteration exceeded its budget");

        cplx mu;
        if (iter % 11 == 0) {
            mu = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1));
        } else {
            const cplx a = h(hi - 1, hi - 1), b = h(hi - 1, hi), c = h(hi, hi - 1), d = h(hi, hi);
            const cplx half = 0.5 * (a - d);
            const cplx disc = std::sqrt(half * half + b * c);
            const cplx m1 = 0.5 * (a + d) + disc, m2 = 0.5 * (a + d) - disc;
            mu = std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
        }
        for (std::ptrdiff_t k = l; k <= hi; ++k) h(k, k) -= mu;
        for (std::ptrdiff_t k = l; k < hi; ++k) {
            const cplx x = h(k, k), y = h(k + 1, k);
            const double r = std::hypot(std::abs(x), std::abs(y));
            double c;
            cplx s;
            if (r == 0.0) {
                c = 1.0, s = 0.0;
            } else if (std::abs(x) == 0.0) {
                c = 0.0, s = std::conj(y) / std::abs(y);
            } else {
                c = std::abs(x) / r;
                s = (x / std::abs(x)) * std::conj(y) / r;
            }
            cs[k] = c, sn[k] = s;
            for (std::ptrdiff_t j = k; j <= hi; ++j) {
                const cplx h1 = h(k, j), h2 = h(k + 1, j);
                h(k, j) = c * h1 + s * h2;
                h(k + 1, j) = -std::conj(s) * h1 + c * h2;
            }
        }
        for (std::ptrdiff_t k = l; k < hi; ++k) {
            const double c = cs[k];
            const cplx s = sn[k];
            const std::ptrdiff_t last = std::min(k + 2, hi);
            for (std::ptrdiff_t i = l; i <= last; ++i) {
                const cplx h1 = h(i, k), h2 = h(i, k + 1);
                h(i, k) = c * h1 + std::conj(s) * h2;
                h(i, k + 1) = -s * h1 + c * h2;
            }
        }
        for (std::ptrdiff_t k = l; k <= hi; ++k) h(k, k) += mu;
    }
    return eig;
}

inline EigenPair refine_eigenvector(const ComplexMatrix& a, cplx lambda, double norm) {
    const std::size_t n = a.rows();
    ComplexMatrix shifted = a.dense();
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= lambda;
    const auto f = lu_factor(shifted, 1e-14 * std::max(norm, 1e-300));
    EigenPair best{lambda, ComplexVector(n), std::numeric_limits<double>::infinity()};
    std::vector<cplx> work;
    for (int start = 0; start < 3; ++start) {
        ComplexVector v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = cplx(1.0 + 0.5 * std::sin(1.3 * static_cast<double>(i + 1) * (start + 1)),
                        0.25 * std::cos(0.7 * static_cast<double>(i) + start));
        v *= 1.0 / v.norm();
        for (int it = 0; it < 4; ++it) {
            lu_solve_inplace(f, v.span(), work);
            const double vn = v.norm();
            if (!(vn > 0.0) || !std::isfinite(vn)) break;
            v *= 1.0 / vn;
        }
        if (!v.is_finite() || v.norm() == 0.0) continue;
        const double res = (a * v - lambda * v).norm();
        if (res < best.residual) best = {lambda, v, res};
        if (res <= 1e-10 * std::max(norm, 1e-300)) break;
    }
    return best;
}

} // namespace detail

/// Eigenvalues paired with unit eigenvectors refined by inverse iteration.
inline std::vector<EigenPair> eigen_pairs(const ComplexMatrix& a) {
    detail::require_square(a, "eigen_pairs");
    if (!a.is_finite()) throw NoConvergence("eigen_pairs: non-finite input");
    const std::size_t n = a.rows();
    std::vector<EigenPair> out;
    out.reserve(n);
    if (a.is_diagonal()) {
        const auto d = a.raw();
        for (std::size_t i = 0; i < n; ++i) {
            ComplexVector e(n);
            e[i] = 1.0;
            out.push_back({d[i], std::move(e), 0.0});
        }
        return out;
    }
    const double norm = operator_norm(a);
    for (cplx lambda : detail::hessenberg_qr_eigenvalues(a)) {
        auto p = detail::refine_eigenvector(a, lambda, norm);
        if (!(p.residual <= 1e-8 * std::max(norm, 1e-300)) && norm > 0.0)
            throw NoConvergence("eigen_pairs: inverse iteration did not reach the residual target");
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<cplx> eigenvalues(const ComplexMatrix& a) {
    detail::require_square(a, "eigenvalues");
    if (a.is_diagonal()) return a.diagonal_entries();
    if (!a.is_finite()) throw NoConvergence("eigenvalues: non-finite input");
    return detail::hessenberg_qr_eigenvalues(a);
}

/// e^{tA} by scaling and squaring with the diagonal (6,6) Pade approximant.
inline ComplexMatrix matrix_exponential(const ComplexMatrix& a, double t) {
    detail::require_square(a, "matrix_exponential");
    if (!std::isfinite(t)) throw Overflow("matrix_exponential: non-finite time");
    const std::size_t n = a.rows();
    if (a.is_diagonal()) {
        std::vector<cplx> d(a.raw().begin(), a.raw().end());
        for (auto& v : d) v = std::exp(t * v);
        ComplexMatrix r = ComplexMatrix::diagonal(std::move(d));
        if (!r.is_finite()) throw Overflow("matrix_exponential: result not representable");
        return r;
    }
    ComplexMatrix x = t * a.dense();
    const double nrm = x.inf_norm();
    if (!std::isfinite(nrm)) throw Overflow("matrix_exponential: ||tA|| not representable");
    int squarings = 0;
    if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    if (squarings > 1020) throw Overflow("matrix_exponential: ||tA|| too large");
    x *= std::ldexp(1.0, -squarings);

    constexpr int q = 6;
    double c = 0.5;
    ComplexMatrix numer = ComplexMatrix::identity(n).dense();
    ComplexMatrix denom = numer;
    numer.add_scaled(c, x);
    denom.add_scaled(-c, x);
    ComplexMatrix power = x;
    for (int k = 2; k <= q; ++k) {
        c = c * static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
        power = x * power;
        numer.add_scaled(c, power);
        denom.add_scaled((k % 2 == 0) ? c : -c, power);
    }
    ComplexMatrix e = solve(denom, numer);
    for (int s = 0; s < squarings; ++s) e = e * e;
    if (!e.is_finite()) throw Overflow("matrix_exponential: result not representable");
    return e;
}

} // namespace greensolve::linalg
