#pragma once

#include "greensolve/linalg.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

using greensolve::linalg::ComplexMatrix;
using greensolve::linalg::ComplexVector;
using greensolve::linalg::cplx;

inline constexpr std::uint64_t default_seed = 20240917;

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, 1.0);
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = scale * cplx(d(rng), d(rng));
    return m;
}

inline ComplexVector random_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    ComplexVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = cplx(d(rng), d(rng));
    return v;
}

/// P D P^-1 with |Re d_j| in [0.5, 2] (mixed signs) and P a mild perturbation of I.
inline ComplexMatrix random_gapped_matrix(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> re(0.5, 2.0), im(-3.0, 3.0), sign(0.0, 1.0);
    std::vector<cplx> d(n);
    for (auto& v : d) v = cplx(sign(rng) < 0.5 ? -re(rng) : re(rng), im(rng));
    const ComplexMatrix p = ComplexMatrix::identity(n) + random_matrix(rng, n, 0.25);
    ComplexMatrix dm(n, n);
    for (std::size_t i = 0; i < n; ++i) dm(i, i) = d[i];
    return p * dm * greensolve::linalg::inverse(p);
}

} // namespace testsupport
