#pragma once

// Independent reference computations used only by the tests. None of these
// share code with the library's numerical kernels.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "bnmimo/linalg.hpp"

namespace oracle {

using bnmimo::linalg::ComplexMatrix;
using bnmimo::linalg::cplx;

// Determinant by LU with partial pivoting.
inline cplx determinant(ComplexMatrix a) {
    const std::size_t n = a.rows();
    cplx det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (a(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
            det = -det;
        }
        det *= a(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            const cplx f = a(r, c) / a(c, c);
            for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
        }
    }
    return det;
}

// Inverse by Gauss-Jordan elimination.
inline ComplexMatrix inverse(ComplexMatrix a) {
    const std::size_t n = a.rows();
    ComplexMatrix inv = ComplexMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a(c, j), a(piv, j));
            std::swap(inv(c, j), inv(piv, j));
        }
        const cplx d = 1.0 / a(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            a(c, j) *= d;
            inv(c, j) *= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const cplx f = a(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

// log2 det(I + s * A A^H)
inline double log2_det_gram(const ComplexMatrix& a, double s) {
    ComplexMatrix m = ComplexMatrix::identity(a.rows());
    const ComplexMatrix g = a * a.adjoint();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) += s * g(i, j);
    return std::log2(std::abs(determinant(m)));
}

// Water level by bisection on sum max(0, mu - n/l_i) = P.
inline std::vector<double> waterfill_bisection(const std::vector<double>& sigma, double power, double noise) {
    double lo = 0.0, hi = power + noise / (sigma.back() * sigma.back()) + 1e6;
    for (int it = 0; it < 300; ++it) {
        const double mu = 0.5 * (lo + hi);
        double s = 0.0;
        for (double g : sigma) s += std::max(0.0, mu - noise / (g * g));
        (s > power ? hi : lo) = mu;
    }
    const double mu = 0.5 * (lo + hi);
    std::vector<double> p;
    for (double g : sigma) p.push_back(std::max(0.0, mu - noise / (g * g)));
    return p;
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    ComplexMatrix m(r, c);
    for (auto& z : m.entries()) z = {n(rng), n(rng)};
    return m;
}

inline double max_abs(const ComplexMatrix& m) {
    double w = 0.0;
    for (const auto& z : m.entries()) w = std::max(w, std::abs(z));
    return w;
}

} // namespace oracle
