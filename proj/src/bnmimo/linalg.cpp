#include "bnmimo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bnmimo/errors.hpp"

namespace bnmimo::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxJacobiSweeps = 80;
constexpr double kHermitianTol = 1e-10;
constexpr double kOrthonormalTol = 1e-8;

void require_finite(const ComplexMatrix& m, const char* who) {
    if (m.empty()) throw ValidationError(std::string(who) + ": empty matrix");
    if (!m.all_finite()) throw ValidationError(std::string(who) + ": non-finite entry in input");
}

cplx unit_phase(cplx z) {
    const double a = std::abs(z);
    return a > 0.0 ? z / a : cplx{1.0, 0.0};
}

std::size_t largest_modulus_row(const ComplexMatrix& m, std::size_t col) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double a = std::abs(m(i, col));
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

} // namespace

// ---------------------------------------------------------------------------
// ComplexMatrix

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, cplx{}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows * cols) {
        throw ValidationError("ComplexMatrix: entry count does not match rows x cols");
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<cplx> e;
    e.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ValidationError("ComplexMatrix::from_rows: ragged rows");
        e.insert(e.end(), row.begin(), row.end());
    }
    return ComplexMatrix(r, c, std::move(e));
}

ComplexMatrix ComplexMatrix::column_vector(std::span<const cplx> v) {
    return ComplexMatrix(v.size(), 1, std::vector<cplx>(v.begin(), v.end()));
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> d, std::size_t rows, std::size_t cols) {
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < d.size() && i < rows && i < cols; ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
    return t;
}

CVector ComplexMatrix::column(std::size_t j) const {
    CVector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

ComplexMatrix ComplexMatrix::columns(std::size_t first, std::size_t count) const {
    if (first + count > cols_) throw ValidationError("ComplexMatrix::columns: range out of bounds");
    ComplexMatrix m(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < count; ++j) m(i, j) = (*this)(i, first + j);
    return m;
}

ComplexMatrix ComplexMatrix::select_columns(std::span<const std::size_t> idx) const {
    ComplexMatrix m(rows_, idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= cols_) throw ValidationError("ComplexMatrix::select_columns: index out of bounds");
        for (std::size_t i = 0; i < rows_; ++i) m(i, j) = (*this)(i, idx[j]);
    }
    return m;
}

void ComplexMatrix::set_column(std::size_t j, std::span<const cplx> v) {
    if (v.size() != rows_ || j >= cols_) throw ValidationError("ComplexMatrix::set_column: shape mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

bool ComplexMatrix::all_finite() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

double ComplexMatrix::frobenius_norm() const {
    return std::sqrt(norm2_squared(entries_));
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
    for (auto& z : entries_) z *= s;
    return *this;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw ValidationError("ComplexMatrix +=: shape mismatch");
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw ValidationError("ComplexMatrix -=: shape mismatch");
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw ValidationError("matrix product: inner dimensions differ");
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

ComplexMatrix operator*(cplx s, ComplexMatrix m) {
    m *= s;
    return m;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) {
    a += b;
    return a;
}

ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) {
    a -= b;
    return a;
}

CVector apply(const ComplexMatrix& m, std::span<const cplx> x) {
    if (x.size() != m.cols()) throw ValidationError("apply: vector length differs from column count");
    CVector y(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        cplx acc{};
        for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

CVector apply_adjoint(const ComplexMatrix& m, std::span<const cplx> x) {
    if (x.size() != m.rows()) throw ValidationError("apply_adjoint: vector length differs from row count");
    CVector y(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) y[j] += std::conj(m(i, j)) * x[i];
    return y;
}

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    cplx acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2_squared(std::span<const cplx> v) {
    double acc = 0.0;
    for (const cplx z : v) acc += std::norm(z);
    return acc;
}

ComplexMatrix hstack(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows()) throw ValidationError("hstack: row counts differ");
    ComplexMatrix m(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) m(i, a.cols() + j) = b(i, j);
    }
    return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("max_abs_diff: shape mismatch");
    double d = 0.0;
    for (std::size_t k = 0; k < a.entries().size(); ++k) d = std::max(d, std::abs(a.entries()[k] - b.entries()[k]));
    return d;
}

double gram_deviation(const ComplexMatrix& a) {
    double d = 0.0;
    for (std::size_t p = 0; p < a.cols(); ++p)
        for (std::size_t q = 0; q < a.cols(); ++q) {
            cplx g{};
            for (std::size_t i = 0; i < a.rows(); ++i) g += std::conj(a(i, p)) * a(i, q);
            if (p == q) g -= 1.0;
            d = std::max(d, std::abs(g));
        }
    return d;
}

// ---------------------------------------------------------------------------
// QR

QrResult qr_full(const ComplexMatrix& a) {
    require_finite(a, "qr");
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m < n) throw ValidationError("qr: requires rows >= cols");

    ComplexMatrix r = a;
    ComplexMatrix q = ComplexMatrix::identity(m);
    CVector v(m);

    for (std::size_t k = 0; k < n; ++k) {
        double xnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) xnorm2 += std::norm(r(i, k));
        const double xnorm = std::sqrt(xnorm2);
        if (xnorm == 0.0) continue; // rank deficient column, R(k,k) = 0

        const cplx alpha = -unit_phase(r(k, k)) * xnorm;
        for (std::size_t i = k; i < m; ++i) v[i] = r(i, k);
        v[k] -= alpha;
        const double vnorm2 = norm2_squared(std::span<const cplx>(v).subspan(k, m - k));
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;

        // R <- (I - beta v v^H) R on rows k.., cols k..
        for (std::size_t j = k; j < n; ++j) {
            cplx s{};
            for (std::size_t i = k; i < m; ++i) s += std::conj(v[i]) * r(i, j);
            s *= beta;
            for (std::size_t i = k; i < m; ++i) r(i, j) -= v[i] * s;
        }
        // Q <- Q (I - beta v v^H) on cols k..
        for (std::size_t i = 0; i < m; ++i) {
            cplx s{};
            for (std::size_t l = k; l < m; ++l) s += q(i, l) * v[l];
            s *= beta;
            for (std::size_t l = k; l < m; ++l) q(i, l) -= s * std::conj(v[l]);
        }
        for (std::size_t i = k + 1; i < m; ++i) r(i, k) = 0.0;
    }

    for (std::size_t k = 0; k < n; ++k) {
        const cplx d = r(k, k);
        if (std::abs(d) == 0.0) continue;
        const cplx ph = unit_phase(d);
        for (std::size_t j = k; j < n; ++j) r(k, j) *= std::conj(ph);
        r(k, k) = std::abs(d);
        for (std::size_t i = 0; i < m; ++i) q(i, k) *= ph;
    }
    return {std::move(q), std::move(r)};
}

QrResult qr(const ComplexMatrix& a) {
    QrResult full = qr_full(a);
    const std::size_t n = a.cols();
    ComplexMatrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = full.r(i, j);
    return {full.q.columns(0, n), std::move(r)};
}

// ---------------------------------------------------------------------------
// Orthonormal complement

namespace detail {

ComplexMatrix orthonormal_complement(const ComplexMatrix& vk, ComplementFault fault) {
    require_finite(vk, "orthonormal_complement");
    const std::size_t nt = vk.rows();
    const std::size_t k = vk.cols();
    if (k < 1 || k >= nt) throw ValidationError("orthonormal_complement: requires 1 <= k < rows");
    const double dev = gram_deviation(vk);
    if (dev > kOrthonormalTol) {
        std::ostringstream os;
        os << "orthonormal_complement: input columns are not orthonormal (Gram deviation " << dev << ")";
        throw ValidationError(os.str());
    }

    // Gram-Schmidt of e_1, e_2, ... against [vk, accepted columns], i.e. the
    // QR of [vk I]. A basis vector too close to the current span is skipped;
    // one with residual^2 >= 1/(2 nt) always exists because the residuals of
    // all nt basis vectors sum to the remaining dimension.
    std::vector<CVector> basis;
    for (std::size_t j = 0; j < k; ++j) basis.push_back(vk.column(j));
    ComplexMatrix phi(nt, nt - k);
    std::vector<bool> used(nt, false);
    const double accept = 0.5 / static_cast<double>(nt);
    for (std::size_t out = 0; out < nt - k; ++out) {
        bool found = false;
        for (std::size_t e = 0; e < nt && !found; ++e) {
            if (used[e]) continue;
            CVector r(nt, cplx(0.0));
            r[e] = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (const CVector& b : basis) {
                    const cplx c = inner(b, r);
                    for (std::size_t i = 0; i < nt; ++i) r[i] -= c * b[i];
                }
            const double n2 = norm2_squared(r);
            if (n2 < accept) continue;
            const double inv = 1.0 / std::sqrt(n2);
            for (auto& z : r) z *= inv;
            used[e] = true;
            phi.set_column(out, r);
            basis.push_back(std::move(r));
            found = true;
        }
        if (!found) throw NumericalError("orthonormal_complement: no admissible basis vector left");
    }

    if (fault == ComplementFault::flip_entry_sign) {
        const std::size_t row = largest_modulus_row(phi, 0);
        phi(row, 0) = -phi(row, 0);
    }
    return phi;
}

} // namespace detail

ComplexMatrix orthonormal_complement(const ComplexMatrix& vk) {
    return detail::orthonormal_complement(vk, detail::ComplementFault::none);
}

// ---------------------------------------------------------------------------
// SVD

SvdResult svd(const ComplexMatrix& h) {
    require_finite(h, "svd");
    const std::size_t m = h.rows();
    const std::size_t n = h.cols();
    if (m < n) throw ValidationError("svd: requires rows >= cols");

    ComplexMatrix a = h;
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double tol = kEps * static_cast<double>(m);

    int sweep = 0;
    for (bool rotated = true; rotated; ++sweep) {
        if (sweep >= kMaxJacobiSweeps) {
            double smax = 0.0;
            double smin = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                const double s = std::sqrt(norm2_squared(a.column(j)));
                smax = std::max(smax, s);
                smin = std::min(smin, s);
            }
            std::ostringstream os;
            os << "svd: no convergence after " << kMaxJacobiSweeps << " Jacobi sweeps ("
               << m << "x" << n << ", Frobenius norm " << h.frobenius_norm()
               << ", column-norm condition estimate " << (smin > 0 ? smax / smin : INFINITY) << ")";
            throw NumericalError(os.str());
        }
        rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0;
                double beta = 0.0;
                cplx gamma{};
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += std::norm(a(i, p));
                    beta += std::norm(a(i, q));
                    gamma += std::conj(a(i, p)) * a(i, q);
                }
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;

                const cplx ph = gamma / g;
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const cplx sph = s * std::conj(ph);

                for (std::size_t i = 0; i < m; ++i) {
                    const cplx ap = a(i, p);
                    const cplx aq = a(i, q);
                    a(i, p) = c * ap - sph * aq;
                    a(i, q) = s * ap + c * std::conj(ph) * aq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx vp = v(i, p);
                    const cplx vq = v(i, q);
                    v(i, p) = c * vp - sph * vq;
                    v(i, q) = s * vp + c * std::conj(ph) * vq;
                }
            }
        }
    }

    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(norm2_squared(a.column(j)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    SvdResult out;
    out.v = v.select_columns(order);
    ComplexMatrix w = a.select_columns(order);
    out.sigma.resize(n);
    for (std::size_t j = 0; j < n; ++j) out.sigma[j] = norms[order[j]];

    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t row = largest_modulus_row(out.v, j);
        const cplx ph = std::conj(unit_phase(out.v(row, j)));
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) *= ph;
        out.v(row, j) = std::abs(out.v(row, j));
        for (std::size_t i = 0; i < m; ++i) w(i, j) *= ph;
    }

    // H V = W has orthogonal columns; its QR gives an exactly unitary U whose
    // leading columns are w_j / sigma_j.
    out.u = qr_full(w).q;
    return out;
}

// ---------------------------------------------------------------------------
// Hermitian solve

CholeskyFactor::CholeskyFactor(const ComplexMatrix& m) : l_(m.rows(), m.cols()) {
    require_finite(m, "hermitian_solve");
    const std::size_t n = m.rows();
    if (m.cols() != n) throw ValidationError("hermitian_solve: matrix is not square");
    double scale = 0.0;
    for (const cplx z : m.entries()) scale = std::max(scale, std::abs(z));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            if (std::abs(m(i, j) - std::conj(m(j, i))) > kHermitianTol * std::max(1.0, scale))
                throw ValidationError("hermitian_solve: matrix is not Hermitian");

    smallest_pivot_ = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l_(j, k));
        smallest_pivot_ = std::min(smallest_pivot_, d);
        if (!(d > kEps * scale * static_cast<double>(n))) {
            std::ostringstream os;
            os << "hermitian_solve: matrix is not positive definite (pivot " << j << " = " << d
               << ", matrix scale " << scale << ")";
            throw NumericalError(os.str());
        }
        const double ljj = std::sqrt(d);
        l_(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * std::conj(l_(j, k));
            l_(i, j) = s / ljj;
        }
    }
}

CVector CholeskyFactor::solve(std::span<const cplx> b) const {
    const std::size_t n = l_.rows();
    if (b.size() != n) throw ValidationError("hermitian_solve: right-hand side length mismatch");
    CVector y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        cplx s = y[i];
        for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
        y[i] = s / l_(i, i).real();
    }
    for (std::size_t ii = n; ii-- > 0;) {
        cplx s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l_(k, ii)) * y[k];
        y[ii] = s / l_(ii, ii).real();
    }
    return y;
}

CVector hermitian_solve(const ComplexMatrix& m, std::span<const cplx> b) {
    return CholeskyFactor(m).solve(b);
}

} // namespace bnmimo::linalg
