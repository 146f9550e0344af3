#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace bnmimo::linalg {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Dense complex matrix, row-major, value semantics.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows);
    static ComplexMatrix column_vector(std::span<const cplx> v);
    static ComplexMatrix diagonal(std::span<const double> d, std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return entries_.empty(); }

    cplx& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    std::span<const cplx> entries() const { return entries_; }
    std::span<cplx> entries() { return entries_; }

    ComplexMatrix adjoint() const;
    CVector column(std::size_t j) const;
    /// Columns [first, first + count).
    ComplexMatrix columns(std::size_t first, std::size_t count) const;
    /// Keeps the columns listed in `idx`, in that order.
    ComplexMatrix select_columns(std::span<const std::size_t> idx) const;
    void set_column(std::size_t j, std::span<const cplx> v);

    bool all_finite() const;
    double frobenius_norm() const;

    ComplexMatrix& operator*=(cplx s);
    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> entries_;
};

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx s, ComplexMatrix m);
ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);

/// y = M x.
CVector apply(const ComplexMatrix& m, std::span<const cplx> x);
/// y = M^H x.
CVector apply_adjoint(const ComplexMatrix& m, std::span<const cplx> x);
/// a^H b
cplx inner(std::span<const cplx> a, std::span<const cplx> b);
double norm2_squared(std::span<const cplx> v);

ComplexMatrix hstack(const ComplexMatrix& a, const ComplexMatrix& b);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
/// max_ij |(A^H A - I)_ij|
double gram_deviation(const ComplexMatrix& a);

struct SvdResult {
    ComplexMatrix u;           // rows x rows, unitary
    std::vector<double> sigma; // min(rows, cols) values, descending
    ComplexMatrix v;           // cols x cols, unitary
};

// One-sided Jacobi. The largest-modulus entry of every column of V is real
// and non-negative; U absorbs the compensating phase. Requires rows >= cols.
SvdResult svd(const ComplexMatrix& h);

struct QrResult {
    ComplexMatrix q;
    ComplexMatrix r;
};

// Householder QR. diag(R) is real and non-negative. `qr` returns the thin
// factorization (Q: m x n, R: n x n), `qr_full` the square one (Q: m x m).
QrResult qr(const ComplexMatrix& a);
QrResult qr_full(const ComplexMatrix& a);

// Orthonormal basis of the complement of span(vk), from the QR of [vk I]:
// standard basis vectors are projected off span(vk) in index order, and
// those nearly inside the current span are skipped. Each column has a
// positive real component along the basis vector it came from.
ComplexMatrix orthonormal_complement(const ComplexMatrix& vk);

// Cholesky solve of M x = b for Hermitian positive-definite M.
CVector hermitian_solve(const ComplexMatrix& m, std::span<const cplx> b);

/// Reusable Cholesky factor of a Hermitian positive-definite matrix.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const ComplexMatrix& m);
    CVector solve(std::span<const cplx> b) const;
    double smallest_pivot() const { return smallest_pivot_; }

private:
    ComplexMatrix l_;
    double smallest_pivot_ = 0.0;
};

namespace detail {
enum class ComplementFault { none, flip_entry_sign };
// Test hook used by the self-test's negative control.
ComplexMatrix orthonormal_complement(const ComplexMatrix& vk, ComplementFault fault);
} // namespace detail

} // namespace bnmimo::linalg
