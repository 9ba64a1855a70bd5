#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "treealg/rational.hpp"

namespace treealg {

// Dense matrix over an arbitrary commutative coefficient ring. Entries that
// need construction context (RatFunc over n variables, TruncTensor over a
// partition) are handled by passing a zero prototype.
template <class T>
class Matrix {
public:
    Matrix() = default;

    Matrix(int rows, int cols, const T& zero)
        : rows_(rows), cols_(cols), zero_(zero), data_(static_cast<size_t>(rows) * cols, zero)
    {
    }

    static Matrix identity(int n, const T& zero, const T& one)
    {
        Matrix m(n, n, zero);
        for (int i = 0; i < n; ++i)
            m(i, i) = one;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const T& zero_proto() const { return zero_; }

    T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    bool is_zero() const
    {
        for (const auto& v : data_)
            if (!(v == zero_))
                return false;
        return true;
    }

    friend bool operator==(const Matrix& a, const Matrix& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend Matrix operator+(const Matrix& a, const Matrix& b)
    {
        check_same_shape(a, b);
        Matrix r = a;
        for (size_t k = 0; k < r.data_.size(); ++k)
            r.data_[k] = r.data_[k] + b.data_[k];
        return r;
    }

    friend Matrix operator-(const Matrix& a, const Matrix& b)
    {
        check_same_shape(a, b);
        Matrix r = a;
        for (size_t k = 0; k < r.data_.size(); ++k)
            r.data_[k] = r.data_[k] - b.data_[k];
        return r;
    }

    Matrix operator-() const
    {
        Matrix r = *this;
        for (auto& v : r.data_)
            v = -v;
        return r;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        if (a.cols_ != b.rows_)
            throw input_error("matrix shape mismatch in product");
        Matrix r(a.rows_, b.cols_, a.zero_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (aik == a.zero_)
                    continue; // sparse rows are common for Casimir insertions
                for (int j = 0; j < b.cols_; ++j) {
                    const T& bkj = b(k, j);
                    if (bkj == b.zero_)
                        continue;
                    r(i, j) = r(i, j) + aik * bkj;
                }
            }
        return r;
    }

    Matrix scaled(const T& c) const
    {
        Matrix r = *this;
        for (auto& v : r.data_)
            v = v * c;
        return r;
    }

    Matrix transposed() const
    {
        Matrix r(cols_, rows_, zero_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                r(j, i) = (*this)(i, j);
        return r;
    }

    T trace() const
    {
        if (rows_ != cols_)
            throw input_error("trace of a non-square matrix");
        T t = zero_;
        for (int i = 0; i < rows_; ++i)
            t = t + (*this)(i, i);
        return t;
    }

    template <class U>
    Matrix<U> map(const U& zero, const std::function<U(const T&)>& fn) const
    {
        Matrix<U> r(rows_, cols_, zero);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                r(i, j) = fn((*this)(i, j));
        return r;
    }

    friend Matrix kron(const Matrix& a, const Matrix& b)
    {
        Matrix r(a.rows_ * b.rows_, a.cols_ * b.cols_, a.zero_);
        for (int i = 0; i < a.rows_; ++i)
            for (int j = 0; j < a.cols_; ++j)
                for (int p = 0; p < b.rows_; ++p)
                    for (int q = 0; q < b.cols_; ++q)
                        r(i * b.rows_ + p, j * b.cols_ + q) = a(i, j) * b(p, q);
        return r;
    }

private:
    int rows_ = 0, cols_ = 0;
    T zero_{};
    std::vector<T> data_;

    static void check_same_shape(const Matrix& a, const Matrix& b)
    {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw input_error("matrix shape mismatch");
    }
};

using QMatrix = Matrix<Rational>;

inline QMatrix qmat(int rows, int cols) { return QMatrix(rows, cols, Rational(0)); }

inline QMatrix qeye(int n) { return QMatrix::identity(n, Rational(0), Rational(1)); }

// ---------------------------------------------------------------------------
// Exact linear algebra over the rationals.
// ---------------------------------------------------------------------------

// Reduced row echelon form in place; returns pivot columns.
inline std::vector<int> rref(QMatrix& m)
{
    std::vector<int> pivots;
    int r = 0;
    for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
        int pivot = -1;
        for (int i = r; i < m.rows(); ++i)
            if (m(i, c) != 0) {
                pivot = i;
                break;
            }
        if (pivot < 0)
            continue;
        if (pivot != r)
            for (int j = 0; j < m.cols(); ++j)
                std::swap(m(pivot, j), m(r, j));
        Rational inv = 1 / m(r, c);
        for (int j = 0; j < m.cols(); ++j)
            m(r, j) *= inv;
        for (int i = 0; i < m.rows(); ++i) {
            if (i == r || m(i, c) == 0)
                continue;
            Rational f = m(i, c);
            for (int j = 0; j < m.cols(); ++j)
                m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

// Basis of the right kernel {x : A x = 0}.
inline std::vector<std::vector<Rational>> kernel_basis(QMatrix a)
{
    std::vector<int> pivots = rref(a);
    std::vector<bool> is_pivot(a.cols(), false);
    for (int c : pivots)
        is_pivot[c] = true;
    std::vector<std::vector<Rational>> basis;
    for (int c = 0; c < a.cols(); ++c) {
        if (is_pivot[c])
            continue;
        std::vector<Rational> v(a.cols(), Rational(0));
        v[c] = 1;
        for (size_t r = 0; r < pivots.size(); ++r)
            v[pivots[r]] = -a(static_cast<int>(r), c);
        basis.push_back(std::move(v));
    }
    return basis;
}

// Solves A x = b exactly; nothing when inconsistent. For underdetermined
// systems returns the solution with free variables set to zero.
inline std::optional<std::vector<Rational>> solve(const QMatrix& a, const std::vector<Rational>& b)
{
    if (static_cast<int>(b.size()) != a.rows())
        throw input_error("solve: dimension mismatch");
    QMatrix aug(a.rows(), a.cols() + 1, Rational(0));
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j)
            aug(i, j) = a(i, j);
        aug(i, a.cols()) = b[i];
    }
    std::vector<int> pivots = rref(aug);
    if (!pivots.empty() && pivots.back() == a.cols())
        return std::nullopt; // pivot in the augmented column
    std::vector<Rational> x(a.cols(), Rational(0));
    for (size_t r = 0; r < pivots.size(); ++r)
        x[pivots[r]] = aug(static_cast<int>(r), a.cols());
    return x;
}

inline std::optional<QMatrix> field_inverse(const QMatrix& a)
{
    if (a.rows() != a.cols())
        throw input_error("inverse of a non-square matrix");
    int n = a.rows();
    QMatrix aug(n, 2 * n, Rational(0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            aug(i, j) = a(i, j);
        aug(i, n + i) = 1;
    }
    std::vector<int> pivots = rref(aug);
    if (static_cast<int>(pivots.size()) < n || pivots[n - 1] != n - 1)
        return std::nullopt;
    QMatrix inv = qmat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inv(i, j) = aug(i, n + j);
    return inv;
}

inline int rank(QMatrix a) { return static_cast<int>(rref(a).size()); }

// ---------------------------------------------------------------------------
// Faddeev-LeVerrier characteristic polynomial over any commutative
// Q-algebra: only divisions by integers occur, which are exact. Returns
// coefficients c_0..c_n with det(xI - A) = sum c_k x^{n-k} (c_0 = 1), and
// the matrix M_{n-1} with A^{-1} = -M_{n-1} / c_n when c_n is invertible.
// ---------------------------------------------------------------------------

template <class T>
struct CharPolyResult {
    std::vector<T> coeffs; // c_0 = 1, ..., c_n; det(A) = (-1)^n c_n
    Matrix<T> m_n;         // A * m_n = -c_n * I (Cayley-Hamilton)
};

template <class T>
CharPolyResult<T> faddeev_leverrier(const Matrix<T>& a, const T& zero, const T& one,
                                    const std::function<T(const T&, long)>& div_int)
{
    if (a.rows() != a.cols())
        throw input_error("characteristic polynomial of a non-square matrix");
    int n = a.rows();
    Matrix<T> m = Matrix<T>::identity(n, zero, one);
    std::vector<T> coeffs{one};
    Matrix<T> m_n = m;
    for (int k = 1; k <= n; ++k) {
        if (k == n)
            m_n = m;
        Matrix<T> am = a * m;
        T c = div_int(-am.trace(), k);
        coeffs.push_back(c);
        m = am;
        for (int i = 0; i < n; ++i)
            m(i, i) = m(i, i) + c;
    }
    return {std::move(coeffs), std::move(m_n)};
}

} // namespace treealg
