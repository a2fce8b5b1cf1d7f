#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "bouquet/errors.hpp"

namespace bouquet {

using cplx = std::complex<double>;

// Dense complex matrix sized for fibers and structure groups at desk scale
// (a handful of rows).  Row-major storage, value semantics throughout.
class CMatrix {
  public:
    CMatrix() = default;
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {
        if (rows < 0 || cols < 0) throw DimensionError("CMatrix: negative shape");
    }

    static CMatrix identity(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    cplx& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
    const cplx& operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }

    CMatrix& operator+=(const CMatrix& o) {
        require_same_shape(o, "operator+=");
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    CMatrix& operator-=(const CMatrix& o) {
        require_same_shape(o, "operator-=");
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    CMatrix& operator*=(const cplx& s) {
        for (auto& v : a_) v *= s;
        return *this;
    }

    friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
    friend CMatrix operator*(CMatrix a, const cplx& s) { return a *= s; }
    friend CMatrix operator*(const cplx& s, CMatrix a) { return a *= s; }

    friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
        if (a.cols_ != b.rows_) throw DimensionError("CMatrix: product shape mismatch");
        CMatrix r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx(0.0)) continue;
                for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    friend CMatrix operator-(CMatrix a) {
        for (auto& v : a.a_) v = -v;
        return a;
    }

    cplx trace() const {
        if (rows_ != cols_) throw DimensionError("CMatrix::trace: not square");
        cplx t = 0.0;
        for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    bool is_zero() const {
        for (const auto& v : a_)
            if (v != cplx(0.0)) return false;
        return true;
    }

    bool same_shape(const CMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    // Gauss-Jordan with partial pivoting; shapes here never exceed a few rows.
    CMatrix inverse() const {
        if (rows_ != cols_) throw DimensionError("CMatrix::inverse: not square");
        const int n = rows_;
        CMatrix a(*this), inv = identity(n);
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
            if (std::abs(a(piv, col)) < 1e-14)
                throw NumericError("CMatrix::inverse: numerically singular matrix");
            if (piv != col) {
                for (int c = 0; c < n; ++c) {
                    std::swap(a(piv, c), a(col, c));
                    std::swap(inv(piv, c), inv(col, c));
                }
            }
            const cplx d = a(col, col);
            for (int c = 0; c < n; ++c) {
                a(col, c) /= d;
                inv(col, c) /= d;
            }
            for (int r = 0; r < n; ++r) {
                if (r == col) continue;
                const cplx f = a(r, col);
                if (f == cplx(0.0)) continue;
                for (int c = 0; c < n; ++c) {
                    a(r, c) -= f * a(col, c);
                    inv(r, c) -= f * inv(col, c);
                }
            }
        }
        return inv;
    }

  private:
    void require_same_shape(const CMatrix& o, const char* op) const {
        if (!same_shape(o)) throw DimensionError(std::string("CMatrix: shape mismatch in ") + op);
    }

    int rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    return (a - b).max_abs();
}

// Scaling-and-squaring Taylor exponential.  The scaled norm is kept below
// 1/2, where the truncated series reaches ~1e-15 relative accuracy.
inline CMatrix matrix_exp(const CMatrix& x, double tol = 1e-15) {
    if (x.rows() != x.cols()) throw DimensionError("matrix_exp: not square");
    const int n = x.rows();
    int squarings = 0;
    double norm = x.max_abs();
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    CMatrix xs = x * cplx(std::ldexp(1.0, -squarings));
    CMatrix result = CMatrix::identity(n);
    CMatrix term = CMatrix::identity(n);
    for (int k = 1; k <= 64; ++k) {
        term = term * xs;
        term *= cplx(1.0 / k);
        result += term;
        if (term.max_abs() < tol * std::max(1.0, result.max_abs())) break;
        if (k == 64) throw NumericError("matrix_exp: series did not converge");
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

} // namespace bouquet
