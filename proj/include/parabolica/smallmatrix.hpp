#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "parabolica/error.hpp"
#include "parabolica/types.hpp"

namespace parabolica {

/// Dense complex matrix, sized for director blocks (<= 16 x 16).
class SmallMatrix {
public:
    SmallMatrix() = default;
    SmallMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, Complex(0.0)) {
        if (rows < 0 || cols < 0 || rows > 16 || cols > 16)
            fail(ErrorCode::BadInput, "SmallMatrix dimensions must be within 0..16");
    }

    static SmallMatrix identity(int n) {
        SmallMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static SmallMatrix diagonal(const CVec& d) {
        SmallMatrix m(int(d.size()), int(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = d[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Complex& operator()(int i, int j) { return a_[i * cols_ + j]; }
    Complex operator()(int i, int j) const { return a_[i * cols_ + j]; }

    SmallMatrix& operator+=(const SmallMatrix& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }

    SmallMatrix& operator-=(const SmallMatrix& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }

    SmallMatrix& operator*=(Complex s) {
        for (auto& x : a_) x *= s;
        return *this;
    }

    friend SmallMatrix operator+(SmallMatrix a, const SmallMatrix& b) { return a += b; }
    friend SmallMatrix operator-(SmallMatrix a, const SmallMatrix& b) { return a -= b; }
    friend SmallMatrix operator*(SmallMatrix a, Complex s) { return a *= s; }
    friend SmallMatrix operator*(Complex s, SmallMatrix a) { return a *= s; }

    friend SmallMatrix operator*(const SmallMatrix& a, const SmallMatrix& b) {
        if (a.cols_ != b.rows_) fail(ErrorCode::DimensionMismatch, "matrix product shapes");
        SmallMatrix r(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                Complex aik = a(i, k);
                if (aik == Complex(0.0)) continue;
                for (int j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    CVec apply(const CVec& v) const {
        if (int(v.size()) != cols_) fail(ErrorCode::DimensionMismatch, "matrix apply size");
        CVec w(rows_, 0.0);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) w[i] += (*this)(i, j) * v[j];
        return w;
    }

    Complex trace() const {
        Complex t = 0.0;
        for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double norm_inf() const {
        double best = 0.0;
        for (int i = 0; i < rows_; ++i) {
            double row = 0.0;
            for (int j = 0; j < cols_; ++j) row += std::abs((*this)(i, j));
            best = std::max(best, row);
        }
        return best;
    }

    double norm_fro() const {
        double s = 0.0;
        for (const auto& x : a_) s += std::norm(x);
        return std::sqrt(s);
    }

    double max_abs() const {
        double s = 0.0;
        for (const auto& x : a_) s = std::max(s, std::abs(x));
        return s;
    }

    /// Gaussian elimination with partial pivoting; returns det, X solves this*X = B.
    Complex solve(SmallMatrix B, SmallMatrix& X) const {
        if (rows_ != cols_) fail(ErrorCode::BadInput, "solve needs a square matrix");
        int n = rows_;
        SmallMatrix A(*this);
        Complex det = 1.0;
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(A(r, col)) > std::abs(A(piv, col))) piv = r;
            if (std::abs(A(piv, col)) == 0.0) return 0.0;
            if (piv != col) {
                for (int j = 0; j < n; ++j) std::swap(A(col, j), A(piv, j));
                for (int j = 0; j < B.cols(); ++j) std::swap(B(col, j), B(piv, j));
                det = -det;
            }
            det *= A(col, col);
            for (int r = col + 1; r < n; ++r) {
                Complex f = A(r, col) / A(col, col);
                if (f == Complex(0.0)) continue;
                for (int j = col; j < n; ++j) A(r, j) -= f * A(col, j);
                for (int j = 0; j < B.cols(); ++j) B(r, j) -= f * B(col, j);
            }
        }
        X = SmallMatrix(n, B.cols());
        for (int col = n - 1; col >= 0; --col)
            for (int j = 0; j < B.cols(); ++j) {
                Complex s = B(col, j);
                for (int r = col + 1; r < n; ++r) s -= A(col, r) * X(r, j);
                X(col, j) = s / A(col, col);
            }
        return det;
    }

    Complex determinant() const {
        SmallMatrix X;
        return solve(SmallMatrix(rows_, 0), X);
    }

    SmallMatrix inverse() const {
        SmallMatrix X;
        Complex det = solve(identity(rows_), X);
        if (det == Complex(0.0)) fail(ErrorCode::BadInput, "singular matrix");
        return X;
    }

    bool is_upper_triangular(double tol = 0.0) const {
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < i; ++j)
                if (std::abs((*this)(i, j)) > tol) return false;
        return true;
    }

private:
    int rows_ = 0, cols_ = 0;
    CVec a_;
};

/// Characteristic polynomial coefficients of det(tI - A), ascending in t,
/// by the Faddeev-LeVerrier recursion.
inline CVec characteristic_polynomial(const SmallMatrix& A) {
    int n = A.rows();
    CVec c(n + 1, 0.0);
    c[n] = 1.0;
    SmallMatrix M = SmallMatrix::identity(n);
    for (int m = 1; m <= n; ++m) {
        SmallMatrix AM = A * M;
        Complex cm = -AM.trace() / double(m);
        c[n - m] = cm;
        M = AM + cm * SmallMatrix::identity(n);
    }
    return c;
}

/// exp(A) by scaling and squaring with a truncated Taylor kernel; when A is
/// upper triangular with equal diagonal the nilpotent series is finite and
/// evaluated exactly.
inline SmallMatrix expm(const SmallMatrix& A) {
    int n = A.rows();
    if (n == 0) return SmallMatrix(0, 0);
    if (n == 1) {
        SmallMatrix r(1, 1);
        r(0, 0) = std::exp(A(0, 0));
        return r;
    }

    bool equal_diag = true;
    for (int i = 1; i < n && equal_diag; ++i)
        if (std::abs(A(i, i) - A(0, 0)) > 1e-14 * (1.0 + A.max_abs())) equal_diag = false;
    if (equal_diag && A.is_upper_triangular()) {
        Complex alpha = A(0, 0);
        SmallMatrix N = A - alpha * SmallMatrix::identity(n);
        SmallMatrix term = SmallMatrix::identity(n);
        SmallMatrix sum = term;
        for (int m = 1; m < n; ++m) {
            term = term * N;
            term *= Complex(1.0 / double(m));
            sum += term;
        }
        return std::exp(alpha) * sum;
    }

    double nrm = A.norm_inf();
    int s = 0;
    while (std::ldexp(0.5, s) < nrm && s < 60) ++s; // scale to norm <= 0.5
    SmallMatrix B = A;
    B *= Complex(std::ldexp(1.0, -s));
    SmallMatrix term = SmallMatrix::identity(n);
    SmallMatrix sum = term;
    for (int m = 1; m <= 24; ++m) {
        term = term * B;
        term *= Complex(1.0 / double(m));
        sum += term;
        if (term.max_abs() < 1e-20) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

/// Null-space basis of A (columns), using Gaussian elimination with a rank
/// tolerance relative to the largest entry.
inline std::vector<CVec> null_space(SmallMatrix A, double rel_tol = 1e-9) {
    int n = A.cols(), m = A.rows();
    double scale = std::max(A.max_abs(), 1e-300);
    std::vector<int> pivot_col;
    int row = 0;
    for (int col = 0; col < n && row < m; ++col) {
        int piv = row;
        for (int r = row + 1; r < m; ++r)
            if (std::abs(A(r, col)) > std::abs(A(piv, col))) piv = r;
        if (std::abs(A(piv, col)) <= rel_tol * scale) continue;
        if (piv != row)
            for (int j = 0; j < n; ++j) std::swap(A(row, j), A(piv, j));
        Complex d = A(row, col);
        for (int j = 0; j < n; ++j) A(row, j) /= d;
        for (int r = 0; r < m; ++r) {
            if (r == row) continue;
            Complex f = A(r, col);
            if (f == Complex(0.0)) continue;
            for (int j = 0; j < n; ++j) A(r, j) -= f * A(row, j);
        }
        pivot_col.push_back(col);
        ++row;
    }
    std::vector<CVec> basis;
    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col) is_pivot[c] = true;
    for (int freec = 0; freec < n; ++freec) {
        if (is_pivot[freec]) continue;
        CVec v(n, 0.0);
        v[freec] = 1.0;
        for (std::size_t r = 0; r < pivot_col.size(); ++r)
            v[pivot_col[r]] = -A(int(r), freec);
        double nv = norm2(v);
        for (auto& x : v) x /= nv;
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace parabolica
