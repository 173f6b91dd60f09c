// Dense row-major matrix, sized for desk-scale spectral work (N <= a few
// thousand). Just the operations the library needs; no expression templates.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsicert {

class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols),
          a_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0)
            throw std::invalid_argument("Matrix: negative dimension");
    }
    explicit Matrix(int n, double fill = 0.0) : Matrix(n, n, fill) {}

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

    double* row(int i) { return a_.data() + std::size_t(i) * cols_; }
    const double* row(int i) const { return a_.data() + std::size_t(i) * cols_; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    bool is_symmetric() const {  // exact, bit-level
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }

    bool all_finite() const {
        for (double v : a_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

    // max_i sum_j |a_ij|
    double row_sup_norm() const {
        double best = 0.0;
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    std::vector<double> multiply(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != cols_)
            throw std::invalid_argument("Matrix::multiply: size mismatch");
        std::vector<double> y(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            const double* r = row(i);
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += r[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_)
            throw std::invalid_argument("Matrix::operator*: size mismatch");
        Matrix out(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                const double* ok = o.row(k);
                double* oi = out.row(i);
                for (int j = 0; j < o.cols_; ++j) oi[j] += aik * ok[j];
            }
        return out;
    }

    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o, "+=");
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o, "-=");
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Matrix& operator*=(double t) {
        for (double& v : a_) v *= t;
        return *this;
    }
    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double t) { return a *= t; }
    friend Matrix operator*(double t, Matrix a) { return a *= t; }

    // A + t*I in place
    void add_diagonal(double t) {
        for (int i = 0; i < rows_ && i < cols_; ++i) (*this)(i, i) += t;
    }

private:
    void check_same_shape(const Matrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument(std::string("Matrix::") + op +
                                        ": shape mismatch");
    }

    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

// Cholesky factor L (lower) of a symmetric positive definite matrix.
inline Matrix cholesky(const Matrix& a) {
    int n = a.rows();
    Matrix l(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0)
                    throw std::domain_error(
                        "cholesky: matrix is not positive definite (pivot " +
                        std::to_string(s) + " at index " + std::to_string(i) + ")");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

// Inverse of a symmetric positive definite matrix via its Cholesky factor.
inline Matrix spd_inverse(const Matrix& a) {
    int n = a.rows();
    Matrix l = cholesky(a);
    Matrix inv(n);
    std::vector<double> e(n), y(n);
    for (int col = 0; col < n; ++col) {
        std::fill(e.begin(), e.end(), 0.0);
        e[col] = 1.0;
        // forward solve L y = e
        for (int i = 0; i < n; ++i) {
            double s = e[i];
            for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i);
        }
        // backward solve L^T x = y
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int k = i + 1; k < n; ++k) s -= l(k, i) * inv(k, col);
            inv(i, col) = s / l(i, i);
        }
    }
    // symmetrize the rounding dust so downstream exact-symmetry checks hold
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = inv(j, i) = v;
        }
    return inv;
}

}  // namespace lsicert
