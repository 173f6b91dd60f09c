// Cyclic Jacobi eigensolver for real symmetric matrices. Full spectrum with
// optional eigenvectors; convergence is declared when the off-diagonal
// Frobenius norm drops below tol_factor times the Frobenius norm of the
// input. Dependency-free and robust at desk scale (N up to ~2048).
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lsicert/matrix.hpp"

namespace lsicert {

struct JacobiOptions {
    double tol_factor = 1e-10;  // off-diagonal target, relative to ||A||_F
    int max_sweeps = 100;
    bool with_vectors = true;
};

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    Matrix vectors;              // row i is the eigenvector of values[i]
    int sweeps = 0;
    double off_norm = 0.0;       // off-diagonal Frobenius norm at termination
    bool has_vectors = false;
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
    int n = a.rows();
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
}

// One two-sided rotation in the (p, q) plane, annihilating a(p, q).
// Updates rows/columns of `a` and, when given, rows p and q of `w`
// (w accumulates the transposed eigenvector matrix, rows = eigenvectors).
inline void rotate(Matrix& a, Matrix* w, int p, int q) {
    const int n = a.rows();
    const double apq = a(p, q);
    if (apq == 0.0) return;

    const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
    double t;
    if (std::abs(theta) > 1e150) {
        t = 0.5 / theta;  // avoids theta^2 overflow
    } else {
        t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
    }
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;
    const double tau = s / (1.0 + c);
    const double h = t * apq;

    const double app = a(p, p), aqq = a(q, q);
    a(p, p) = app - h;
    a(q, q) = aqq + h;
    a(p, q) = 0.0;
    a(q, p) = 0.0;

    double* rp = a.row(p);
    double* rq = a.row(q);
    for (int k = 0; k < n; ++k) {
        if (k == p || k == q) continue;
        const double g = rp[k], f = rq[k];
        rp[k] = g - s * (f + g * tau);
        rq[k] = f + s * (g - f * tau);
    }
    for (int k = 0; k < n; ++k) {
        if (k == p || k == q) continue;
        a(k, p) = rp[k];
        a(k, q) = rq[k];
    }

    if (w) {
        double* wp = w->row(p);
        double* wq = w->row(q);
        for (int k = 0; k < n; ++k) {
            const double g = wp[k], f = wq[k];
            wp[k] = g - s * (f + g * tau);
            wq[k] = f + s * (g - f * tau);
        }
    }
}

}  // namespace detail

inline EigenDecomposition jacobi_eigen(Matrix a, const JacobiOptions& opt = {}) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("jacobi_eigen: matrix must be square");
    const int n = a.rows();

    EigenDecomposition out;
    out.has_vectors = opt.with_vectors;
    Matrix w;
    if (opt.with_vectors) w = Matrix::identity(n);
    Matrix* wp = opt.with_vectors ? &w : nullptr;

    if (n == 0) return out;
    if (n == 1) {
        out.values = {a(0, 0)};
        if (opt.with_vectors) out.vectors = std::move(w);
        return out;
    }

    const double target = opt.tol_factor * a.frobenius_norm();
    double off = detail::off_diagonal_norm(a);

    int sweep = 0;
    while (off > target && off > 0.0) {
        if (sweep >= opt.max_sweeps)
            throw std::runtime_error(
                "jacobi_eigen: iteration budget exhausted after " +
                std::to_string(opt.max_sweeps) + " sweeps (off-diagonal norm " +
                std::to_string(off) + ", target " + std::to_string(target) + ")");
        // classical threshold schedule: skip small elements in early sweeps
        const double thresh =
            (sweep < 3) ? 0.2 * off * off / (double(n) * n) : 0.0;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) * std::abs(a(p, q)) > thresh)
                    detail::rotate(a, wp, p, q);
        ++sweep;
        off = detail::off_diagonal_norm(a);
    }
    out.sweeps = sweep;
    out.off_norm = off;

    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = a(i, i);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return out.values[i] < out.values[j]; });
    std::vector<double> sorted(n);
    for (int i = 0; i < n; ++i) sorted[i] = out.values[order[i]];
    out.values = std::move(sorted);

    if (opt.with_vectors) {
        out.vectors = Matrix(n);
        for (int i = 0; i < n; ++i) {
            const double* src = w.row(order[i]);
            double* dst = out.vectors.row(i);
            std::copy(src, src + n, dst);
        }
    }
    return out;
}

// max_i || A v_i - lambda_i v_i ||_2 over the given eigenpair indices
inline double eigenpair_residual(const Matrix& a, const EigenDecomposition& d,
                                 const std::vector<int>& indices) {
    double worst = 0.0;
    const int n = a.rows();
    std::vector<double> av(n);
    for (int idx : indices) {
        const double* v = d.vectors.row(idx);
        for (int i = 0; i < n; ++i) {
            const double* r = a.row(i);
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += r[j] * v[j];
            av[i] = s;
        }
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            double diff = av[i] - d.values[idx] * v[i];
            s += diff * diff;
        }
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

}  // namespace lsicert
