// Single-spin measures: uniform on the sphere S^{n-1} (n = 1, 2, 3) or a
// general bounded measure on [-R, R] given by a density table. Tilted
// measures mu^h ~ e^{h.sigma} mu are evaluated in the frame aligned with h,
// where by rotational symmetry the covariance is diagonal with one
// longitudinal and (n-1) equal transverse entries.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsicert/jacobi.hpp"
#include "lsicert/matrix.hpp"
#include "lsicert/quadrature.hpp"

namespace lsicert {

enum class MeasureKind { Sphere, GeneralBounded };

inline const char* to_string(MeasureKind k) {
    return k == MeasureKind::Sphere ? "sphere" : "general-bounded";
}

struct SingleSpinModel {
    int n = 1;
    MeasureKind measure_kind = MeasureKind::Sphere;
    std::optional<double> gamma_lsi;
    // For n = 1 spheres the table is {+1, -1} with equal weight; for n = 2 it
    // holds angles on the circle, for n = 3 values of cos(theta), and for
    // general-bounded the support points themselves. Weights always sum to 1
    // (mu is normalized internally; total-mass conventions cancel in mu^h).
    QuadratureRule table;
    double radius = 1.0;

    double field_cutoff() const { return 700.0 / radius; }
};

inline SingleSpinModel sphere_model(int n) {
    SingleSpinModel m;
    m.n = n;
    m.measure_kind = MeasureKind::Sphere;
    m.radius = 1.0;
    switch (n) {
        case 1:
            m.table.nodes = {1.0, -1.0};
            m.table.weights = {0.5, 0.5};
            break;
        case 2: {
            m.table = periodic_trapezoid(128);
            for (double& w : m.table.weights) w /= 2.0 * std::numbers::pi;
            break;
        }
        case 3: {
            m.table = gauss_legendre(64);
            for (double& w : m.table.weights) w /= 2.0;
            break;
        }
        default:
            throw std::invalid_argument(
                "sphere_model: spin dimension must be 1, 2, or 3");
    }
    return m;
}

inline SingleSpinModel general_bounded_model(double radius,
                                             std::vector<double> nodes,
                                             std::vector<double> weights,
                                             double gamma) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("general_bounded_model: bad radius");
    if (nodes.empty() || nodes.size() != weights.size())
        throw std::invalid_argument(
            "general_bounded_model: nodes/weights size mismatch");
    if (!(gamma > 0.0))
        throw std::invalid_argument("general_bounded_model: gamma must be > 0");
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!std::isfinite(nodes[i]) || std::abs(nodes[i]) > radius * (1 + 1e-12))
            throw std::invalid_argument(
                "general_bounded_model: node outside [-R, R]");
        if (!(weights[i] > 0.0))
            throw std::invalid_argument(
                "general_bounded_model: weights must be positive");
        total += weights[i];
    }
    for (double& w : weights) w /= total;
    SingleSpinModel m;
    m.n = 1;
    m.measure_kind = MeasureKind::GeneralBounded;
    m.gamma_lsi = gamma;
    m.radius = radius;
    m.table.nodes = std::move(nodes);
    m.table.weights = std::move(weights);
    return m;
}

// Standard field grid for the variance and hessian checks: magnitudes from
// 0 through the flat regime across a small direction set spanning the sphere.
inline std::vector<std::vector<double>> standard_field_grid(int n) {
    if (n < 1) throw std::invalid_argument("standard_field_grid: n < 1");
    const double mags[] = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
    std::vector<std::vector<double>> dirs;
    if (n == 1) {
        dirs = {{1.0}, {-1.0}};
    } else {
        const double s = 1.0 / std::sqrt(2.0);
        std::vector<double> d1(std::size_t(n), 0.0);
        d1[0] = 1.0;
        std::vector<double> d2(std::size_t(n), 0.0);
        d2[0] = s;
        d2[std::size_t(n) - 1] = s;
        std::vector<double> d3(std::size_t(n), 0.0);
        d3[0] = 0.6;
        d3[1] = -0.8;
        dirs = {d1, d2, d3};
    }
    std::vector<std::vector<double>> grid;
    for (double r : mags)
        for (const auto& d : dirs) {
            std::vector<double> h(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) h[std::size_t(i)] = r * d[std::size_t(i)];
            grid.push_back(std::move(h));
        }
    return grid;
}

// The Ising single-spin LSI constant is gamma = 4 (the two-point measure
// satisfies ent(F^2) <= (1/2) |F(+) - F(-)|^2). No literature value is baked
// in for n >= 2: the caller must supply one.
inline double single_spin_lsi_default(int n,
                                      std::optional<double> configured = {}) {
    if (configured) {
        if (!(*configured > 0.0))
            throw std::invalid_argument("single-spin gamma must be > 0");
        return *configured;
    }
    if (n == 1) return 4.0;
    throw std::invalid_argument(
        "no default single-spin LSI constant available for n = " +
        std::to_string(n) + "; supply gamma explicitly");
}

struct TiltedMoments {
    std::vector<double> field;
    std::vector<double> mean;
    Matrix covariance;
    double log_partition = 0.0;
};

namespace detail {

struct RadialMoments {
    double log_z = 0.0;
    double mean_l = 0.0;    // longitudinal first moment
    double second_l = 0.0;  // longitudinal second moment
    double var_t = 0.0;     // per-direction transverse variance
};

// 1-D kinds (Ising sphere or general-bounded) take the signed scalar field:
// an asymmetric density table is not mirror-symmetric under h -> -h.
inline RadialMoments line_moments(const SingleSpinModel& m, double h) {
    double shift = -std::numeric_limits<double>::infinity();
    for (double x : m.table.nodes) shift = std::max(shift, h * x);
    double z = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < m.table.nodes.size(); ++i) {
        const double x = m.table.nodes[i];
        const double w = m.table.weights[i] * std::exp(h * x - shift);
        z += w;
        s1 += w * x;
        s2 += w * x * x;
    }
    RadialMoments r;
    r.log_z = shift + std::log(z);
    r.mean_l = s1 / z;
    r.second_l = s2 / z;
    r.var_t = 0.0;
    return r;
}

// Sphere kinds for n >= 2, reduced to the field magnitude r >= 0 along the
// longitudinal axis. Longitudinal coordinate is cos(theta); the exponential
// weight is shifted by its maximum r so nothing overflows.
inline RadialMoments sphere_moments(const SingleSpinModel& m, double r) {
    double z = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < m.table.nodes.size(); ++i) {
        const double t =
            m.n == 2 ? std::cos(m.table.nodes[i]) : m.table.nodes[i];
        const double w = m.table.weights[i] * std::exp(r * (t - 1.0));
        z += w;
        s1 += w * t;
        s2 += w * t * t;
    }
    RadialMoments out;
    out.log_z = r + std::log(z);
    out.mean_l = s1 / z;
    out.second_l = s2 / z;
    // E[sin^2 theta] split evenly over the n-1 transverse directions
    out.var_t = (1.0 - out.second_l) / (m.n - 1);
    return out;
}

}  // namespace detail

inline TiltedMoments tilted_moments(const SingleSpinModel& model,
                                    const std::vector<double>& h) {
    if (static_cast<int>(h.size()) != model.n)
        throw std::invalid_argument("tilted_moments: field dimension mismatch");
    double r2 = 0.0;
    for (double hi : h) {
        if (!std::isfinite(hi))
            throw std::invalid_argument("tilted_moments: non-finite field");
        r2 += hi * hi;
    }
    const double r = std::sqrt(r2);
    if (r > model.field_cutoff())
        throw std::domain_error(
            "tilted_moments: |h| exceeds the underflow cutoff " +
            std::to_string(model.field_cutoff()));

    TiltedMoments tm;
    tm.field = h;
    tm.mean.assign(model.n, 0.0);
    tm.covariance = Matrix(model.n);

    if (model.n == 1) {
        const auto rm = detail::line_moments(model, h[0]);
        tm.log_partition = rm.log_z;
        tm.mean[0] = rm.mean_l;
        tm.covariance(0, 0) = rm.second_l - rm.mean_l * rm.mean_l;
        return tm;
    }

    const auto rm = detail::sphere_moments(model, r);
    tm.log_partition = rm.log_z;
    std::vector<double> e(model.n, 0.0);
    if (r > 0.0)
        for (int i = 0; i < model.n; ++i) e[i] = h[i] / r;
    else
        e[0] = 1.0;
    const double var_l = rm.second_l - rm.mean_l * rm.mean_l;
    for (int i = 0; i < model.n; ++i) tm.mean[i] = rm.mean_l * e[i];
    for (int i = 0; i < model.n; ++i) {
        for (int j = 0; j < model.n; ++j)
            tm.covariance(i, j) = (var_l - rm.var_t) * e[i] * e[j];
        tm.covariance(i, i) += rm.var_t;
    }
    return tm;
}

// Max over the field grid and over unit directions x of var_{mu^h}(x.sigma);
// the directional maximum is the top eigenvalue of the covariance, which in
// the aligned frame is just max(longitudinal, transverse variance).
struct VarianceBoundReport {
    double max_directional_variance = 0.0;
    double bound = 0.0;
    bool pass = false;
};

inline VarianceBoundReport variance_bound_check(
    const SingleSpinModel& model, const std::vector<std::vector<double>>& h_grid,
    double tolerance = 1e-8) {
    if (h_grid.empty())
        throw std::invalid_argument("variance_bound_check: empty field grid");
    VarianceBoundReport rep;
    rep.bound = model.radius * model.radius / model.n;
    for (const auto& h : h_grid) {
        const TiltedMoments tm = tilted_moments(model, h);
        double top = tm.covariance(0, 0);
        if (model.n > 1) {
            JacobiOptions opt;
            opt.with_vectors = false;
            top = jacobi_eigen(tm.covariance, opt).values.back();
        }
        rep.max_directional_variance =
            std::max(rep.max_directional_variance, top);
    }
    rep.pass = rep.max_directional_variance <= rep.bound + tolerance;
    return rep;
}

}  // namespace lsicert
