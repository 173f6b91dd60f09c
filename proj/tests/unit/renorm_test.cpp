#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lsicert/quadrature.hpp"
#include "lsicert/renorm.hpp"

using namespace lsicert;
using Catch::Approx;

namespace {

CouplingMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = int(rows.size());
    CouplingMatrix m{n, Matrix(n), CouplingKind::File, {}};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.entries(i, j) = rows[i][j];
    return m;
}

CouplingMatrix random_admissible(int n, double c, Rng& rng) {
    Matrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = rng.uniform(-1.0, 1.0) / n;
            a(i, j) = v;
            a(j, i) = v;
        }
    CouplingMatrix m{n, a, CouplingKind::File, {}};
    // squeeze the spectrum into (0.1 c, 0.9 c)
    const auto s = spectrum(m, false);
    const double span = s.lambda_max - s.lambda_min;
    const double scale = 0.8 * c / std::max(span, 1e-12);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.entries(i, j) *= scale;
    m.entries.add_diagonal(0.1 * c - s.lambda_min * scale);
    return m;
}

}  // namespace

TEST_CASE("ising potential matches the closed form") {
    auto spin = sphere_model(1);
    for (double c : {0.5, 0.9, 2.0}) {
        for (double psi : {0.0, 0.3, -1.5, 4.0}) {
            const double expect =
                c * (1.0 + psi * psi) / 2.0 -
                (std::abs(c * psi) +
                 std::log1p(std::exp(-2.0 * std::abs(c * psi))) -
                 std::numbers::ln2);
            CHECK(renormalized_potential(spin, c, {psi}) ==
                  Approx(expect).margin(1e-12));
        }
    }
}

TEST_CASE("potential at the origin is c/2 for every sphere") {
    for (int n : {1, 2, 3}) {
        auto spin = sphere_model(n);
        std::vector<double> zero(n, 0.0);
        CHECK(renormalized_potential(spin, 0.8, zero) ==
              Approx(0.4).margin(1e-12));
    }
}

TEST_CASE("potential is even") {
    auto spin = sphere_model(3);
    CHECK(renormalized_potential(spin, 0.7, {0.4, -0.2, 1.0}) ==
          Approx(renormalized_potential(spin, 0.7, {-0.4, 0.2, -1.0}))
              .margin(1e-13));
}

TEST_CASE("general bounded measures are rejected by the renorm step") {
    auto gb = general_bounded_model(1.0, {-0.5, 0.5}, {0.5, 0.5}, 1.0);
    CHECK_THROWS_AS(renormalized_potential(gb, 0.5, {0.0}),
                    std::invalid_argument);
}

TEST_CASE("scalar covariance split") {
    auto spin = sphere_model(1);
    auto model = split_covariance(from_rows({{0.5}}), 1.0, spin);
    CHECK(model.b(0, 0) == Approx(1.0).margin(1e-12));
    CHECK(model.lambda_be == Approx(0.0).margin(1e-15));
    CHECK(model.roundtrip_error < 1e-8);
}

TEST_CASE("2x2 split matches hand-computed b eigenvalues") {
    auto spin = sphere_model(1);
    auto model =
        split_covariance(from_rows({{0.5, 0.2}, {0.2, 0.5}}), 1.0, spin);
    auto d = jacobi_eigen(model.b);
    CHECK(d.values[0] == Approx(3.0 / 7.0).margin(1e-10));
    CHECK(d.values[1] == Approx(7.0 / 3.0).margin(1e-10));
}

TEST_CASE("spectral round trip for random admissible matrices") {
    auto spin = sphere_model(1);
    Rng rng(substream(31, "split"));
    for (int n : {4, 16, 64}) {
        const double c = 0.95;
        auto m = random_admissible(n, c, rng);
        auto model = split_covariance(m, c, spin);
        auto mb = jacobi_eigen(model.b, {.with_vectors = false});
        REQUIRE(int(model.coupling_eigenvalues.size()) == n);
        for (int i = 0; i < n; ++i) {
            const double mi = model.coupling_eigenvalues[i];
            const double expect = c * mi / (c - mi);
            CHECK(mb.values[i] == Approx(expect).epsilon(1e-8));
        }
        CHECK(model.roundtrip_error < 1e-8);
    }
}

TEST_CASE("near-pole split succeeds and reports conditioning") {
    auto spin = sphere_model(1);
    const double c = 1.0, m = 1.0 - 1e-6;
    auto model = split_covariance(from_rows({{m}}), c, spin);
    CHECK(model.max_b_eigenvalue == Approx(c * m / (c - m)).epsilon(1e-6));
    CHECK(model.max_b_eigenvalue > 9e5);
}

TEST_CASE("split rejects inadmissible spectra") {
    auto spin = sphere_model(1);
    CHECK_THROWS_AS(split_covariance(from_rows({{-0.1}}), 1.0, spin),
                    std::domain_error);
    CHECK_THROWS_AS(split_covariance(from_rows({{1.2}}), 1.0, spin),
                    std::domain_error);
    CHECK_THROWS_AS(
        split_covariance(from_rows({{0.0, 0.3}, {0.3, 0.0}}), 1.0, spin),
        std::domain_error);  // eigenvalue -0.3
}

TEST_CASE("shift helper produces an admissible instance") {
    auto m = from_rows({{0.0, 0.6}, {0.6, 0.0}});
    auto shifted = shift_to_admissible(m);
    const auto s = spectrum(shifted.matrix, false);
    CHECK(s.lambda_min == Approx(shifted.delta).margin(1e-12));
    CHECK(s.lambda_max == Approx(shifted.span + shifted.delta).margin(1e-12));
    const double c = default_smoothing_scale(shifted);
    CHECK(s.lambda_max < c);
    auto spin = sphere_model(1);
    CHECK_NOTHROW(split_covariance(shifted.matrix, c, spin));
}

TEST_CASE("potential table interpolates the quadrature values") {
    for (int n : {2, 3}) {
        auto spin = sphere_model(n);
        const double c = 0.9 * n;
        auto table = build_potential_table(spin, c);
        Rng rng(substream(32, "table", n));
        for (int trial = 0; trial < 50; ++trial) {
            const double r = rng.uniform(0.0, 10.0);
            CHECK(table.evaluate(r) ==
                  Approx(renormalized_potential_radial(spin, c, r))
                      .margin(1e-7));
        }
        CHECK_THROWS_AS(table.evaluate(table.psi_max + 1.0),
                        std::domain_error);
    }
}

TEST_CASE("hessian bound for ising") {
    auto spin = sphere_model(1);
    for (double c : {0.5, 0.9}) {
        std::vector<std::vector<double>> grid;
        for (double p : {0.0, 0.2, 0.5, 1.0, 2.0, 5.0, -1.0})
            grid.push_back({p});
        auto rep = hessian_lower_bound_check(spin, c, grid);
        CHECK(rep.lambda_be == Approx(c - c * c));
        CHECK(rep.pass);
        CHECK(rep.max_fd_deviation < 1e-5);
        // psi = 0 attains the bound: Hess V(0) = c - c^2 var(sigma) = c - c^2
        CHECK(rep.min_eig_hess == Approx(c - c * c).margin(1e-9));
    }
}

TEST_CASE("hessian bound for the 2-sphere") {
    auto spin = sphere_model(3);
    const double c = 0.9 * 3;
    std::vector<std::vector<double>> grid = {
        {0.0, 0.0, 0.0}, {0.3, 0.0, 0.0}, {0.0, 0.5, -0.5},
        {1.0, 1.0, 1.0}, {0.0, 0.0, 3.0}};
    auto rep = hessian_lower_bound_check(spin, c, grid);
    CHECK(rep.lambda_be == Approx(c - c * c / 3.0));
    CHECK(rep.pass);
    CHECK(rep.max_fd_deviation < 1e-5);
    CHECK(rep.min_eig_hess == Approx(c - c * c / 3.0).margin(1e-8));
}

TEST_CASE("hessian flattens to c at strong tilts") {
    auto spin = sphere_model(1);
    const double c = 0.5;
    auto rep = hessian_lower_bound_check(spin, c, {{40.0}});
    CHECK(rep.min_eig_hess == Approx(c).margin(1e-6));
}

TEST_CASE("gaussian identity on the scalar example") {
    auto spin = sphere_model(1);
    auto rep = gaussian_identity_check(from_rows({{0.5}}), 1.0,
                                       {{0.0}, {1.0}, {-2.0}, {0.7}}, spin);
    CHECK(rep.pass);
    CHECK(rep.max_log_ratio_deviation < 1e-12);
}

TEST_CASE("gaussian identity on random 3x3 instances") {
    auto spin = sphere_model(1);
    Rng rng(substream(33, "gauss-id"));
    for (int trial = 0; trial < 5; ++trial) {
        const double c = 1.0;
        auto m = random_admissible(3, c, rng);
        std::vector<std::vector<double>> sigmas;
        for (int s = 0; s < 20; ++s)
            sigmas.push_back(
                {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
        auto rep = gaussian_identity_check(m, c, sigmas, spin);
        CHECK(rep.pass);
        CHECK(rep.max_log_ratio_deviation < 1e-9);
    }
}

TEST_CASE("field sampler reproduces a standard gaussian") {
    Matrix b = Matrix::identity(3);
    auto zero_v = [](double) { return 0.0; };
    auto res = sample_field(b, 1, zero_v, 100000, substream(34, "gauss"));
    CHECK(res.acceptance_rate > 0.25);
    CHECK(res.acceptance_rate < 0.55);
    double mean = 0.0, second = 0.0;
    const double count = double(res.samples.size()) * 3.0;
    for (const auto& s : res.samples)
        for (double x : s) {
            mean += x;
            second += x * x;
        }
    mean /= count;
    second /= count;
    // generous margins: single-site Metropolis samples are autocorrelated
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(second - mean * mean - 1.0) < 0.08);
}

TEST_CASE("renormalized sampler matches the 1-D density") {
    auto spin = sphere_model(1);
    const double c = 0.9;
    auto model = split_covariance(from_rows({{0.5}}), c, spin);
    REQUIRE(model.lambda_be > 0.0);
    auto res = sample_renormalized(model, 100000, substream(35, "hist"));

    // reference probabilities by quadrature of exp(-b phi^2/2 - V(phi))
    const double b = model.b(0, 0);
    auto density = [&](double phi) {
        return std::exp(-0.5 * b * phi * phi -
                        renormalized_potential_radial(spin, c, phi));
    };
    auto rule = gauss_legendre(400);
    const double lo = -5.0, hi = 5.0;
    auto integrate = [&](auto&& f) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double x = lo + (hi - lo) * (rule.nodes[i] + 1.0) / 2.0;
            acc += rule.weights[i] * (hi - lo) / 2.0 * f(x);
        }
        return acc;
    };
    const double z = integrate(density);

    const int bins = 40;
    std::vector<double> expect(bins, 0.0), observed(bins, 0.0);
    for (int k = 0; k < bins; ++k) {
        const double a = lo + (hi - lo) * k / bins;
        const double bb = lo + (hi - lo) * (k + 1) / bins;
        auto inner = gauss_legendre(16);
        double mass = 0.0;
        for (std::size_t i = 0; i < inner.nodes.size(); ++i) {
            const double x = a + (bb - a) * (inner.nodes[i] + 1.0) / 2.0;
            mass += inner.weights[i] * (bb - a) / 2.0 * density(x);
        }
        expect[k] = mass / z;
    }
    for (const auto& s : res.samples) {
        int k = int((s[0] - lo) / (hi - lo) * bins);
        k = std::max(0, std::min(bins - 1, k));
        observed[k] += 1.0 / double(res.samples.size());
    }
    double tv = 0.0;
    for (int k = 0; k < bins; ++k) tv += std::abs(expect[k] - observed[k]);
    tv /= 2.0;
    CHECK(tv < 0.02);
}

TEST_CASE("sampler is deterministic in the seed") {
    auto spin = sphere_model(1);
    auto model = split_covariance(from_rows({{0.5}}), 0.9, spin);
    FieldSamplerOptions opts;
    opts.burn_in_sweeps = 200;
    auto a = sample_renormalized(model, 50, 12345, opts);
    auto b = sample_renormalized(model, 50, 12345, opts);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(a.samples[i] == b.samples[i]);
    auto c = sample_renormalized(model, 50, 54321, opts);
    CHECK(a.samples != c.samples);
}

TEST_CASE("sampler refuses a nonconvex regime") {
    auto spin = sphere_model(1);
    // c = 2 > n = 1 gives lambda_be < 0
    auto m = from_rows({{0.5}});
    auto model = split_covariance(m, 2.0, spin);
    CHECK(model.lambda_be < 0.0);
    CHECK_THROWS_AS(sample_renormalized(model, 10, 1), std::domain_error);
}
