// Brute-force ground truth for tiny Ising systems: the exact Gibbs law over
// 2^N states, the per-site flip Dirichlet form D(f) = sum_x nu(|f(sigma) -
// f(sigma^x)|^2), its exact spectral gap, a numeric search for the optimal
// LSI rate, and direct verification of the covariance/duplication estimate
// and of the mixture identity nu(F) = nu_r(mu_phi(F)).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsicert/coupling.hpp"
#include "lsicert/dynamics.hpp"
#include "lsicert/jacobi.hpp"
#include "lsicert/matrix.hpp"
#include "lsicert/random.hpp"
#include "lsicert/renorm.hpp"
#include "lsicert/singlespin.hpp"

namespace lsicert {

// States are bitmasks: bit x set means sigma_x = +1. Flipping site x is the
// XOR with (1 << x).
struct ExactChain {
    int n_sites = 0;
    CouplingMatrix coupling;
    std::vector<double> probabilities;
    double log_z = 0.0;
};

inline double spin_of(std::uint32_t state, int x) {
    return (state >> x) & 1u ? 1.0 : -1.0;
}

inline double state_energy(const CouplingMatrix& m, std::uint32_t state) {
    double e = 0.0;
    for (int x = 0; x < m.size; ++x) {
        const double sx = spin_of(state, x);
        e += 0.5 * m.entries(x, x);
        for (int y = x + 1; y < m.size; ++y)
            e += m.entries(x, y) * sx * spin_of(state, y);
    }
    return e;
}

inline ExactChain enumerate_gibbs(const CouplingMatrix& m) {
    m.validate();
    if (m.size > 16)
        throw std::invalid_argument("enumerate_gibbs: N must be at most 16");
    ExactChain chain;
    chain.n_sites = m.size;
    chain.coupling = m;
    const std::uint32_t states = 1u << m.size;
    std::vector<double> log_w(states);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::uint32_t s = 0; s < states; ++s) {
        log_w[s] = -state_energy(m, s);
        peak = std::max(peak, log_w[s]);
    }
    double total = 0.0;
    for (std::uint32_t s = 0; s < states; ++s)
        total += std::exp(log_w[s] - peak);
    chain.log_z = peak + std::log(total);
    chain.probabilities.resize(states);
    for (std::uint32_t s = 0; s < states; ++s) {
        chain.probabilities[s] = std::exp(log_w[s] - chain.log_z);
        if (chain.probabilities[s] < 1e-300)
            throw std::runtime_error(
                "enumerate_gibbs: state probability underflow at state " +
                std::to_string(s));
    }
    return chain;
}

inline double expectation(const ExactChain& chain,
                          const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t s = 0; s < chain.probabilities.size(); ++s)
        acc += chain.probabilities[s] * f[s];
    return acc;
}

inline double dirichlet_value(const ExactChain& chain,
                              const std::vector<double>& f) {
    const std::uint32_t states = 1u << chain.n_sites;
    double acc = 0.0;
    for (std::uint32_t s = 0; s < states; ++s) {
        const double p = chain.probabilities[s];
        for (int x = 0; x < chain.n_sites; ++x) {
            const double d = f[s] - f[s ^ (1u << x)];
            acc += p * d * d;
        }
    }
    return acc;
}

// Dense representation of the quadratic form, for spectral work. Kept out of
// ExactChain itself: at N = 16 the dense operator would not fit in memory.
inline Matrix dirichlet_form_matrix(const ExactChain& chain) {
    if (chain.n_sites > 12)
        throw std::invalid_argument(
            "dirichlet_form_matrix: dense form needs N at most 12");
    const std::uint32_t states = 1u << chain.n_sites;
    Matrix d{int(states)};
    for (std::uint32_t s = 0; s < states; ++s) {
        for (int x = 0; x < chain.n_sites; ++x) {
            const std::uint32_t t = s ^ (1u << x);
            const double w = chain.probabilities[s] + chain.probabilities[t];
            d(int(s), int(s)) += w;
            d(int(s), int(t)) -= w;
        }
    }
    return d;
}

struct GapResult {
    double gap = 0.0;
    double zero_eigenvalue = 0.0;       // should vanish; reported as sanity
    std::vector<double> minimizer;      // f achieving the gap, nu-orthogonal to 1
};

// Generalized problem D f = lambda diag(nu) f, symmetrized by conjugation
// with diag(nu)^{-1/2}; sqrt(nu) is the kernel vector and the gap is the
// second-smallest eigenvalue.
inline GapResult exact_spectral_gap(const ExactChain& chain,
                                    bool with_minimizer = true) {
    const std::uint32_t states = 1u << chain.n_sites;
    Matrix a = dirichlet_form_matrix(chain);
    std::vector<double> root(states);
    for (std::uint32_t s = 0; s < states; ++s) {
        root[s] = std::sqrt(chain.probabilities[s]);
        if (!(root[s] > 0.0))
            throw std::runtime_error(
                "exact_spectral_gap: degenerate stationary law");
    }
    for (std::uint32_t i = 0; i < states; ++i)
        for (std::uint32_t j = 0; j < states; ++j)
            a(int(i), int(j)) /= root[i] * root[j];

    JacobiOptions opt;
    opt.with_vectors = with_minimizer;
    EigenDecomposition d = jacobi_eigen(a, opt);
    GapResult res;
    res.zero_eigenvalue = d.values[0];
    if (std::abs(res.zero_eigenvalue) > 1e-9 * (1.0 + a.frobenius_norm()))
        throw std::runtime_error(
            "exact_spectral_gap: kernel eigenvalue not numerically zero: " +
            std::to_string(res.zero_eigenvalue));
    res.gap = d.values[1];
    if (with_minimizer) {
        res.minimizer.resize(states);
        for (std::uint32_t s = 0; s < states; ++s)
            res.minimizer[s] = d.vectors(1, int(s)) / root[s];
    }
    return res;
}

namespace detail {

// ent_nu(F) = m sum_s nu_s phi(F_s/m - 1) with phi(w) = (1+w)log(1+w) - w.
// Every phi term is nonnegative, so the sum has no cancellation even when F
// is nearly constant and the entropy is second-order small.
inline double stable_entropy(const std::vector<double>& probabilities,
                             const std::vector<double>& values) {
    double mass = 0.0;
    for (std::size_t s = 0; s < values.size(); ++s)
        mass += probabilities[s] * values[s];
    double acc = 0.0;
    for (std::size_t s = 0; s < values.size(); ++s) {
        const double w = values[s] / mass - 1.0;
        double phi;
        if (std::abs(w) < 1e-4) {
            phi = w * w * (0.5 - w / 6.0 + w * w / 12.0);
        } else if (1.0 + w <= 0.0) {
            phi = -w;
        } else {
            phi = (1.0 + w) * std::log1p(w) - w;
        }
        acc += probabilities[s] * phi;
    }
    return mass * acc;
}

}  // namespace detail

inline double entropy_of_square(const ExactChain& chain,
                                const std::vector<double>& f) {
    // ent_nu(f^2) with natural logarithm
    std::vector<double> sq(f.size());
    for (std::size_t s = 0; s < f.size(); ++s) sq[s] = f[s] * f[s];
    return detail::stable_entropy(chain.probabilities, sq);
}

struct LsiSearchResult {
    double rho_hat = std::numeric_limits<double>::infinity();
    std::vector<double> minimizer;  // the f > 0 achieving rho_hat
    long evaluations = 0;
};

namespace detail {

struct LsiObjective {
    const ExactChain* chain;
    // working in g with f = exp(g); normalizing nu(f^2) = 1 via log-sum-exp
    // keeps the entropy formula ent = sum nu f^2 * 2 g free of cancellation
    void normalize(std::vector<double>& g) const {
        const auto& p = chain->probabilities;
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < g.size(); ++s)
            peak = std::max(peak, 2.0 * g[s] + std::log(p[s]));
        double acc = 0.0;
        for (std::size_t s = 0; s < g.size(); ++s)
            acc += std::exp(2.0 * g[s] + std::log(p[s]) - peak);
        const double log_mass = peak + std::log(acc);
        for (double& gs : g) gs -= 0.5 * log_mass;
    }

    double evaluate(const std::vector<double>& g, std::vector<double>& f,
                    double& dirichlet, double& ent) const {
        const auto& p = chain->probabilities;
        const int n = chain->n_sites;
        f.resize(g.size());
        for (std::size_t s = 0; s < g.size(); ++s) f[s] = std::exp(g[s]);
        dirichlet = 0.0;
        for (std::uint32_t s = 0; s < g.size(); ++s)
            for (int x = 0; x < n; ++x) {
                const double d = f[s] - f[s ^ (1u << x)];
                dirichlet += p[s] * d * d;
            }
        std::vector<double> sq(f.size());
        for (std::size_t s = 0; s < f.size(); ++s) sq[s] = f[s] * f[s];
        ent = stable_entropy(p, sq);
        return 2.0 * dirichlet / ent;
    }

    void gradient(const std::vector<double>& g, const std::vector<double>& f,
                  double rho, double ent, std::vector<double>& grad) const {
        const auto& p = chain->probabilities;
        const int n = chain->n_sites;
        grad.assign(g.size(), 0.0);
        for (std::uint32_t s = 0; s < g.size(); ++s) {
            double dd = 0.0;
            for (int x = 0; x < n; ++x) {
                const std::uint32_t t = s ^ (1u << x);
                dd += 2.0 * (p[s] + p[t]) * (f[s] - f[t]);
            }
            const double d_dir = dd * f[s];
            const double d_ent = 2.0 * p[s] * f[s] * f[s] * 2.0 * g[s];
            grad[s] = (2.0 * d_dir - rho * d_ent) / ent;
        }
    }
};

inline double descend(const LsiObjective& obj, std::vector<double> g,
                      std::vector<double>& best_f, double& best_rho,
                      long& evaluations) {
    std::vector<double> f, grad, trial;
    obj.normalize(g);
    double dirichlet, ent;
    double rho = obj.evaluate(g, f, dirichlet, ent);
    ++evaluations;
    if (!(ent > 1e-15)) return rho;  // degenerate start, caller resamples

    double step = 0.1;
    for (int iter = 0; iter < 5000; ++iter) {
        obj.gradient(g, f, rho, ent, grad);
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving) {
            trial = g;
            for (std::size_t s = 0; s < g.size(); ++s)
                trial[s] -= step * grad[s];
            obj.normalize(trial);
            double d2, e2;
            const double rho2 = obj.evaluate(trial, f, d2, e2);
            ++evaluations;
            if (e2 > 1e-15 && rho2 < rho) {
                const double gain = (rho - rho2) / rho;
                g.swap(trial);
                dirichlet = d2;
                ent = e2;
                rho = rho2;
                step *= 1.3;
                improved = gain > 1e-10;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    if (rho < best_rho) {
        best_rho = rho;
        best_f.resize(g.size());
        for (std::size_t s = 0; s < g.size(); ++s) best_f[s] = std::exp(g[s]);
    }
    return rho;
}

}  // namespace detail

// Minimizes 2 D(f) / ent(f^2) over positive f by projected gradient descent
// in g = log f. Returns an upper bound on the optimal LSI rate. Random
// restarts are complemented by seeds along the spectral-gap minimizer, whose
// small-amplitude limit recovers the gap itself, so the result never exceeds
// the gap by more than descent slack.
inline LsiSearchResult numeric_lsi_upper_bound(
    const ExactChain& chain, int restarts, std::uint64_t seed,
    const std::vector<double>* gap_direction = nullptr) {
    if (chain.n_sites > 10)
        throw std::invalid_argument(
            "numeric_lsi_upper_bound: N must be at most 10");
    const std::uint32_t states = 1u << chain.n_sites;
    detail::LsiObjective obj{&chain};
    LsiSearchResult result;

    std::vector<double> g(states);
    std::vector<double> direction;
    if (gap_direction) {
        direction = *gap_direction;
    } else {
        direction = exact_spectral_gap(chain).minimizer;
    }
    double sup = 0.0;
    for (double v : direction) sup = std::max(sup, std::abs(v));
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        for (std::uint32_t s = 0; s < states; ++s)
            g[s] = std::log1p(eps * direction[s] / sup);
        detail::descend(obj, g, result.minimizer, result.rho_hat,
                        result.evaluations);
    }

    for (int r = 0; r < restarts; ++r) {
        Rng rng(substream(seed, "lsi-restart", r));
        bool degenerate = true;
        for (int attempt = 0; attempt < 8 && degenerate; ++attempt) {
            double spread = 0.0;
            for (std::uint32_t s = 0; s < states; ++s) {
                g[s] = 0.4 * rng.normal();
                spread = std::max(spread, std::abs(g[s] - g[0]));
            }
            degenerate = spread < 1e-12;
        }
        detail::descend(obj, g, result.minimizer, result.rho_hat,
                        result.evaluations);
    }
    return result;
}

struct DuplicationReport {
    long checked = 0;
    long violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    bool pass = false;
};

// For the two-point tilted measure and arbitrary F, verifies
// |cov(F^2, sigma)|^2 <= 8 var(F) mu(F^2).
inline DuplicationReport duplication_inequality_check(
    const std::vector<double>& fields, int functions_per_field,
    std::uint64_t seed) {
    if (fields.empty() || functions_per_field < 1)
        throw std::invalid_argument("duplication_inequality_check: empty input");
    DuplicationReport rep;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const double h = fields[i];
        const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * h));
        const double p_minus = 1.0 - p_plus;
        Rng rng(substream(seed, "duplication", i));
        for (int k = 0; k < functions_per_field; ++k) {
            const double fp = rng.uniform(-3.0, 3.0);
            const double fm = rng.uniform(-3.0, 3.0);
            const double mean_f = p_plus * fp + p_minus * fm;
            const double mean_f2 = p_plus * fp * fp + p_minus * fm * fm;
            const double mean_sigma = p_plus - p_minus;
            const double mean_f2sigma = p_plus * fp * fp - p_minus * fm * fm;
            const double cov = mean_f2sigma - mean_f2 * mean_sigma;
            const double var = mean_f2 - mean_f * mean_f;
            const double slack = 8.0 * var * mean_f2 - cov * cov;
            rep.min_slack = std::min(rep.min_slack, slack);
            ++rep.checked;
            if (slack < -1e-12 * std::max(1.0, 8.0 * var * mean_f2))
                ++rep.violations;
        }
    }
    rep.pass = rep.violations == 0;
    return rep;
}

struct MixtureReport {
    struct Row {
        std::string observable;
        double exact = 0.0;
        double estimate = 0.0;
        double std_error = 0.0;
        double z = 0.0;
    };
    std::vector<Row> rows;
    int sample_count = 0;
    bool pass = false;
};

// Compares exact expectations under nu against Monte Carlo estimates of
// nu_r(mu_phi(.)), where mu_phi is the product measure with site means
// tanh(c phi_x). Standard errors by batch means over the recorded chain.
inline MixtureReport mixture_identity_check(const CouplingMatrix& m, double c,
                                            int samples, std::uint64_t seed) {
    if (m.size > 6)
        throw std::invalid_argument("mixture_identity_check: N must be <= 6");
    const ExactChain chain = enumerate_gibbs(m);
    const SingleSpinModel spin = sphere_model(1);
    const RenormalizedModel model = split_covariance(m, c, spin);
    const FieldSampleResult run =
        sample_renormalized(model, samples, substream(seed, "mixture"));

    const int n = m.size;
    const std::uint32_t states = 1u << n;

    struct Observable {
        std::string name;
        std::vector<double> exact_values;          // per enumerated state
        std::function<double(const std::vector<double>&)> mixture;  // per tanh vector
    };
    std::vector<Observable> obs;

    {
        Observable mag;
        mag.name = "magnetization";
        mag.exact_values.resize(states);
        for (std::uint32_t s = 0; s < states; ++s) {
            double acc = 0.0;
            for (int x = 0; x < n; ++x) acc += spin_of(s, x);
            mag.exact_values[s] = acc / n;
        }
        mag.mixture = [n](const std::vector<double>& t) {
            double acc = 0.0;
            for (int x = 0; x < n; ++x) acc += t[x];
            return acc / n;
        };
        obs.push_back(std::move(mag));
    }
    {
        Observable energy;
        energy.name = "energy";
        energy.exact_values.resize(states);
        for (std::uint32_t s = 0; s < states; ++s)
            energy.exact_values[s] = state_energy(m, s);
        const Matrix* entries = &m.entries;
        energy.mixture = [n, entries](const std::vector<double>& t) {
            double acc = 0.0;
            for (int x = 0; x < n; ++x) {
                acc += 0.5 * (*entries)(x, x);
                for (int y = x + 1; y < n; ++y)
                    acc += (*entries)(x, y) * t[x] * t[y];
            }
            return acc;
        };
        obs.push_back(std::move(energy));
    }
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            Observable two;
            two.name = "corr_" + std::to_string(x) + "_" + std::to_string(y);
            two.exact_values.resize(states);
            for (std::uint32_t s = 0; s < states; ++s)
                two.exact_values[s] = spin_of(s, x) * spin_of(s, y);
            two.mixture = [x, y](const std::vector<double>& t) {
                return t[x] * t[y];
            };
            obs.push_back(std::move(two));
        }

    MixtureReport rep;
    rep.sample_count = int(run.samples.size());
    if (run.samples.size() < 1000)
        throw std::invalid_argument("mixture_identity_check: too few samples");

    // standard errors account for chain autocorrelation via the integrated
    // time: var(mean) = var * tau / T
    std::vector<double> t(n);
    std::vector<double> values(run.samples.size());
    for (const auto& o : obs) {
        for (std::size_t k = 0; k < run.samples.size(); ++k) {
            const auto& phi = run.samples[k];
            for (int x = 0; x < n; ++x) t[x] = std::tanh(c * phi[x]);
            values[k] = o.mixture(t);
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= double(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= double(values.size());

        double tau = 0.0;
        DynamicsTrace trace;
        trace.observable_name = o.name;
        trace.samples = values;
        trace.sweep_count = long(values.size());
        try {
            tau = std::max(
                1.0, estimate_relaxation(trace).integrated_autocorr_time);
        } catch (const std::invalid_argument&) {
            tau = 0.0;  // constant observable
        } catch (const std::runtime_error& err) {
            throw std::runtime_error(
                std::string("mixture_identity_check: sample budget too "
                            "small for reliable errors: ") +
                err.what());
        }

        MixtureReport::Row row;
        row.observable = o.name;
        row.exact = expectation(chain, o.exact_values);
        row.estimate = mean;
        row.std_error =
            tau > 0.0 ? std::sqrt(var * tau / double(values.size())) : 0.0;
        if (row.std_error > 0.0) {
            row.z = (row.estimate - row.exact) / row.std_error;
        } else {
            row.z = std::abs(row.estimate - row.exact) < 1e-12
                        ? 0.0
                        : std::numeric_limits<double>::infinity();
        }
        rep.rows.push_back(std::move(row));
    }
    rep.pass = std::all_of(rep.rows.begin(), rep.rows.end(),
                           [](const auto& r) { return std::abs(r.z) <= 3.0; });
    return rep;
}

}  // namespace lsicert
