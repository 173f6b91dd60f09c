// Single-site MCMC for the spin measure: systematic heat-bath Glauber sweeps
// for Ising, tangent-Gaussian Metropolis sweeps on the sphere for n >= 2,
// plus integrated autocorrelation estimation with self-consistent windowing
// and a relaxation study over (size, beta, seed) cells.
//
// Sign convention: the weight is exp(-(sigma, M sigma)/2), so positive
// off-diagonal entries are antiferromagnetic and the heat-bath field is
// h_x = -sum_{y != x} M_xy sigma_y.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsicert/coupling.hpp"
#include "lsicert/matrix.hpp"
#include "lsicert/parallel.hpp"
#include "lsicert/random.hpp"

namespace lsicert {

struct SpinConfiguration {
    int spin_dimension = 1;
    int site_count = 0;
    std::vector<double> values;  // site_count x spin_dimension, unit rows

    double* site(int x) { return values.data() + std::size_t(x) * spin_dimension; }
    const double* site(int x) const {
        return values.data() + std::size_t(x) * spin_dimension;
    }

    void renormalize() {
        for (int x = 0; x < site_count; ++x) {
            double* v = site(x);
            double norm = 0.0;
            for (int k = 0; k < spin_dimension; ++k) norm += v[k] * v[k];
            norm = std::sqrt(norm);
            for (int k = 0; k < spin_dimension; ++k) v[k] /= norm;
        }
    }

    double max_norm_defect() const {
        double worst = 0.0;
        for (int x = 0; x < site_count; ++x) {
            const double* v = site(x);
            double norm = 0.0;
            for (int k = 0; k < spin_dimension; ++k) norm += v[k] * v[k];
            worst = std::max(worst, std::abs(std::sqrt(norm) - 1.0));
        }
        return worst;
    }
};

inline SpinConfiguration uniform_random_configuration(int spin_dimension,
                                                      int sites,
                                                      std::uint64_t seed) {
    if (spin_dimension < 1 || sites < 1)
        throw std::invalid_argument("uniform_random_configuration: bad shape");
    SpinConfiguration state;
    state.spin_dimension = spin_dimension;
    state.site_count = sites;
    state.values.resize(std::size_t(sites) * spin_dimension);
    Rng rng(substream(seed, "init"));
    if (spin_dimension == 1) {
        for (int x = 0; x < sites; ++x)
            state.values[x] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    } else {
        for (double& v : state.values) v = rng.normal();
        state.renormalize();
    }
    return state;
}

inline double heat_bath_field(const CouplingMatrix& m,
                              const SpinConfiguration& state, int x) {
    double h = 0.0;
    for (int y = 0; y < m.size; ++y)
        if (y != x) h -= m.entries(x, y) * state.values[y];
    return h;
}

// One systematic heat-bath sweep, n = 1 only. Each site is redrawn from its
// exact conditional P(sigma_x = +1) = 1 / (1 + exp(-2 h_x)).
inline void glauber_sweep(const CouplingMatrix& m, SpinConfiguration& state,
                          Rng& rng) {
    if (state.spin_dimension != 1)
        throw std::invalid_argument("glauber_sweep: spin dimension must be 1");
    if (state.site_count != m.size)
        throw std::invalid_argument("glauber_sweep: size mismatch");
    for (int x = 0; x < m.size; ++x) {
        const double h = heat_bath_field(m, state, x);
        const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * h));
        state.values[x] = rng.uniform01() < p_plus ? 1.0 : -1.0;
    }
}

// One systematic Metropolis sweep for n >= 2: Gaussian proposal tangent to
// the sphere, renormalized, accepted on exp(-delta E). Returns the accepted
// fraction of moves.
inline double metropolis_sphere_sweep(const CouplingMatrix& m,
                                      SpinConfiguration& state, Rng& rng,
                                      double step) {
    const int n = state.spin_dimension;
    if (n < 2)
        throw std::invalid_argument(
            "metropolis_sphere_sweep: spin dimension must be at least 2");
    if (state.site_count != m.size)
        throw std::invalid_argument("metropolis_sphere_sweep: size mismatch");
    int accepted = 0;
    std::vector<double> proposal(n), local(n);
    for (int x = 0; x < m.size; ++x) {
        double* v = state.site(x);
        for (int k = 0; k < n; ++k) local[k] = 0.0;
        for (int y = 0; y < m.size; ++y) {
            if (y == x) continue;
            const double w = m.entries(x, y);
            const double* u = state.site(y);
            for (int k = 0; k < n; ++k) local[k] += w * u[k];
        }
        double radial = 0.0;
        for (int k = 0; k < n; ++k) proposal[k] = rng.normal();
        for (int k = 0; k < n; ++k) radial += proposal[k] * v[k];
        double norm = 0.0;
        for (int k = 0; k < n; ++k) {
            proposal[k] = v[k] + step * (proposal[k] - radial * v[k]);
            norm += proposal[k] * proposal[k];
        }
        norm = std::sqrt(norm);
        double delta_e = 0.0;
        for (int k = 0; k < n; ++k)
            delta_e += (proposal[k] / norm - v[k]) * local[k];
        if (delta_e <= 0.0 || rng.uniform01() < std::exp(-delta_e)) {
            for (int k = 0; k < n; ++k) v[k] = proposal[k] / norm;
            ++accepted;
        }
    }
    return double(accepted) / double(m.size);
}

// Random-site heat-bath kernel as a dense 2^N transition matrix; exactly
// reversible, used by detailed-balance tests. Bit x set means sigma_x = +1.
inline Matrix heat_bath_transition_matrix(const CouplingMatrix& m) {
    if (m.size > 10)
        throw std::invalid_argument(
            "heat_bath_transition_matrix: N must be at most 10");
    const std::uint32_t states = 1u << m.size;
    Matrix p{int(states)};
    SpinConfiguration state;
    state.spin_dimension = 1;
    state.site_count = m.size;
    state.values.resize(m.size);
    for (std::uint32_t s = 0; s < states; ++s) {
        for (int x = 0; x < m.size; ++x)
            state.values[x] = (s >> x) & 1u ? 1.0 : -1.0;
        for (int x = 0; x < m.size; ++x) {
            const double h = heat_bath_field(m, state, x);
            const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * h));
            const std::uint32_t with_plus = s | (1u << x);
            const std::uint32_t with_minus = s & ~(1u << x);
            p(int(s), int(with_plus)) += p_plus / m.size;
            p(int(s), int(with_minus)) += (1.0 - p_plus) / m.size;
        }
    }
    return p;
}

inline std::uint32_t state_index(const SpinConfiguration& state) {
    if (state.spin_dimension != 1 || state.site_count > 16)
        throw std::invalid_argument("state_index: needs Ising with N <= 16");
    std::uint32_t s = 0;
    for (int x = 0; x < state.site_count; ++x)
        if (state.values[x] > 0.0) s |= 1u << x;
    return s;
}

struct DynamicsTrace {
    std::string observable_name;
    std::vector<double> samples;
    long sweep_count = 0;
    std::uint64_t seed = 0;
    std::string model;
};

struct TraceRequest {
    std::string observable = "magnetization";  // or "energy"
    long sweeps = 10000;
    long burn_in = 1000;
    std::uint64_t seed = 1;
};

inline double magnetization_of(const SpinConfiguration& state) {
    double acc = 0.0;
    for (double v : state.values) acc += v;
    return acc / state.site_count;
}

inline double energy_of(const CouplingMatrix& m,
                        const SpinConfiguration& state) {
    double acc = 0.0;
    for (int x = 0; x < m.size; ++x) {
        acc += 0.5 * m.entries(x, x);
        for (int y = x + 1; y < m.size; ++y)
            acc += m.entries(x, y) * state.values[x] * state.values[y];
    }
    return acc;
}

inline DynamicsTrace record_trace(const CouplingMatrix& m,
                                  const TraceRequest& req) {
    if (req.observable != "magnetization" && req.observable != "energy")
        throw std::invalid_argument("record_trace: unknown observable " +
                                    req.observable);
    if (req.sweeps < 1) throw std::invalid_argument("record_trace: no sweeps");
    DynamicsTrace trace;
    trace.observable_name = req.observable;
    trace.sweep_count = req.sweeps;
    trace.seed = req.seed;
    trace.model = "ising N=" + std::to_string(m.size);
    trace.samples.reserve(req.sweeps);

    SpinConfiguration state =
        uniform_random_configuration(1, m.size, req.seed);
    Rng rng(substream(req.seed, "glauber"));
    for (long t = 0; t < req.burn_in; ++t) glauber_sweep(m, state, rng);
    const bool want_energy = req.observable == "energy";
    for (long t = 0; t < req.sweeps; ++t) {
        glauber_sweep(m, state, rng);
        trace.samples.push_back(want_energy ? energy_of(m, state)
                                            : magnetization_of(state));
    }
    return trace;
}

struct RelaxationEstimate {
    double integrated_autocorr_time = 0.0;
    double standard_error = 0.0;  // batch-means error of the observable mean
    long window = 0;
    double observable_mean = 0.0;
};

// Integrated autocorrelation time with the self-consistent window
// W = smallest lag with W >= 5 tau(W). Requires the trace to be at least
// 100 tau long; shorter traces raise an error naming the required length.
inline RelaxationEstimate estimate_relaxation(const DynamicsTrace& trace) {
    const std::vector<double>& x = trace.samples;
    const long t_len = long(x.size());
    if (t_len < 16)
        throw std::invalid_argument("estimate_relaxation: trace too small");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(t_len);
    double c0 = 0.0;
    for (double v : x) c0 += (v - mean) * (v - mean);
    c0 /= double(t_len);
    if (c0 <= 1e-30 * (1.0 + mean * mean))
        throw std::invalid_argument(
            "estimate_relaxation: constant trace, autocorrelation undefined");

    double tau = 1.0;
    long window = t_len / 2;
    bool consistent = false;
    for (long t = 1; t <= t_len / 2; ++t) {
        double ct = 0.0;
        for (long i = 0; i + t < t_len; ++i)
            ct += (x[i] - mean) * (x[i + t] - mean);
        ct /= double(t_len - t);
        tau += 2.0 * ct / c0;
        if (double(t) >= 5.0 * tau) {
            window = t;
            consistent = true;
            break;
        }
    }
    const long required = long(std::ceil(100.0 * std::max(tau, 1.0)));
    if (!consistent || t_len < required)
        throw std::runtime_error(
            "estimate_relaxation: trace too short, need at least " +
            std::to_string(required) + " sweeps, got " + std::to_string(t_len));

    RelaxationEstimate est;
    est.integrated_autocorr_time = tau;
    est.window = window;
    est.observable_mean = mean;

    const int batches = 8;
    const long per_batch = t_len / batches;
    std::vector<double> batch_mean(batches, 0.0);
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (long i = 0; i < per_batch; ++i) acc += x[b * per_batch + i];
        batch_mean[b] = acc / double(per_batch);
    }
    double grand = 0.0;
    for (double bm : batch_mean) grand += bm;
    grand /= batches;
    double var = 0.0;
    for (double bm : batch_mean) var += (bm - grand) * (bm - grand);
    var /= double(batches - 1);
    est.standard_error = std::sqrt(var / batches);
    return est;
}

using CouplingFactory =
    std::function<CouplingMatrix(int size, double beta, std::uint64_t seed)>;

struct RelaxationStudySpec {
    std::vector<int> sizes;
    std::vector<double> betas;
    int seeds_per_cell = 3;
    long sweeps = 20000;
    long pilot_sweeps = 2000;
    std::uint64_t seed = 1;
};

struct RelaxationCell {
    int size = 0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    double tau_magnetization = 0.0;
    double tau_magnetization_error = 0.0;
    double tau_energy = 0.0;
    double tau_energy_error = 0.0;
    bool too_short = false;
    long required_length = 0;
};

namespace detail {

inline long parse_required_length(const std::string& message) {
    const std::string key = "at least ";
    const auto pos = message.find(key);
    if (pos == std::string::npos) return 0;
    return std::atol(message.c_str() + pos + key.size());
}

}  // namespace detail

// Runs one Glauber chain per (size, beta, seed) cell and reports the
// integrated autocorrelation time of magnetization and energy. Burn-in is
// 20 pilot-estimated tau; cells whose main trace is still too short are
// marked rather than dropped. Cells are independent; the factory must be
// safe to call concurrently when workers > 1.
inline std::vector<RelaxationCell> relaxation_study(
    const RelaxationStudySpec& spec, const CouplingFactory& factory,
    int workers = 1) {
    if (spec.sizes.empty() || spec.betas.empty() || spec.seeds_per_cell < 1)
        throw std::invalid_argument("relaxation_study: empty grid");
    const long total = long(spec.sizes.size()) * long(spec.betas.size()) *
                       spec.seeds_per_cell;
    std::vector<RelaxationCell> table(static_cast<std::size_t>(total));
    parallel_for(total, workers, [&](long idx) {
        const int rep = int(idx % spec.seeds_per_cell);
        const long rest = idx / spec.seeds_per_cell;
        const std::size_t bi = std::size_t(rest) % spec.betas.size();
        const std::size_t si = std::size_t(rest) / spec.betas.size();
        const int size = spec.sizes[si];
        const double beta = spec.betas[bi];
        const std::uint64_t cell_seed = substream(
            spec.seed, "cell",
            (std::uint64_t(si) << 40) | (std::uint64_t(bi) << 20) |
                std::uint64_t(rep));
        RelaxationCell cell;
        cell.size = size;
        cell.beta = beta;
        cell.seed = cell_seed;
        const CouplingMatrix m = factory(size, beta, cell_seed);

        TraceRequest pilot;
        pilot.observable = "magnetization";
        pilot.sweeps = spec.pilot_sweeps;
        pilot.burn_in = spec.pilot_sweeps / 10;
        pilot.seed = substream(cell_seed, "pilot");
        double tau_pilot = 1.0;
        try {
            tau_pilot = estimate_relaxation(record_trace(m, pilot))
                            .integrated_autocorr_time;
        } catch (const std::exception&) {
            tau_pilot = double(spec.pilot_sweeps) / 100.0;
        }

        const long burn_in = std::max<long>(100, long(20.0 * tau_pilot));
        bool first = true;
        for (const char* name : {"magnetization", "energy"}) {
            TraceRequest req;
            req.observable = name;
            req.sweeps = spec.sweeps;
            req.burn_in = burn_in;
            req.seed = substream(cell_seed, name);
            try {
                const RelaxationEstimate est =
                    estimate_relaxation(record_trace(m, req));
                if (first) {
                    cell.tau_magnetization = est.integrated_autocorr_time;
                    cell.tau_magnetization_error = est.standard_error;
                } else {
                    cell.tau_energy = est.integrated_autocorr_time;
                    cell.tau_energy_error = est.standard_error;
                }
            } catch (const std::invalid_argument&) {
                // constant observable (e.g. energy at beta = 0):
                // every sweep is an exact sample
                if (first)
                    cell.tau_magnetization = 1.0;
                else
                    cell.tau_energy = 1.0;
            } catch (const std::runtime_error& err) {
                cell.too_short = true;
                cell.required_length =
                    std::max(cell.required_length,
                             detail::parse_required_length(err.what()));
            }
            first = false;
        }
        table[std::size_t(idx)] = cell;
    });
    return table;
}

}  // namespace lsicert
