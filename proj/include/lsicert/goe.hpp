// GOE sampling, spectral-edge statistics, and the SK certification sweep.
// Off-diagonal entries are N(0, 1/N) above the diagonal, mirrored; the
// diagonal is N(0, 2/N), the orthogonally invariant convention. The sweep
// certifies M = beta H with n = 1, so the certified quantity is the edge
// span lambda_max - lambda_min, concentrated at 4.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsicert/coupling.hpp"
#include "lsicert/jacobi.hpp"
#include "lsicert/matrix.hpp"
#include "lsicert/parallel.hpp"
#include "lsicert/random.hpp"

namespace lsicert {

struct GoeSample {
    int size = 0;
    std::uint64_t seed = 0;
    Matrix h;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double edge_span = 0.0;
};

inline GoeSample sample_goe(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("sample_goe: N must be at least 2");
    GoeSample sample;
    sample.size = n;
    sample.seed = seed;
    sample.h = Matrix(n);
    Rng rng(seed);
    const double off_sd = std::sqrt(1.0 / n);
    const double diag_sd = std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
        sample.h(i, i) = diag_sd * rng.normal();
        for (int j = i + 1; j < n; ++j) {
            const double v = off_sd * rng.normal();
            sample.h(i, j) = v;
            sample.h(j, i) = v;
        }
    }
    JacobiOptions opt;
    opt.with_vectors = false;
    const EigenDecomposition d = jacobi_eigen(sample.h, opt);
    sample.lambda_min = d.values.front();
    sample.lambda_max = d.values.back();
    sample.edge_span = sample.lambda_max - sample.lambda_min;
    return sample;
}

struct EdgeStatistics {
    double mean_span = 0.0;
    double std_span = 0.0;
    int sample_count = 0;
    double histogram_low = 0.0;
    double histogram_high = 0.0;
    std::vector<long> histogram;
};

inline EdgeStatistics edge_statistics(const std::vector<GoeSample>& samples,
                                      int bins = 20) {
    if (samples.empty())
        throw std::invalid_argument("edge_statistics: no samples");
    if (bins < 1) throw std::invalid_argument("edge_statistics: bad bin count");
    for (const GoeSample& s : samples)
        if (s.size != samples.front().size)
            throw std::invalid_argument("edge_statistics: mixed sizes");

    EdgeStatistics stats;
    stats.sample_count = int(samples.size());
    double lo = samples.front().edge_span;
    double hi = lo;
    for (const GoeSample& s : samples) {
        stats.mean_span += s.edge_span;
        lo = std::min(lo, s.edge_span);
        hi = std::max(hi, s.edge_span);
    }
    stats.mean_span /= double(samples.size());
    if (samples.size() > 1) {
        double var = 0.0;
        for (const GoeSample& s : samples)
            var += (s.edge_span - stats.mean_span) *
                   (s.edge_span - stats.mean_span);
        stats.std_span = std::sqrt(var / double(samples.size() - 1));
    }
    stats.histogram_low = lo;
    stats.histogram_high = hi;
    stats.histogram.assign(bins, 0);
    const double width = hi > lo ? (hi - lo) / bins : 1.0;
    for (const GoeSample& s : samples) {
        int b = int((s.edge_span - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        ++stats.histogram[std::size_t(b)];
    }
    return stats;
}

inline CouplingMatrix sk_coupling(int n, double beta, std::uint64_t seed) {
    const GoeSample sample = sample_goe(n, seed);
    CouplingMatrix m;
    m.size = n;
    m.kind = CouplingKind::SkGoe;
    m.seed = seed;
    m.entries = sample.h;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.entries(i, j) *= beta;
    m.validate();
    return m;
}

struct SweepCell {
    double beta = 0.0;
    int size = 0;
    int sample_count = 0;
    double certified_fraction = 0.0;
    double mean_edge_span = 0.0;       // of the unit-beta GOE matrix
    double mean_certified_constant = 0.0;  // over certified samples, 0 if none
};

struct SweepResult {
    std::vector<double> beta_grid;
    std::vector<int> sizes;
    int samples_per_cell = 0;
    double gamma = 4.0;
    std::uint64_t seed = 0;
    std::vector<SweepCell> cells;  // size-major, then beta
};

// Each (size, sample index) pair draws one GOE matrix, diagonalized once and
// shared across the whole beta grid: scaling by beta scales the spectrum, so
// certifying M = beta H only needs the edges of H. Common samples across
// beta make the certified fraction exactly nonincreasing in beta.
inline SweepResult sk_certification_sweep(const std::vector<double>& beta_grid,
                                          const std::vector<int>& sizes,
                                          int samples_per_cell,
                                          std::uint64_t seed,
                                          double gamma = 4.0,
                                          int workers = 1) {
    if (beta_grid.empty() || sizes.empty())
        throw std::invalid_argument("sk_certification_sweep: empty grid");
    if (samples_per_cell < 1)
        throw std::invalid_argument("sk_certification_sweep: no samples");

    SweepResult result;
    result.beta_grid = beta_grid;
    result.sizes = sizes;
    result.samples_per_cell = samples_per_cell;
    result.gamma = gamma;
    result.seed = seed;

    std::vector<std::vector<double>> spans_by_size(
        sizes.size(), std::vector<double>(std::size_t(samples_per_cell)));
    parallel_for(long(sizes.size()) * samples_per_cell, workers, [&](long i) {
        const std::size_t si = std::size_t(i) / std::size_t(samples_per_cell);
        const int k = int(i % samples_per_cell);
        const GoeSample sample = sample_goe(
            sizes[si], substream(seed, "goe-sample",
                                 (std::uint64_t(si) << 32) |
                                     std::uint64_t(k)));
        spans_by_size[si][std::size_t(k)] = sample.edge_span;
    });

    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const std::vector<double>& spans = spans_by_size[si];
        double mean_span = 0.0;
        for (double s : spans) mean_span += s;
        mean_span /= double(samples_per_cell);

        for (double beta : beta_grid) {
            SweepCell cell;
            cell.beta = beta;
            cell.size = sizes[si];
            cell.sample_count = samples_per_cell;
            cell.mean_edge_span = mean_span;
            int certified = 0;
            double constant_sum = 0.0;
            for (double span : spans) {
                SpectrumSummary summary;
                summary.lambda_min = 0.0;
                summary.lambda_max = beta * span;
                const LsiCertificate cert = certify_lsi(summary, 1, gamma);
                if (cert.status == CertificateStatus::Certified) {
                    ++certified;
                    constant_sum += *cert.certified_constant;
                }
            }
            cell.certified_fraction =
                double(certified) / double(samples_per_cell);
            if (certified > 0)
                cell.mean_certified_constant = constant_sum / certified;
            result.cells.push_back(cell);
        }
    }
    return result;
}

}  // namespace lsicert
