// Coupling matrices for O(n) spin systems, their spectra, and the LSI /
// spectral-gap certificates built on the spectral condition
// lambda_max - lambda_min < n. Shifting the coupling by a multiple of the
// identity does not change the spin measure (spins have unit norm), so the
// certificate always works with the shifted matrix M - lambda_min * id.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsicert/jacobi.hpp"
#include "lsicert/matrix.hpp"

namespace lsicert {

enum class CouplingKind { FerromagnetLattice, MeanField, SkGoe, File };

inline const char* to_string(CouplingKind k) {
    switch (k) {
        case CouplingKind::FerromagnetLattice: return "ferromagnet-lattice";
        case CouplingKind::MeanField: return "mean-field";
        case CouplingKind::SkGoe: return "sk-goe";
        case CouplingKind::File: return "file";
    }
    return "?";
}

// Symmetric real coupling matrix with provenance. Entries are exactly
// symmetric at the bit level after construction; positive definiteness is
// deliberately NOT required here (the shift absorbs indefiniteness).
struct CouplingMatrix {
    int size = 0;
    Matrix entries;
    CouplingKind kind = CouplingKind::File;
    std::optional<std::uint64_t> seed;

    void validate() const {
        if (size <= 0 || entries.rows() != size || entries.cols() != size)
            throw std::invalid_argument("CouplingMatrix: bad dimensions");
        if (!entries.all_finite())
            throw std::invalid_argument("CouplingMatrix: non-finite entry");
        if (!entries.is_symmetric())
            throw std::invalid_argument("CouplingMatrix: entries not symmetric");
    }
};

// All off-diagonal entries equal to `strength`, zero diagonal.
inline CouplingMatrix mean_field_coupling(int n_sites, double strength) {
    if (n_sites < 1)
        throw std::invalid_argument("mean_field_coupling: need at least 1 site");
    if (!std::isfinite(strength))
        throw std::invalid_argument("mean_field_coupling: non-finite strength");
    CouplingMatrix m{n_sites, Matrix(n_sites), CouplingKind::MeanField, {}};
    for (int i = 0; i < n_sites; ++i)
        for (int j = 0; j < n_sites; ++j)
            if (i != j) m.entries(i, j) = strength;
    return m;
}

// Periodic nearest-neighbour lattice of the given dimensions; every
// neighbouring pair gets `edge_weight`. Wrap edges that would couple a site
// to itself (dimension of length 1) are skipped, matching the zero-diagonal
// convention of the builders.
inline CouplingMatrix lattice_coupling(const std::vector<int>& dims,
                                       double edge_weight) {
    if (dims.empty())
        throw std::invalid_argument("lattice_coupling: no dimensions");
    long total = 1;
    for (int d : dims) {
        if (d < 1) throw std::invalid_argument("lattice_coupling: dimension < 1");
        total *= d;
        if (total > (1 << 22))
            throw std::invalid_argument("lattice_coupling: lattice too large");
    }
    if (!std::isfinite(edge_weight))
        throw std::invalid_argument("lattice_coupling: non-finite weight");
    const int n = static_cast<int>(total);
    CouplingMatrix m{n, Matrix(n), CouplingKind::FerromagnetLattice, {}};

    std::vector<int> stride(dims.size(), 1);
    for (std::size_t d = 1; d < dims.size(); ++d)
        stride[d] = stride[d - 1] * dims[d - 1];

    for (int x = 0; x < n; ++x) {
        for (std::size_t d = 0; d < dims.size(); ++d) {
            const int len = dims[d];
            const int coord = (x / stride[d]) % len;
            for (int dir : {+1, -1}) {
                const int nb = (coord + dir + len) % len;
                const int y = x + (nb - coord) * stride[d];
                if (y == x) continue;
                m.entries(x, y) = edge_weight;
                m.entries(y, x) = edge_weight;
            }
        }
    }
    return m;
}

// Spectrum of the symmetric coupling matrix.
struct SpectrumSummary {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::optional<std::vector<double>> eigenvalues;  // ascending when present
    double residual = 0.0;  // max ||A v - lambda v|| over checked pairs
};

// Residual tolerance declared for the Jacobi solver: the terminal
// off-diagonal norm bounds every eigenpair residual, and the solver stops at
// 1e-10 * ||A||_F. A factor allows for the sorting/rounding slack on top.
inline double spectrum_residual_tolerance(const CouplingMatrix& m) {
    return 1e-9 * (1.0 + m.entries.frobenius_norm());
}

inline SpectrumSummary spectrum(const CouplingMatrix& m,
                                bool with_vectors = true) {
    m.validate();
    JacobiOptions opt;
    opt.with_vectors = with_vectors;
    EigenDecomposition d = jacobi_eigen(m.entries, opt);

    SpectrumSummary s;
    s.lambda_min = d.values.front();
    s.lambda_max = d.values.back();
    s.eigenvalues = d.values;
    if (with_vectors) {
        std::vector<int> checked;
        const int n = m.size;
        if (n <= 64) {
            checked.resize(n);
            for (int i = 0; i < n; ++i) checked[i] = i;
        } else {
            // extremes plus a spread of interior pairs
            for (int i = 0; i < 8; ++i) checked.push_back(i);
            for (int i = n - 8; i < n; ++i) checked.push_back(i);
            for (int k = 1; k <= 16; ++k) checked.push_back((n / 17) * k);
        }
        s.residual = eigenpair_residual(m.entries, d, checked);
    } else {
        // a-posteriori bound: eigenvalues of A differ from the rotated
        // diagonal by at most the terminal off-diagonal Frobenius norm
        s.residual = d.off_norm;
    }
    return s;
}

enum class CertificateStatus { Certified, FailedSpectralCondition };

inline const char* to_string(CertificateStatus s) {
    return s == CertificateStatus::Certified ? "certified"
                                             : "failed-spectral-condition";
}

// Outcome of the certificate pipeline. When the shifted spectral span
// c = lambda_max - lambda_min is below the spin dimension n, the measure
// satisfies a LSI with constant C = (2/gamma) (1 + 2 n c / (n - c)), i.e.
// ent(F^2) <= C * sum_x nu(|grad_x F|^2), and rate rho = 2 / C. A span at or
// above n is a value, not an error: sweeps need to count failures.
struct LsiCertificate {
    int spin_dimension = 1;
    double shift = 0.0;           // the subtracted lambda_min
    double effective_norm = 0.0;  // c = lambda_max - lambda_min
    double single_spin_lsi = 0.0;
    std::optional<double> certified_constant;
    std::optional<double> certified_lsi_rate;
    CertificateStatus status = CertificateStatus::FailedSpectralCondition;
    double failure_margin = 0.0;  // c - n when failed, 0 otherwise
};

inline LsiCertificate certify_lsi(const SpectrumSummary& s, int n,
                                  double gamma) {
    if (n < 1) throw std::invalid_argument("certify_lsi: spin dimension < 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("certify_lsi: gamma <= 0");

    LsiCertificate cert;
    cert.spin_dimension = n;
    cert.shift = s.lambda_min;
    cert.effective_norm = s.lambda_max - s.lambda_min;
    cert.single_spin_lsi = gamma;
    const double c = cert.effective_norm;
    if (c < double(n)) {
        cert.status = CertificateStatus::Certified;
        const double constant = (2.0 / gamma) * (1.0 + 2.0 * n * c / (n - c));
        cert.certified_constant = constant;
        cert.certified_lsi_rate = 2.0 / constant;
    } else {
        cert.status = CertificateStatus::FailedSpectralCondition;
        cert.failure_margin = c - double(n);
    }
    return cert;
}

inline LsiCertificate certify_lsi(const CouplingMatrix& m, int n,
                                  double gamma) {
    return certify_lsi(spectrum(m, /*with_vectors=*/false), n, gamma);
}

// Same pipeline fed with a single-spin spectral-gap constant. The certified
// constant is reused: an LSI with rate rho implies a spectral gap >= rho, so
// the result is a valid (if possibly non-optimal) gap certificate.
inline LsiCertificate certify_spectral_gap(const CouplingMatrix& m, int n,
                                           double gamma_sg) {
    return certify_lsi(m, n, gamma_sg);
}

inline LsiCertificate certify_spectral_gap(const SpectrumSummary& s, int n,
                                           double gamma_sg) {
    return certify_lsi(s, n, gamma_sg);
}

// Mean-field condition sup_x sum_y |M_xy| < n. For positive definite M this
// implies the spectral condition; reported side by side with the certificate
// so users can see which test is stronger on their instance.
struct MeanFieldBoundReport {
    double row_sup_norm = 0.0;
    bool implies_condition = false;
};

inline MeanFieldBoundReport mean_field_bound_check(const CouplingMatrix& m,
                                                   int n) {
    m.validate();
    if (n < 1)
        throw std::invalid_argument("mean_field_bound_check: spin dimension < 1");
    MeanFieldBoundReport r;
    r.row_sup_norm = m.entries.row_sup_norm();
    r.implies_condition = r.row_sup_norm < double(n);
    return r;
}

}  // namespace lsicert
