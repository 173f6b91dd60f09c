#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsicert/coupling.hpp"
#include "lsicert/dynamics.hpp"
#include "lsicert/goe.hpp"
#include "lsicert/oracle.hpp"
#include "lsicert/renorm.hpp"
#include "lsicert/singlespin.hpp"

namespace lsicert {

using Json = nlohmann::ordered_json;

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open file for writing: " + path);
    out << content;
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

inline Json load_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const std::exception& e) {
        throw std::runtime_error("cannot parse " + path + ": " + e.what());
    }
}

inline void save_json_file(const std::string& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline Json rows_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json matrix_to_json(const Matrix& m) {
    Json j;
    j["n"] = m.rows();
    j["rows"] = rows_to_json(m);
    return j;
}

// Interchange format for coupling matrices: {"n": N, "rows": [[...], ...]}.
// Asymmetric input is rejected, not symmetrized.
inline Matrix matrix_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("rows"))
        throw std::invalid_argument(
            "matrix json must be an object with \"n\" and \"rows\"");
    if (!j["n"].is_number_integer())
        throw std::invalid_argument("matrix json: \"n\" must be an integer");
    const long long n = j["n"].get<long long>();
    if (n <= 0 || n > 4096)
        throw std::invalid_argument("matrix json: n out of range");
    const Json& rows = j["rows"];
    if (!rows.is_array() || rows.size() != std::size_t(n))
        throw std::invalid_argument("matrix json: expected " +
                                    std::to_string(n) + " rows");
    Matrix m{int(n)};
    for (long long i = 0; i < n; ++i) {
        const Json& row = rows[std::size_t(i)];
        if (!row.is_array() || row.size() != std::size_t(n))
            throw std::invalid_argument("matrix json: row " +
                                        std::to_string(i) + " has wrong length");
        for (long long k = 0; k < n; ++k) {
            const Json& cell = row[std::size_t(k)];
            if (!cell.is_number())
                throw std::invalid_argument("matrix json: entry (" +
                                            std::to_string(i) + ", " +
                                            std::to_string(k) +
                                            ") is not a number");
            m(int(i), int(k)) = cell.get<double>();
        }
    }
    if (!m.all_finite())
        throw std::invalid_argument("matrix json: non-finite entry");
    for (long long i = 0; i < n; ++i)
        for (long long k = 0; k < i; ++k)
            if (m(int(i), int(k)) != m(int(k), int(i)))
                throw std::invalid_argument(
                    "matrix json: asymmetric at (" + std::to_string(i) + ", " +
                    std::to_string(k) + "); refusing to symmetrize");
    return m;
}

inline CouplingMatrix coupling_from_matrix_json(const Json& j) {
    CouplingMatrix m;
    m.entries = matrix_from_json(j);
    m.size = m.entries.rows();
    m.kind = CouplingKind::File;
    m.validate();
    return m;
}

inline CouplingMatrix load_coupling_file(const std::string& path) {
    return coupling_from_matrix_json(load_json_file(path));
}

inline Json coupling_to_json(const CouplingMatrix& m) {
    Json j;
    j["size"] = m.size;
    j["kind"] = to_string(m.kind);
    if (m.seed)
        j["seed"] = *m.seed;
    else
        j["seed"] = nullptr;
    j["entries"] = rows_to_json(m.entries);
    return j;
}

inline Json spectrum_to_json(const SpectrumSummary& s) {
    Json j;
    j["lambdaMin"] = s.lambda_min;
    j["lambdaMax"] = s.lambda_max;
    if (s.eigenvalues)
        j["eigenvalues"] = *s.eigenvalues;
    else
        j["eigenvalues"] = nullptr;
    j["residual"] = s.residual;
    return j;
}

inline Json certificate_to_json(const LsiCertificate& c) {
    Json j;
    j["spinDimension"] = c.spin_dimension;
    j["shift"] = c.shift;
    j["effectiveNorm"] = c.effective_norm;
    j["singleSpinLsi"] = c.single_spin_lsi;
    if (c.certified_constant)
        j["certifiedConstant"] = *c.certified_constant;
    else
        j["certifiedConstant"] = nullptr;
    if (c.certified_lsi_rate)
        j["certifiedLsiRate"] = *c.certified_lsi_rate;
    else
        j["certifiedLsiRate"] = nullptr;
    j["status"] = to_string(c.status);
    j["failureMargin"] = c.failure_margin;
    return j;
}

inline Json quadrature_to_json(const QuadratureRule& q) {
    Json j;
    j["nodes"] = q.nodes;
    j["weights"] = q.weights;
    return j;
}

inline Json single_spin_to_json(const SingleSpinModel& m) {
    Json j;
    j["n"] = m.n;
    if (m.gamma_lsi)
        j["gammaLsi"] = *m.gamma_lsi;
    else
        j["gammaLsi"] = nullptr;
    j["measureKind"] = to_string(m.measure_kind);
    j["quadrature"] = quadrature_to_json(m.table);
    j["radius"] = m.radius;
    return j;
}

// Density table file for general bounded measures:
// {"radius": R, "nodes": [...], "weights": [...], "gamma": g}.
inline SingleSpinModel single_spin_from_density_json(const Json& j) {
    if (!j.is_object() || !j.contains("radius") || !j.contains("nodes") ||
        !j.contains("weights") || !j.contains("gamma"))
        throw std::invalid_argument(
            "density json must carry \"radius\", \"nodes\", \"weights\", "
            "\"gamma\"");
    const double radius = j["radius"].get<double>();
    const double gamma = j["gamma"].get<double>();
    std::vector<double> nodes = j["nodes"].get<std::vector<double>>();
    std::vector<double> weights = j["weights"].get<std::vector<double>>();
    return general_bounded_model(radius, std::move(nodes), std::move(weights),
                                 gamma);
}

inline Json tilted_moments_to_json(const TiltedMoments& t) {
    Json j;
    j["field"] = t.field;
    j["mean"] = t.mean;
    j["covariance"] = rows_to_json(t.covariance);
    j["logPartition"] = t.log_partition;
    return j;
}

inline Json mean_field_report_to_json(const MeanFieldBoundReport& r) {
    Json j;
    j["rowSupNorm"] = r.row_sup_norm;
    j["impliesCondition"] = r.implies_condition;
    return j;
}

inline Json variance_report_to_json(const VarianceBoundReport& r) {
    Json j;
    j["maxDirectionalVariance"] = r.max_directional_variance;
    j["bound"] = r.bound;
    j["pass"] = r.pass;
    return j;
}

inline Json hessian_report_to_json(const HessianBoundReport& r) {
    Json j;
    j["minEigHess"] = r.min_eig_hess;
    j["lambdaBE"] = r.lambda_be;
    j["pass"] = r.pass;
    j["maxFdDeviation"] = r.max_fd_deviation;
    return j;
}

inline Json gaussian_report_to_json(const GaussianIdentityReport& r) {
    Json j;
    j["maxLogRatioDeviation"] = r.max_log_ratio_deviation;
    j["pass"] = r.pass;
    return j;
}

inline Json potential_table_to_json(const PotentialTable& t) {
    Json j;
    j["psiMax"] = t.psi_max;
    j["radii"] = t.radii;
    j["values"] = t.values;
    return j;
}

inline Json renormalized_to_json(const RenormalizedModel& m) {
    Json j;
    j["c"] = m.c;
    j["B"] = matrix_to_json(m.b);
    j["lambdaBE"] = m.lambda_be;
    j["spinDimension"] = m.spin_dimension;
    j["spin"] = single_spin_to_json(m.spin);
    j["potentialTable"] = potential_table_to_json(m.potential_table);
    j["roundtripError"] = m.roundtrip_error;
    j["maxBEigenvalue"] = m.max_b_eigenvalue;
    j["couplingEigenvalues"] = m.coupling_eigenvalues;
    return j;
}

inline Json duplication_report_to_json(const DuplicationReport& r) {
    Json j;
    j["checked"] = r.checked;
    j["violations"] = r.violations;
    j["minSlack"] = r.min_slack;
    j["pass"] = r.pass;
    return j;
}

inline Json mixture_report_to_json(const MixtureReport& r) {
    Json j;
    j["sampleCount"] = r.sample_count;
    j["pass"] = r.pass;
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json rj;
        rj["observable"] = row.observable;
        rj["exact"] = row.exact;
        rj["estimate"] = row.estimate;
        rj["stdError"] = row.std_error;
        rj["z"] = row.z;
        rows.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline Json trace_to_json(const DynamicsTrace& t) {
    Json j;
    j["observableName"] = t.observable_name;
    j["sweepCount"] = t.sweep_count;
    j["seed"] = t.seed;
    j["model"] = t.model;
    j["samples"] = t.samples;
    return j;
}

inline Json relaxation_estimate_to_json(const RelaxationEstimate& e) {
    Json j;
    j["integratedAutocorrTime"] = e.integrated_autocorr_time;
    j["standardError"] = e.standard_error;
    j["window"] = e.window;
    j["observableMean"] = e.observable_mean;
    return j;
}

inline Json relaxation_cells_to_json(const std::vector<RelaxationCell>& cells) {
    Json arr = Json::array();
    for (const auto& c : cells) {
        Json j;
        j["size"] = c.size;
        j["beta"] = c.beta;
        j["seed"] = c.seed;
        j["tauMagnetization"] = c.tau_magnetization;
        j["tauMagnetizationError"] = c.tau_magnetization_error;
        j["tauEnergy"] = c.tau_energy;
        j["tauEnergyError"] = c.tau_energy_error;
        j["tooShort"] = c.too_short;
        j["requiredLength"] = c.required_length;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline Json goe_sample_to_json(const GoeSample& s, bool with_matrix = false) {
    Json j;
    j["N"] = s.size;
    j["seed"] = s.seed;
    j["lambdaMin"] = s.lambda_min;
    j["lambdaMax"] = s.lambda_max;
    j["edgeSpan"] = s.edge_span;
    if (with_matrix) j["H"] = matrix_to_json(s.h);
    return j;
}

inline Json edge_statistics_to_json(const EdgeStatistics& e) {
    Json j;
    j["meanSpan"] = e.mean_span;
    j["stdSpan"] = e.std_span;
    j["sampleCount"] = e.sample_count;
    j["histogramLow"] = e.histogram_low;
    j["histogramHigh"] = e.histogram_high;
    j["histogram"] = e.histogram;
    return j;
}

inline Json sweep_to_json(const SweepResult& s) {
    Json j;
    j["betaGrid"] = s.beta_grid;
    j["sizes"] = s.sizes;
    j["samplesPerCell"] = s.samples_per_cell;
    j["gamma"] = s.gamma;
    j["seed"] = s.seed;
    j["goeDiagonalVariance"] = "2/N";
    Json cells = Json::array();
    for (const auto& c : s.cells) {
        Json cj;
        cj["beta"] = c.beta;
        cj["size"] = c.size;
        cj["sampleCount"] = c.sample_count;
        cj["certifiedFraction"] = c.certified_fraction;
        cj["meanEdgeSpan"] = c.mean_edge_span;
        cj["meanCertifiedConstant"] = c.mean_certified_constant;
        cells.push_back(std::move(cj));
    }
    j["perCell"] = std::move(cells);
    return j;
}

namespace detail {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

// Four-column view of the renormalized potential: the analytic second radial
// derivative c - c^2 var_parallel(mu^{c r e1}) against a central difference
// of V itself.
inline std::string potential_table_csv(const RenormalizedModel& model,
                                       double max_radius = 4.0, int rows = 81,
                                       double fd_step = 2e-4) {
    if (rows < 2) throw std::invalid_argument("potential_table_csv: rows < 2");
    const SingleSpinModel& spin = model.spin;
    const double c = model.c;
    std::string out = "abs_psi,V,Vpp_analytic,Vpp_fd\n";
    for (int i = 0; i < rows; ++i) {
        const double r = max_radius * double(i) / double(rows - 1);
        const double v = renormalized_potential_radial(spin, c, r);
        std::vector<double> h(std::size_t(spin.n), 0.0);
        h[0] = c * r;
        const TiltedMoments tm = tilted_moments(spin, h);
        const double analytic = c - c * c * tm.covariance(0, 0);
        const double vp = renormalized_potential_radial(spin, c, r + fd_step);
        const double vm =
            renormalized_potential_radial(spin, c, std::abs(r - fd_step));
        const double fd = (vp - 2.0 * v + vm) / (fd_step * fd_step);
        out += detail::csv_num(r) + "," + detail::csv_num(v) + "," +
               detail::csv_num(analytic) + "," + detail::csv_num(fd) + "\n";
    }
    return out;
}

inline std::string trace_csv(const DynamicsTrace& t) {
    std::string out = "sweep," + t.observable_name + "\n";
    for (std::size_t i = 0; i < t.samples.size(); ++i)
        out += std::to_string(i) + "," + detail::csv_num(t.samples[i]) + "\n";
    return out;
}

inline std::string relaxation_cells_csv(
    const std::vector<RelaxationCell>& cells) {
    std::string out =
        "size,beta,seed,tau_magnetization,tau_magnetization_error,"
        "tau_energy,tau_energy_error,too_short,required_length\n";
    for (const auto& c : cells) {
        out += std::to_string(c.size) + "," + detail::csv_num(c.beta) + "," +
               std::to_string(c.seed) + "," +
               detail::csv_num(c.tau_magnetization) + "," +
               detail::csv_num(c.tau_magnetization_error) + "," +
               detail::csv_num(c.tau_energy) + "," +
               detail::csv_num(c.tau_energy_error) + "," +
               (c.too_short ? "1" : "0") + "," +
               std::to_string(c.required_length) + "\n";
    }
    return out;
}

inline std::string sweep_csv(const SweepResult& s) {
    std::string out =
        "beta,size,sample_count,certified_fraction,mean_edge_span,"
        "mean_certified_constant\n";
    for (const auto& c : s.cells) {
        out += detail::csv_num(c.beta) + "," + std::to_string(c.size) + "," +
               std::to_string(c.sample_count) + "," +
               detail::csv_num(c.certified_fraction) + "," +
               detail::csv_num(c.mean_edge_span) + "," +
               detail::csv_num(c.mean_certified_constant) + "\n";
    }
    return out;
}

inline std::string histogram_csv(const EdgeStatistics& e) {
    std::string out = "bin_low,bin_high,count\n";
    const double width = (e.histogram_high - e.histogram_low) /
                         double(e.histogram.size());
    for (std::size_t b = 0; b < e.histogram.size(); ++b) {
        out += detail::csv_num(e.histogram_low + width * double(b)) + "," +
               detail::csv_num(e.histogram_low + width * double(b + 1)) +
               "," + std::to_string(e.histogram[b]) + "\n";
    }
    return out;
}

inline std::string certificate_csv(const LsiCertificate& c) {
    std::string out = "field,value\n";
    out += "spinDimension," + std::to_string(c.spin_dimension) + "\n";
    out += "shift," + detail::csv_num(c.shift) + "\n";
    out += "effectiveNorm," + detail::csv_num(c.effective_norm) + "\n";
    out += "singleSpinLsi," + detail::csv_num(c.single_spin_lsi) + "\n";
    out += std::string("certifiedConstant,") +
           (c.certified_constant ? detail::csv_num(*c.certified_constant)
                                 : std::string("")) +
           "\n";
    out += std::string("certifiedLsiRate,") +
           (c.certified_lsi_rate ? detail::csv_num(*c.certified_lsi_rate)
                                 : std::string("")) +
           "\n";
    out += std::string("status,") + to_string(c.status) + "\n";
    out += "failureMargin," + detail::csv_num(c.failure_margin) + "\n";
    return out;
}

}  // namespace lsicert
