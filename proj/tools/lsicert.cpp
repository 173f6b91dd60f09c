#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsicert/models.hpp"
#include "lsicert/oracle.hpp"
#include "lsicert/parallel.hpp"
#include "lsicert/serialize.hpp"

using namespace lsicert;

namespace {

Json& ensure(Json& cfg, const std::string& key, const Json& def) {
    if (!cfg.contains(key) || cfg[key].is_null()) cfg[key] = def;
    return cfg[key];
}

std::string resolve_out(const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    const char* dir = std::getenv("LSICERT_OUT_DIR");
    if (dir && *dir) return std::string(dir) + "/" + path;
    return path;
}

// The echoed config identifies the experiment; the worker count and output
// path only schedule and place it, so both are stripped to keep artifact
// bytes identical across --workers values and destinations.
void emit(const Json& cfg, Json body, const std::string& csv_body) {
    Json echo = cfg;
    echo.erase("workers");
    echo.erase("out");
    body["config"] = echo;
    std::string text;
    if (cfg.at("format") == "json") {
        text = body.dump(2) + "\n";
    } else {
        text = "# config: " + echo.dump() + "\n" + csv_body;
    }
    if (cfg.contains("out") && cfg["out"].is_string())
        write_text_file(resolve_out(cfg["out"].get<std::string>()), text);
    else
        std::cout << text;
}

const Json& model_spec(const Json& cfg) {
    if (!cfg.contains("model"))
        throw std::invalid_argument(
            "config needs a \"model\" spec (or pass --config)");
    return cfg["model"];
}

SingleSpinModel resolve_spin_model(const Json& cfg) {
    if (cfg.contains("density") && cfg["density"].is_string()) {
        return single_spin_from_density_json(
            load_json_file(cfg["density"].get<std::string>()));
    }
    SingleSpinModel spin = sphere_model(cfg.at("spinDim").get<int>());
    spin.gamma_lsi = cfg.at("gamma").get<double>();
    return spin;
}

int cmd_certify(Json cfg) {
    const CouplingMatrix m =
        build_coupling(model_spec(cfg), cfg.at("seed").get<std::uint64_t>());
    const int n = cfg.at("spinDim").get<int>();
    const double gamma = cfg.at("gamma").get<double>();
    const SpectrumSummary s = spectrum(m);
    const LsiCertificate cert = certify_lsi(s, n, gamma);
    const MeanFieldBoundReport mf = mean_field_bound_check(m, n);

    Json body;
    body["config"] = cfg;
    body["spectrum"] = spectrum_to_json(s);
    body["certificate"] = certificate_to_json(cert);
    body["meanFieldBound"] = mean_field_report_to_json(mf);
    emit(cfg, body, certificate_csv(cert));
    return cert.status == CertificateStatus::Certified ? 0 : 2;
}

int cmd_renormalize(Json cfg) {
    const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    const CouplingMatrix m = build_coupling(model_spec(cfg), seed);
    const int n = cfg.at("spinDim").get<int>();
    const ShiftedCoupling shifted = shift_to_admissible(m);
    const double c = cfg.contains("c") && cfg["c"].is_number()
                         ? cfg["c"].get<double>()
                         : default_smoothing_scale(shifted);
    cfg["c"] = c;

    SingleSpinModel spin = sphere_model(n);
    spin.gamma_lsi = cfg.at("gamma").get<double>();
    const RenormalizedModel model = split_covariance(shifted.matrix, c, spin);
    const HessianBoundReport hess =
        hessian_lower_bound_check(spin, c, standard_field_grid(n));

    Rng rng(substream(seed, "sigma"));
    std::vector<std::vector<double>> sigmas;
    for (int k = 0; k < 20; ++k) {
        std::vector<double> s(std::size_t(m.size));
        for (double& v : s) v = rng.uniform(-2.0, 2.0);
        sigmas.push_back(std::move(s));
    }
    const GaussianIdentityReport gauss =
        gaussian_identity_check(shifted.matrix, c, sigmas, spin);

    Json body;
    body["config"] = cfg;
    body["shift"] = shifted.shift;
    body["span"] = shifted.span;
    body["renormalized"] = renormalized_to_json(model);
    body["hessianCheck"] = hessian_report_to_json(hess);
    body["gaussianCheck"] = gaussian_report_to_json(gauss);
    emit(cfg, body, potential_table_csv(model));
    return hess.pass && gauss.pass ? 0 : 1;
}

int cmd_spin_study(Json cfg) {
    const SingleSpinModel spin = resolve_spin_model(cfg);
    const auto grid = standard_field_grid(spin.n);
    const VarianceBoundReport var = variance_bound_check(spin, grid);

    Json moments = Json::array();
    std::string csv = "field_norm,mean_norm,top_variance,log_partition\n";
    for (const auto& h : grid) {
        const TiltedMoments tm = tilted_moments(spin, h);
        moments.push_back(tilted_moments_to_json(tm));
        double h2 = 0.0, m2 = 0.0;
        for (double v : h) h2 += v * v;
        for (double v : tm.mean) m2 += v * v;
        double top = tm.covariance(0, 0);
        if (spin.n > 1) {
            JacobiOptions opt;
            opt.with_vectors = false;
            top = jacobi_eigen(tm.covariance, opt).values.back();
        }
        csv += detail::csv_num(std::sqrt(h2)) + "," +
               detail::csv_num(std::sqrt(m2)) + "," + detail::csv_num(top) +
               "," + detail::csv_num(tm.log_partition) + "\n";
    }

    Json body;
    body["config"] = cfg;
    body["spin"] = single_spin_to_json(spin);
    body["varianceBound"] = variance_report_to_json(var);
    body["moments"] = std::move(moments);
    emit(cfg, body, csv);
    return var.pass ? 0 : 1;
}

int cmd_simulate(Json cfg) {
    const Json& model = model_spec(cfg);
    const std::string kind = model.at("kind").get<std::string>();
    CouplingFactory factory;
    if (kind == "sk-goe") {
        factory = [](int size, double beta, std::uint64_t cell_seed) {
            return sk_coupling(size, beta, substream(cell_seed, "sk"));
        };
    } else if (kind == "mean-field") {
        factory = [](int size, double beta, std::uint64_t) {
            return mean_field_coupling(size, beta / size);
        };
    } else if (kind == "ferromagnet-lattice") {
        factory = [](int size, double beta, std::uint64_t) {
            return lattice_coupling({size}, beta);
        };
    } else {
        throw std::invalid_argument(
            "simulate needs a size-parametrized model kind "
            "(sk-goe, mean-field, ferromagnet-lattice)");
    }

    RelaxationStudySpec spec;
    spec.sizes = ensure(cfg, "sizes", Json{16, 32}).get<std::vector<int>>();
    spec.betas =
        ensure(cfg, "betas", Json{0.1, 0.2}).get<std::vector<double>>();
    spec.seeds_per_cell = ensure(cfg, "seedsPerCell", 2).get<int>();
    spec.sweeps = ensure(cfg, "sweeps", 20000).get<long>();
    spec.pilot_sweeps = ensure(cfg, "pilotSweeps", 2000).get<long>();
    spec.seed = cfg.at("seed").get<std::uint64_t>();
    const auto cells =
        relaxation_study(spec, factory, cfg.at("workers").get<int>());

    Json body;
    body["config"] = cfg;
    body["cells"] = relaxation_cells_to_json(cells);
    emit(cfg, body, relaxation_cells_csv(cells));
    return 0;
}

int cmd_oracle(Json cfg) {
    const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    const double gamma = cfg.at("gamma").get<double>();
    const int instances = ensure(cfg, "instances", 6).get<int>();
    const int sites = ensure(cfg, "sites", 6).get<int>();
    const double span = ensure(cfg, "span", 0.8).get<double>();
    const int restarts = ensure(cfg, "restarts", 4).get<int>();
    const int samples = ensure(cfg, "mixtureSamples", 40000).get<int>();
    const int funcs = ensure(cfg, "functionsPerField", 200).get<int>();

    bool all_ordered = true;
    Json rows = Json::array();
    std::string csv = "instance,exact_gap,rho_hat,rho_cert,ordered\n";
    for (int i = 0; i < instances; ++i) {
        Rng rng(substream(seed, "instance", std::uint64_t(i)));
        const CouplingMatrix m = random_span_coupling(sites, span, rng);
        const ExactChain chain = enumerate_gibbs(m);
        const GapResult gap = exact_spectral_gap(chain);
        const LsiSearchResult lsi = numeric_lsi_upper_bound(
            chain, restarts, substream(seed, "lsi", std::uint64_t(i)),
            &gap.minimizer);
        const LsiCertificate cert = certify_spectral_gap(m, 1, gamma);
        const double rho_cert =
            cert.certified_lsi_rate ? *cert.certified_lsi_rate : 0.0;
        const bool ordered = rho_cert <= lsi.rho_hat + 1e-6 &&
                             lsi.rho_hat <= gap.gap + 1e-6;
        all_ordered = all_ordered && ordered;
        Json row;
        row["instance"] = i;
        row["exactGap"] = gap.gap;
        row["rhoHat"] = lsi.rho_hat;
        row["rhoCert"] = rho_cert;
        row["status"] = to_string(cert.status);
        row["ordered"] = ordered;
        rows.push_back(std::move(row));
        csv += std::to_string(i) + "," + detail::csv_num(gap.gap) + "," +
               detail::csv_num(lsi.rho_hat) + "," +
               detail::csv_num(rho_cert) + "," + (ordered ? "1" : "0") + "\n";
    }

    std::vector<double> fields;
    for (int k = 0; k < 20; ++k) fields.push_back(-4.0 + 8.0 * k / 19.0);
    const DuplicationReport dup =
        duplication_inequality_check(fields, funcs, substream(seed, "dup"));

    Rng mix_rng(substream(seed, "mixture-model"));
    const CouplingMatrix mix_m = random_span_coupling(3, 0.6, mix_rng);
    const ShiftedCoupling mix_shifted = shift_to_admissible(mix_m);
    const MixtureReport mix = mixture_identity_check(
        mix_shifted.matrix, default_smoothing_scale(mix_shifted), samples,
        substream(seed, "mixture"));

    const bool pass = all_ordered && dup.pass && mix.pass;
    Json body;
    body["config"] = cfg;
    body["instances"] = std::move(rows);
    body["duplication"] = duplication_report_to_json(dup);
    body["mixture"] = mixture_report_to_json(mix);
    body["pass"] = pass;
    emit(cfg, body, csv);
    return pass ? 0 : 1;
}

int cmd_goe_sweep(Json cfg) {
    const auto beta_grid =
        ensure(cfg, "betaGrid", Json{0.1, 0.15, 0.2, 0.25, 0.3, 0.35})
            .get<std::vector<double>>();
    const auto sizes =
        ensure(cfg, "sizes", Json{100, 200, 400}).get<std::vector<int>>();
    const int samples = ensure(cfg, "samplesPerCell", 100).get<int>();
    const SweepResult sweep = sk_certification_sweep(
        beta_grid, sizes, samples,
        substream(cfg.at("seed").get<std::uint64_t>(), "sweep"),
        cfg.at("gamma").get<double>(), cfg.at("workers").get<int>());

    Json body;
    body["config"] = cfg;
    body["sweep"] = sweep_to_json(sweep);
    emit(cfg, body, sweep_csv(sweep));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified log-Sobolev constants for O(n) spin systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_path;
    std::string format = "json";
    int workers = default_worker_count();
    double gamma = 0.0;
    int spin_dim = 1;
    double c_override = 0.0;

    auto* config_opt =
        app.add_option("--config", config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", seed, "root seed");
    auto* out_opt = app.add_option(
        "--out", out_path,
        "output file; relative paths resolve against $LSICERT_OUT_DIR");
    auto* format_opt = app.add_option("--format", format, "json or csv");
    auto* workers_opt =
        app.add_option("--workers", workers, "parallel workers");
    auto* gamma_opt = app.add_option(
        "--gamma", gamma, "single-spin LSI constant (required for n >= 2)");
    auto* spin_opt = app.add_option("--spin-dim", spin_dim, "spin dimension");
    auto* c_opt = app.add_option("--c", c_override, "smoothing scale");

    app.add_subcommand("certify", "spectral-condition LSI certificate");
    app.add_subcommand("renormalize",
                       "one-step Gaussian renormalisation report");
    app.add_subcommand("spin-study", "tilted single-spin moments and bounds");
    app.add_subcommand("simulate", "Glauber relaxation study");
    app.add_subcommand("oracle", "exact small-system cross-checks");
    app.add_subcommand("goe-sweep", "SK certification sweep over beta and N");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        Json cfg = config_opt->count() > 0 ? load_json_file(config_path)
                                           : Json::object();
        if (!cfg.is_object())
            throw std::invalid_argument("config file must hold a JSON object");
        cfg["command"] = cmd;
        if (seed_opt->count() > 0 || !cfg.contains("seed"))
            cfg["seed"] = seed;
        if (out_opt->count() > 0) cfg["out"] = out_path;
        if (format_opt->count() > 0 || !cfg.contains("format"))
            cfg["format"] = format;
        if (cfg["format"] != "json" && cfg["format"] != "csv")
            throw std::invalid_argument("format must be json or csv");
        if (workers_opt->count() > 0 || !cfg.contains("workers"))
            cfg["workers"] = workers;
        if (spin_opt->count() > 0 || !cfg.contains("spinDim"))
            cfg["spinDim"] = spin_dim;
        if (gamma_opt->count() > 0) {
            cfg["gamma"] = gamma;
        } else if (!cfg.contains("gamma")) {
            if (cfg["spinDim"].get<int>() == 1)
                cfg["gamma"] = 4.0;
            else
                throw std::invalid_argument(
                    "spin dimension >= 2 requires an explicit gamma");
        }
        if (c_opt->count() > 0) cfg["c"] = c_override;

        if (cmd == "certify") return cmd_certify(std::move(cfg));
        if (cmd == "renormalize") return cmd_renormalize(std::move(cfg));
        if (cmd == "spin-study") return cmd_spin_study(std::move(cfg));
        if (cmd == "simulate") return cmd_simulate(std::move(cfg));
        if (cmd == "oracle") return cmd_oracle(std::move(cfg));
        if (cmd == "goe-sweep") return cmd_goe_sweep(std::move(cfg));
        throw std::logic_error("unreachable command");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
