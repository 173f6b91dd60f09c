#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "lsicert/serialize.hpp"

using namespace lsicert;
using Catch::Approx;

namespace {

const std::string kDir = "/tmp/lsicert_cli_test";

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
    const char* bin = std::getenv("LSICERT_CLI_BIN");
    REQUIRE(bin != nullptr);
    std::filesystem::create_directories(kDir);
    const std::string out_path = kDir + "/stdout.txt";
    const std::string err_path = kDir + "/stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + bin + " " +
                            args + " > " + out_path + " 2> " + err_path;
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string write_file(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(kDir);
    const std::string path = kDir + "/" + name;
    std::ofstream(path, std::ios::binary) << content;
    return path;
}

std::string certify_config(const std::string& matrix_path) {
    return write_file(
        "cfg_" + std::to_string(std::hash<std::string>{}(matrix_path)) +
            ".json",
        "{\"model\": {\"kind\": \"file\", \"path\": \"" + matrix_path +
            "\"}}");
}

// Structural subset of json schema: type / required / properties / items /
// enum, which is everything the published schemas use.
bool matches_schema(const Json& schema, const Json& value, std::string& why,
                    const std::string& path) {
    if (schema.contains("enum")) {
        for (const auto& allowed : schema["enum"])
            if (value == allowed) return true;
        why = path + ": value not in enum";
        return false;
    }
    if (schema.contains("type")) {
        const auto accepts = [&value](const std::string& t) {
            if (t == "object") return value.is_object();
            if (t == "array") return value.is_array();
            if (t == "string") return value.is_string();
            if (t == "integer") return value.is_number_integer();
            if (t == "number") return value.is_number();
            if (t == "boolean") return value.is_boolean();
            if (t == "null") return value.is_null();
            return false;
        };
        bool ok = false;
        if (schema["type"].is_array()) {
            for (const auto& t : schema["type"])
                ok = ok || accepts(t.get<std::string>());
        } else {
            ok = accepts(schema["type"].get<std::string>());
        }
        if (!ok) {
            why = path + ": wrong type";
            return false;
        }
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"])
            if (!value.contains(key.get<std::string>())) {
                why = path + ": missing " + key.get<std::string>();
                return false;
            }
    }
    if (schema.contains("properties") && value.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items())
            if (value.contains(key) &&
                !matches_schema(sub, value[key], why, path + "." + key))
                return false;
    }
    if (schema.contains("items") && value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i)
            if (!matches_schema(schema["items"], value[i], why,
                                path + "[" + std::to_string(i) + "]"))
                return false;
    }
    return true;
}

void require_schema(const std::string& schema_name, const Json& value) {
    const char* dir = std::getenv("LSICERT_SCHEMA_DIR");
    REQUIRE(dir != nullptr);
    const Json schema = load_json_file(std::string(dir) + "/" + schema_name);
    std::string why;
    const bool ok = matches_schema(schema, value, why, "$");
    INFO(why);
    REQUIRE(ok);
}

}  // namespace

TEST_CASE("certify exit code contract") {
    const std::string ok =
        write_file("m_ok.json", "{\"n\": 2, \"rows\": [[0, 0.4], [0.4, 0]]}");
    const std::string bad =
        write_file("m_bad.json", "{\"n\": 2, \"rows\": [[0, 0.6], [0.6, 0]]}");

    const RunResult certified =
        run_cli("certify --config " + certify_config(ok));
    REQUIRE(certified.exit_code == 0);
    const Json body = Json::parse(certified.out);
    REQUIRE(body["certificate"]["status"] == "certified");
    REQUIRE(body["certificate"]["certifiedConstant"].get<double>() ==
            Approx(4.5).margin(1e-12));
    REQUIRE(body["spectrum"]["lambdaMax"].get<double>() ==
            Approx(0.4).margin(1e-12));

    const RunResult failed = run_cli("certify --config " + certify_config(bad));
    REQUIRE(failed.exit_code == 2);
    const Json fbody = Json::parse(failed.out);
    REQUIRE(fbody["certificate"]["status"] == "failed-spectral-condition");
    REQUIRE(fbody["certificate"]["certifiedConstant"].is_null());

    const RunResult missing = run_cli(
        "certify --config " + certify_config(kDir + "/no_such_matrix.json"));
    REQUIRE(missing.exit_code == 1);
    REQUIRE(missing.err.find("error:") != std::string::npos);
}

TEST_CASE("asymmetric matrix files are rejected") {
    const std::string asym = write_file(
        "m_asym.json", "{\"n\": 2, \"rows\": [[0, 0.5], [0.4, 0]]}");
    const RunResult r = run_cli("certify --config " + certify_config(asym));
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.err.find("asymmetric") != std::string::npos);
}

TEST_CASE("csv format carries the config echo and the certificate") {
    const std::string ok =
        write_file("m_ok2.json", "{\"n\": 2, \"rows\": [[0, 0.4], [0.4, 0]]}");
    const RunResult r =
        run_cli("certify --format csv --config " + certify_config(ok));
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.rfind("# config: ", 0) == 0);
    REQUIRE(r.out.find("\nfield,value\n") != std::string::npos);
    REQUIRE(r.out.find("status,certified") != std::string::npos);
}

TEST_CASE("flags override the config file") {
    const std::string cfg = write_file(
        "cfg_override.json",
        "{\"betaGrid\": [0.1], \"sizes\": [8], \"samplesPerCell\": 3,"
        " \"seed\": 5}");
    const RunResult r =
        run_cli("goe-sweep --seed 9 --config " + cfg);
    REQUIRE(r.exit_code == 0);
    const Json body = Json::parse(r.out);
    REQUIRE(body["config"]["seed"] == 9);
    REQUIRE(body["sweep"]["seed"] != 9);  // named substream, not the raw root
}

TEST_CASE("same config and seed give byte-identical output") {
    const std::string cfg = write_file(
        "cfg_sweep.json",
        "{\"betaGrid\": [0.1, 0.3], \"sizes\": [12], \"samplesPerCell\": 4}");
    const RunResult a = run_cli("goe-sweep --config " + cfg + " --seed 3");
    const RunResult b = run_cli("goe-sweep --config " + cfg + " --seed 3");
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.out == b.out);
    const RunResult c = run_cli("goe-sweep --config " + cfg + " --seed 4");
    REQUIRE(c.out != a.out);
}

TEST_CASE("worker count never changes the artifact") {
    const std::string cfg = write_file(
        "cfg_workers.json",
        "{\"betaGrid\": [0.1, 0.2], \"sizes\": [10, 14],"
        " \"samplesPerCell\": 5}");
    const RunResult one =
        run_cli("goe-sweep --config " + cfg + " --workers 1");
    const RunResult four =
        run_cli("goe-sweep --config " + cfg + " --workers 4");
    REQUIRE(one.exit_code == 0);
    REQUIRE(one.out == four.out);
}

TEST_CASE("out flag resolves against the output directory env var") {
    const std::string ok =
        write_file("m_ok3.json", "{\"n\": 2, \"rows\": [[0, 0.4], [0.4, 0]]}");
    std::filesystem::create_directories(kDir + "/outdir");
    std::filesystem::remove(kDir + "/outdir/cert.json");
    const RunResult r =
        run_cli("certify --out cert.json --config " + certify_config(ok),
                "LSICERT_OUT_DIR=" + kDir + "/outdir");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.empty());
    const Json body = Json::parse(slurp(kDir + "/outdir/cert.json"));
    REQUIRE(body["certificate"]["status"] == "certified");
    REQUIRE_FALSE(body["config"].contains("out"));
}

TEST_CASE("spin dimension two requires an explicit gamma") {
    const RunResult bare = run_cli("spin-study --spin-dim 2");
    REQUIRE(bare.exit_code == 1);
    REQUIRE(bare.err.find("gamma") != std::string::npos);
    const RunResult ok = run_cli("spin-study --spin-dim 2 --gamma 2.0");
    REQUIRE(ok.exit_code == 0);
    const Json body = Json::parse(ok.out);
    REQUIRE(body["varianceBound"]["pass"] == true);
    REQUIRE(body["varianceBound"]["bound"].get<double>() ==
            Approx(0.5).margin(1e-12));
}

TEST_CASE("simulate emits the relaxation table") {
    const std::string cfg = write_file(
        "cfg_sim.json",
        "{\"model\": {\"kind\": \"sk-goe\"}, \"sizes\": [8],"
        " \"betas\": [0.1], \"seedsPerCell\": 1, \"sweeps\": 3000,"
        " \"pilotSweeps\": 500}");
    const RunResult r = run_cli("simulate --format csv --config " + cfg);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.find("size,beta,seed,tau_magnetization") !=
            std::string::npos);
    const RunResult j = run_cli("simulate --config " + cfg);
    const Json body = Json::parse(j.out);
    REQUIRE(body["cells"].size() == 1);
    REQUIRE(body["cells"][0]["tooShort"] == false);
}

TEST_CASE("renormalize reports the checks and the potential csv") {
    const std::string ok =
        write_file("m_ok4.json", "{\"n\": 2, \"rows\": [[0, 0.4], [0.4, 0]]}");
    const RunResult r =
        run_cli("renormalize --config " + certify_config(ok));
    REQUIRE(r.exit_code == 0);
    const Json body = Json::parse(r.out);
    REQUIRE(body["hessianCheck"]["pass"] == true);
    REQUIRE(body["gaussianCheck"]["pass"] == true);
    REQUIRE(body["renormalized"]["B"]["n"] == 2);
    REQUIRE(body["config"]["c"].get<double>() > 0.8);
    const RunResult csv =
        run_cli("renormalize --format csv --config " + certify_config(ok));
    REQUIRE(csv.out.find("abs_psi,V,Vpp_analytic,Vpp_fd") !=
            std::string::npos);
}

TEST_CASE("json outputs validate against the published schemas") {
    const std::string ok =
        write_file("m_ok5.json", "{\"n\": 2, \"rows\": [[0, 0.4], [0.4, 0]]}");
    const RunResult cert = run_cli("certify --config " + certify_config(ok));
    require_schema("certificate.json", Json::parse(cert.out));
    const std::string bad =
        write_file("m_bad5.json", "{\"n\": 2, \"rows\": [[0, 0.6], [0.6, 0]]}");
    const RunResult failed =
        run_cli("certify --config " + certify_config(bad));
    require_schema("certificate.json", Json::parse(failed.out));

    const std::string sweep_cfg = write_file(
        "cfg_schema_sweep.json",
        "{\"betaGrid\": [0.1], \"sizes\": [8], \"samplesPerCell\": 3}");
    const RunResult sweep = run_cli("goe-sweep --config " + sweep_cfg);
    require_schema("sweep.json", Json::parse(sweep.out));

    const std::string sim_cfg = write_file(
        "cfg_schema_sim.json",
        "{\"model\": {\"kind\": \"mean-field\"}, \"sizes\": [6],"
        " \"betas\": [0.1], \"seedsPerCell\": 1, \"sweeps\": 2500,"
        " \"pilotSweeps\": 400}");
    const RunResult sim = run_cli("simulate --config " + sim_cfg);
    require_schema("relaxation.json", Json::parse(sim.out));
}

TEST_CASE("help exits cleanly and unknown commands fail") {
    REQUIRE(run_cli("--help").exit_code == 0);
    REQUIRE(run_cli("frobnicate").exit_code == 1);
}
