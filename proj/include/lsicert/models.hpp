#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsicert/coupling.hpp"
#include "lsicert/goe.hpp"
#include "lsicert/random.hpp"
#include "lsicert/serialize.hpp"

namespace lsicert {

// Builds a coupling matrix from a model spec like
//   {"kind": "mean-field", "size": 8, "strength": 0.05}
//   {"kind": "ferromagnet-lattice", "dims": [4, 4], "strength": 0.1}
//   {"kind": "sk-goe", "size": 100, "beta": 0.2}
//   {"kind": "file", "path": "coupling.json"}
// Random kinds draw their seed from the named "model" substream of the root
// seed so other commands never consume from the same stream.
inline CouplingMatrix build_coupling(const Json& spec, std::uint64_t root_seed) {
    if (!spec.is_object() || !spec.contains("kind"))
        throw std::invalid_argument("model spec must carry \"kind\"");
    const std::string kind = spec["kind"].get<std::string>();

    auto require = [&spec, &kind](const char* key) -> const Json& {
        if (!spec.contains(key))
            throw std::invalid_argument("model spec for kind \"" + kind +
                                        "\" needs \"" + key + "\"");
        return spec[key];
    };

    if (kind == "mean-field") {
        return mean_field_coupling(require("size").get<int>(),
                                   require("strength").get<double>());
    }
    if (kind == "ferromagnet-lattice") {
        return lattice_coupling(require("dims").get<std::vector<int>>(),
                                require("strength").get<double>());
    }
    if (kind == "sk-goe") {
        return sk_coupling(require("size").get<int>(),
                           require("beta").get<double>(),
                           substream(root_seed, "model"));
    }
    if (kind == "file") {
        return load_coupling_file(require("path").get<std::string>());
    }
    throw std::invalid_argument("unknown model kind \"" + kind + "\"");
}

// Random symmetric zero-diagonal coupling rescaled to an exact spectral span.
inline CouplingMatrix random_span_coupling(int sites, double span, Rng& rng) {
    if (sites < 2)
        throw std::invalid_argument("random_span_coupling: need >= 2 sites");
    if (!(span > 0.0))
        throw std::invalid_argument("random_span_coupling: span must be > 0");
    Matrix e(sites);
    for (int i = 0; i < sites; ++i)
        for (int j = 0; j < i; ++j) {
            const double v = rng.normal();
            e(i, j) = v;
            e(j, i) = v;
        }
    CouplingMatrix m{sites, e, CouplingKind::File, {}};
    const SpectrumSummary s = spectrum(m, false);
    const double current = s.lambda_max - s.lambda_min;
    if (!(current > 1e-9))
        throw std::runtime_error("random_span_coupling: degenerate draw");
    const double scale = span / current;
    for (int i = 0; i < sites; ++i)
        for (int j = 0; j < sites; ++j) m.entries(i, j) *= scale;
    return m;
}

}  // namespace lsicert
