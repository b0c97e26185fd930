#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "merplan/errors.hpp"
#include "merplan/network.hpp"
#include "merplan/rng.hpp"

namespace merplan {

/// Wind fragility curve parameters shared by all lines. Failure probability
/// is p_normal below omega_crl, rises linearly to 1 at omega_cpse, and is 1
/// beyond.
struct FragilityParams {
    double p_normal = 0.01;
    double omega_crl = 30.0;   // m/s, onset of wind-driven failures
    double omega_cpse = 55.0;  // m/s, certain collapse

    void validate() const {
        if (p_normal < 0.0 || p_normal > 1.0) {
            throw ConfigError("p_normal must be in [0,1]");
        }
        if (!(0.0 < omega_crl && omega_crl < omega_cpse)) {
            throw ConfigError("require 0 < omega_crl < omega_cpse");
        }
    }
};

/// One sampled realization of the hazard: the set of branches that failed.
struct OutageScenario {
    int id = 0;
    std::set<int> out_branches;
};

inline double line_failure_probability(const FragilityParams& params, double wind_speed_ms) {
    params.validate();
    if (wind_speed_ms < params.omega_crl) return params.p_normal;
    if (wind_speed_ms >= params.omega_cpse) return 1.0;
    double frac = (wind_speed_ms - params.omega_crl) / (params.omega_cpse - params.omega_crl);
    return params.p_normal + (1.0 - params.p_normal) * frac;
}

/// Samples `count` outage scenarios. Each branch fails independently with
/// line_failure_probability(params, wind). Draws use a per-scenario
/// mt19937_64 substream and visit branches in ascending id order, so the
/// output is bit-reproducible from the seed and independent of how scenarios
/// are distributed over workers.
///
/// With source_can_island set, the substation connection is sampled as one
/// extra fragile element (drawn after the branches); when it fails, every
/// branch incident to the source node is added to the outage set.
inline std::vector<OutageScenario> generate_scenarios(const Network& net,
                                                      const FragilityParams& params,
                                                      double wind_speed_ms, int count,
                                                      std::uint64_t seed,
                                                      bool source_can_island = false) {
    if (count < 1) throw ConfigError("scenario count must be >= 1");
    const double p = line_failure_probability(params, wind_speed_ms);

    std::vector<int> source_incident;
    if (source_can_island) {
        for (const Branch& b : net.branches()) {
            if (b.from_node == net.source_node() || b.to_node == net.source_node()) {
                source_incident.push_back(b.id);
            }
        }
    }

    std::vector<OutageScenario> scenarios(count);
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 gen(substream_seed(seed, static_cast<std::uint64_t>(i)));
        OutageScenario& sc = scenarios[i];
        sc.id = i;
        for (const Branch& b : net.branches()) {  // ascending id
            if (uniform01(gen) < p) sc.out_branches.insert(b.id);
        }
        if (source_can_island && uniform01(gen) < p) {
            sc.out_branches.insert(source_incident.begin(), source_incident.end());
        }
    }
    return scenarios;
}

}  // namespace merplan
