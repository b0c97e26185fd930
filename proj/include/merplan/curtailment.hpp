#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "merplan/errors.hpp"
#include "merplan/network.hpp"
#include "merplan/reduction.hpp"

namespace merplan {

/// A fleet of identical movable units: one unit of unit_size_kw at each
/// listed node.
struct MerPlacement {
    double unit_size_kw = 0.0;
    std::set<int> locations;
};

enum class IslandKind { grid, microgrid, isolate };

inline const char* to_string(IslandKind k) {
    switch (k) {
        case IslandKind::grid: return "grid";
        case IslandKind::microgrid: return "microgrid";
        case IslandKind::isolate: return "isolate";
    }
    return "?";
}

struct IslandReport {
    int island = 0;
    IslandKind kind = IslandKind::isolate;
    double critical_load_kw = 0.0;
    double mer_capacity_kw = 0.0;
    double curtailed_kw = 0.0;
    std::vector<int> nodes;  // ascending
};

/// Reconfigurations keyed by scenario id.
using ReconfigCache = std::map<int, Reconfiguration>;

inline ReconfigCache build_reconfig_cache(const Network& net, const ReducedScenarioSet& reduced) {
    ReconfigCache cache;
    for (const ReducedScenario& rs : reduced.scenarios) {
        cache.emplace(rs.scenario.id,
                      kruskal_spanning_forest(net, rs.scenario.out_branches, rs.scenario.id));
    }
    return cache;
}

/// One report per island of the reconfigured scenario. The island holding the
/// source is served by the grid and sheds nothing. A non-grid island with at
/// least one unit is a microgrid and sheds the critical load its aggregate
/// capacity cannot cover; without a unit it is an isolate and sheds all of
/// its critical load.
inline std::vector<IslandReport> classify_islands(const Network& net,
                                                  const Reconfiguration& reconfig,
                                                  const MerPlacement& placement) {
    if (placement.unit_size_kw <= 0.0) throw ConfigError("unit_size_kw must be positive");
    for (int node : placement.locations) {
        if (!net.has_node(node)) {
            throw UnknownNode("placement references unknown node " + std::to_string(node));
        }
    }

    std::vector<IslandReport> reports(reconfig.island_count);
    for (int i = 0; i < reconfig.island_count; ++i) reports[i].island = i;

    std::vector<int> units(reconfig.island_count, 0);
    for (int node : placement.locations) ++units[reconfig.island_of.at(node)];

    for (int node : net.nodes()) {
        int island = reconfig.island_of.at(node);
        const NodeLoad& l = net.load_of(node);
        reports[island].critical_load_kw += l.critical_weight * l.critical_kw;
        reports[island].nodes.push_back(node);
    }

    const int grid_island = reconfig.island_of.at(net.source_node());
    for (int i = 0; i < reconfig.island_count; ++i) {
        IslandReport& r = reports[i];
        r.mer_capacity_kw = placement.unit_size_kw * units[i];
        if (i == grid_island) {
            r.kind = IslandKind::grid;
            r.curtailed_kw = 0.0;
        } else if (units[i] > 0) {
            r.kind = IslandKind::microgrid;
            r.curtailed_kw = std::max(0.0, r.critical_load_kw - r.mer_capacity_kw);
        } else {
            r.kind = IslandKind::isolate;
            r.curtailed_kw = r.critical_load_kw;
        }
    }
    return reports;
}

/// Critical load curtailment (kW) of one reconfigured scenario under one
/// placement: the sum of island shortfalls.
inline double load_curtailment(const Network& net, const Reconfiguration& reconfig,
                               const MerPlacement& placement) {
    double total = 0.0;
    for (const IslandReport& r : classify_islands(net, reconfig, placement)) {
        total += r.curtailed_kw;
    }
    return total;
}

/// Probability-weighted curtailment over the reduced scenario set.
/// Accumulates in ascending scenario id order so the total is reproducible
/// regardless of how callers parallelize.
inline double expected_load_curtailment(const Network& net, const ReducedScenarioSet& reduced,
                                        const MerPlacement& placement,
                                        const ReconfigCache& reconfig_cache) {
    double elc = 0.0;
    for (const ReducedScenario& rs : reduced.scenarios) {  // ascending scenario id
        auto it = reconfig_cache.find(rs.scenario.id);
        if (it == reconfig_cache.end()) {
            throw MissingReconfiguration("no reconfiguration cached for scenario " +
                                         std::to_string(rs.scenario.id));
        }
        elc += rs.probability * load_curtailment(net, it->second, placement);
    }
    return elc;
}

}  // namespace merplan
