#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "merplan/curtailment.hpp"
#include "merplan/errors.hpp"
#include "merplan/network.hpp"
#include "merplan/reduction.hpp"

namespace merplan {

/// Search grid: total sizes size_min..size_max in steps of size_step, unit
/// counts count_min..count_max, drawn from candidate_nodes.
struct MerGrid {
    double size_min_kw = 500.0;
    double size_max_kw = 1900.0;
    double size_step_kw = 100.0;
    int count_min = 1;
    int count_max = 10;
    std::vector<int> candidate_nodes;

    std::vector<double> sizes() const {
        std::vector<double> out;
        for (int i = 0;; ++i) {
            double s = size_min_kw + size_step_kw * i;
            if (s > size_max_kw * (1.0 + 1e-12)) break;
            out.push_back(s);
        }
        return out;
    }

    std::vector<int> counts() const {
        std::vector<int> out;
        for (int c = count_min; c <= count_max; ++c) out.push_back(c);
        return out;
    }

    void validate() const {
        if (size_step_kw <= 0.0) throw ConfigError("size_step_kw must be positive");
        if (size_min_kw > size_max_kw) throw ConfigError("size_min_kw exceeds size_max_kw");
        double steps = (size_max_kw - size_min_kw) / size_step_kw;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
            throw ConfigError("size range is not divisible by size_step_kw");
        }
        if (count_min < 1) throw ConfigError("count_min must be >= 1");
        if (count_min > count_max) throw ConfigError("count_min exceeds count_max");
        if (candidate_nodes.empty()) throw ConfigError("candidate_nodes is empty");
        if (static_cast<std::size_t>(count_max) > candidate_nodes.size()) {
            throw ConfigError("count_max exceeds number of candidate nodes");
        }
        std::set<int> uniq(candidate_nodes.begin(), candidate_nodes.end());
        if (uniq.size() != candidate_nodes.size()) {
            throw ConfigError("candidate_nodes contains duplicates");
        }
    }
};

struct MerCombo {
    double total_kw = 0.0;
    int count = 0;
    double unit_kw = 0.0;  // total_kw / count, exact real division
};

/// Cartesian product of grid sizes and counts.
inline std::vector<MerCombo> enumerate_mer_grid(const MerGrid& grid) {
    grid.validate();
    std::vector<MerCombo> out;
    for (double total : grid.sizes()) {
        for (int count : grid.counts()) {
            out.push_back({total, count, total / count});
        }
    }
    return out;
}

/// Minimum expected load curtailment per (total size, count) cell, plus the
/// location set attaining it.
struct ElcMatrix {
    std::vector<double> sizes_kw;                           // row labels
    std::vector<int> counts;                                // column labels
    std::vector<std::vector<double>> values;                // [size][count], kW
    std::vector<std::vector<std::vector<int>>> argmin_locations;  // sorted node ids per cell
};

struct MinElcResult {
    double min_elc = 0.0;
    std::vector<int> best_locations;  // sorted node ids
};

namespace detail {

/// Number of count-subsets, saturating at limit+1 to avoid overflow.
inline unsigned long long subset_count(std::size_t n, int count, unsigned long long limit) {
    unsigned long long c = 1;
    for (int i = 1; i <= count; ++i) {
        if (c > (std::numeric_limits<unsigned long long>::max)() / n) return limit + 1;
        c = c * (n - count + i) / i;  // exact: product of i consecutive ints divisible by i!
        if (c > limit) return limit + 1;
    }
    return c;
}

/// Per-scenario lookup tables that make one placement evaluation O(count):
/// island of each candidate node (-1 when it is the grid island), weighted
/// critical load per island, and the no-deployment curtailment.
struct ScenarioTables {
    std::vector<double> probability;          // per scenario
    std::vector<double> base_curtailment;     // sum of non-grid island critical load
    std::vector<std::vector<double>> island_critical;  // [scenario][island]
    std::vector<std::vector<int>> candidate_island;    // [scenario][candidate], -1 = grid
};

inline ScenarioTables build_scenario_tables(const Network& net, const ReducedScenarioSet& reduced,
                                            const ReconfigCache& cache,
                                            const std::vector<int>& candidates) {
    ScenarioTables t;
    const std::size_t k = reduced.scenarios.size();
    t.probability.reserve(k);
    t.base_curtailment.reserve(k);
    t.island_critical.reserve(k);
    t.candidate_island.reserve(k);
    for (const ReducedScenario& rs : reduced.scenarios) {
        auto it = cache.find(rs.scenario.id);
        if (it == cache.end()) {
            throw MissingReconfiguration("no reconfiguration cached for scenario " +
                                         std::to_string(rs.scenario.id));
        }
        const Reconfiguration& rc = it->second;
        std::vector<double> crit(rc.island_count, 0.0);
        for (int node : net.nodes()) {
            const NodeLoad& l = net.load_of(node);
            crit[rc.island_of.at(node)] += l.critical_weight * l.critical_kw;
        }
        const int grid_island = rc.island_of.at(net.source_node());
        double base = 0.0;
        for (int i = 0; i < rc.island_count; ++i) {
            if (i != grid_island) base += crit[i];
        }
        std::vector<int> cand_island(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            int island = rc.island_of.at(candidates[c]);
            cand_island[c] = island == grid_island ? -1 : island;
        }
        t.probability.push_back(rs.probability);
        t.base_curtailment.push_back(base);
        t.island_critical.push_back(std::move(crit));
        t.candidate_island.push_back(std::move(cand_island));
    }
    return t;
}

/// ELC of one placement given the precomputed tables. `subset` holds indices
/// into the candidate list. Equivalent to expected_load_curtailment at the
/// same locations.
inline double evaluate_subset(const ScenarioTables& t, const std::vector<int>& subset,
                              double unit_kw) {
    double elc = 0.0;
    const std::size_t n_scen = t.probability.size();
    int islands[32];
    int units[32];
    for (std::size_t j = 0; j < n_scen; ++j) {
        const std::vector<int>& cand_island = t.candidate_island[j];
        int distinct = 0;
        for (int c : subset) {
            int island = cand_island[c];
            if (island < 0) continue;  // grid island: the unit displaces nothing
            int slot = 0;
            while (slot < distinct && islands[slot] != island) ++slot;
            if (slot == distinct) {
                islands[distinct] = island;
                units[distinct] = 1;
                ++distinct;
            } else {
                ++units[slot];
            }
        }
        double lc = t.base_curtailment[j];
        const std::vector<double>& crit = t.island_critical[j];
        for (int s = 0; s < distinct; ++s) {
            // island turns from isolate into microgrid: replace its full
            // critical load with the capacity shortfall
            lc += std::max(0.0, crit[islands[s]] - unit_kw * units[s]) - crit[islands[s]];
        }
        elc += t.probability[j] * std::max(0.0, lc);
    }
    return elc;
}

/// Visits count-subsets of {0..n-1} in lexicographic order.
template <typename Visit>
inline void for_each_subset(std::size_t n, int count, Visit&& visit) {
    std::vector<int> idx(count);
    for (int i = 0; i < count; ++i) idx[i] = i;
    while (true) {
        visit(const_cast<const std::vector<int>&>(idx));
        int pos = count - 1;
        while (pos >= 0 && idx[pos] == static_cast<int>(n) - count + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < count; ++i) idx[i] = idx[i - 1] + 1;
    }
}

inline MinElcResult min_over_subsets(const ScenarioTables& tables,
                                     const std::vector<int>& candidates, double unit_kw,
                                     int count) {
    MinElcResult best;
    best.min_elc = std::numeric_limits<double>::infinity();
    std::vector<int> best_subset;
    for_each_subset(candidates.size(), count, [&](const std::vector<int>& subset) {
        double elc = evaluate_subset(tables, subset, unit_kw);
        // lexicographic enumeration + strict improvement = ties keep the
        // lexicographically smallest location set
        if (elc < best.min_elc) {
            best.min_elc = elc;
            best_subset = subset;
        }
    });
    best.best_locations.reserve(best_subset.size());
    for (int c : best_subset) best.best_locations.push_back(candidates[c]);
    std::sort(best.best_locations.begin(), best.best_locations.end());
    return best;
}

}  // namespace detail

inline constexpr unsigned long long kDefaultSubsetBudget = 1'000'000;

/// Minimum ELC over every count-subset of the candidate nodes at the given
/// unit size. Exhaustive by construction; refuses to run (rather than
/// silently sampling) when the subset count exceeds the budget.
inline MinElcResult min_elc_for_config(const Network& net, const ReducedScenarioSet& reduced,
                                       const ReconfigCache& reconfig_cache,
                                       const std::vector<int>& candidate_nodes, double unit_kw,
                                       int count,
                                       unsigned long long subset_budget = kDefaultSubsetBudget) {
    if (count < 1) throw ConfigError("count must be >= 1");
    if (count > 31) throw ConfigError("count must be <= 31");
    if (static_cast<std::size_t>(count) > candidate_nodes.size()) {
        throw CountExceedsCandidates("count " + std::to_string(count) + " exceeds " +
                                     std::to_string(candidate_nodes.size()) + " candidates");
    }
    if (unit_kw <= 0.0) throw ConfigError("unit_kw must be positive");
    for (int node : candidate_nodes) {
        if (!net.has_node(node)) {
            throw UnknownNode("candidate node " + std::to_string(node) + " is not in the network");
        }
    }
    if (std::set<int>(candidate_nodes.begin(), candidate_nodes.end()).size() !=
        candidate_nodes.size()) {
        throw ConfigError("candidate_nodes contains duplicates");
    }
    unsigned long long subsets =
        detail::subset_count(candidate_nodes.size(), count, subset_budget);
    if (subsets > subset_budget) {
        throw EnumerationBudgetExceeded(
            "C(" + std::to_string(candidate_nodes.size()) + "," + std::to_string(count) +
            ") exceeds the subset budget of " + std::to_string(subset_budget));
    }

    std::vector<int> candidates = candidate_nodes;
    std::sort(candidates.begin(), candidates.end());
    detail::ScenarioTables tables =
        detail::build_scenario_tables(net, reduced, reconfig_cache, candidates);
    return detail::min_over_subsets(tables, candidates, unit_kw, count);
}

struct BuildOptions {
    int workers = 0;  // 0 = hardware concurrency
    unsigned long long subset_budget = kDefaultSubsetBudget;
};

/// Fills the whole (size, count) grid. Reconfigurations are computed once per
/// reduced scenario and shared by every cell; cells are distributed over a
/// worker pool and each cell is evaluated deterministically, so the matrix is
/// identical for any worker count.
inline ElcMatrix build_min_elc_matrix(const Network& net, const ReducedScenarioSet& reduced,
                                      const MerGrid& grid, const BuildOptions& options = {}) {
    grid.validate();

    ElcMatrix m;
    m.sizes_kw = grid.sizes();
    m.counts = grid.counts();
    m.values.assign(m.sizes_kw.size(), std::vector<double>(m.counts.size(), 0.0));
    m.argmin_locations.assign(m.sizes_kw.size(),
                              std::vector<std::vector<int>>(m.counts.size()));

    std::vector<int> candidates = grid.candidate_nodes;
    std::sort(candidates.begin(), candidates.end());
    for (int node : candidates) {
        if (!net.has_node(node)) {
            throw UnknownNode("candidate node " + std::to_string(node) + " is not in the network");
        }
    }
    for (int count : m.counts) {
        unsigned long long subsets =
            detail::subset_count(candidates.size(), count, options.subset_budget);
        if (subsets > options.subset_budget) {
            throw EnumerationBudgetExceeded(
                "C(" + std::to_string(candidates.size()) + "," + std::to_string(count) +
                ") exceeds the subset budget of " + std::to_string(options.subset_budget));
        }
    }

    const ReconfigCache cache = build_reconfig_cache(net, reduced);
    const detail::ScenarioTables tables =
        detail::build_scenario_tables(net, reduced, cache, candidates);

    struct Cell {
        std::size_t row, col;
    };
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < m.sizes_kw.size(); ++r) {
        for (std::size_t c = 0; c < m.counts.size(); ++c) cells.push_back({r, c});
    }

    unsigned workers = options.workers > 0 ? static_cast<unsigned>(options.workers)
                                           : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, cells.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            const Cell cell = cells[i];
            const double total = m.sizes_kw[cell.row];
            const int count = m.counts[cell.col];
            MinElcResult r = detail::min_over_subsets(tables, candidates, total / count, count);
            m.values[cell.row][cell.col] = r.min_elc;
            m.argmin_locations[cell.row][cell.col] = std::move(r.best_locations);
        }
    };

    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    return m;
}

}  // namespace merplan
