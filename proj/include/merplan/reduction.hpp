#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "merplan/errors.hpp"
#include "merplan/fragility.hpp"
#include "merplan/rng.hpp"

namespace merplan {

struct ReducedScenario {
    OutageScenario scenario;  // a member of the input population (medoid)
    double probability = 0.0;
};

struct ReductionStats {
    int requested_k = 0;
    int cluster_count = 0;  // after empty clusters are dropped
    int iterations = 0;
    bool converged = false;
    std::vector<double> inertia_history;  // within-cluster squared distance per iteration
};

/// K representative scenarios with probabilities summing to 1. Probabilities
/// are cluster frequencies; fewer than k entries remain when clusters end
/// empty (see stats.cluster_count).
struct ReducedScenarioSet {
    std::vector<ReducedScenario> scenarios;  // ascending scenario id
    int k = 0;                               // requested cluster count
    ReductionStats stats;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

}  // namespace detail

/// Lloyd k-means over the 0/1 branch-status vectors with squared Euclidean
/// distance. Centers are seeded by greedy spread (first uniform, then
/// proportional to squared distance from the nearest chosen center). Each
/// final cluster is reported as its medoid: the member scenario closest to
/// the cluster centroid. Ties go to the lowest center index / lowest
/// scenario id, making the result a pure function of (population, k, seed).
inline ReducedScenarioSet reduce_scenarios(const std::vector<OutageScenario>& population, int k,
                                           std::uint64_t seed) {
    if (population.empty()) throw EmptyPopulation("scenario population is empty");
    if (k < 1) throw ConfigError("k must be >= 1");

    const std::size_t n = population.size();

    // Dense 0/1 vectors over the branches that appear anywhere in the
    // population. Branches outside this universe are 0 in every scenario and
    // cannot affect distances.
    std::vector<int> universe;
    for (const OutageScenario& sc : population) {
        universe.insert(universe.end(), sc.out_branches.begin(), sc.out_branches.end());
    }
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    const std::size_t dim = universe.size();

    std::vector<std::vector<double>> points(n, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t d = 0;
        for (int branch : universe) {
            points[i][d++] = population[i].out_branches.count(branch) ? 1.0 : 0.0;
        }
    }

    const std::size_t kk = static_cast<std::size_t>(k);
    std::mt19937_64 gen(seed);

    // Greedy spread seeding.
    std::vector<std::vector<double>> centers;
    centers.reserve(kk);
    centers.push_back(points[uniform_index(gen, n)]);
    std::vector<double> nearest_d2(n);
    for (std::size_t i = 0; i < n; ++i) nearest_d2[i] = detail::sq_dist(points[i], centers[0]);
    while (centers.size() < kk) {
        double total = 0.0;
        for (double d : nearest_d2) total += d;
        std::size_t pick;
        if (total > 0.0) {
            double r = uniform01(gen) * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += nearest_d2[i];
                if (r < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            // all points coincide with a chosen center; duplicates are fine,
            // the extra clusters simply end up empty
            pick = uniform_index(gen, n);
        }
        centers.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) {
            nearest_d2[i] = std::min(nearest_d2[i], detail::sq_dist(points[i], centers.back()));
        }
    }

    // Lloyd iterations: assign to nearest center (ties to the lowest center
    // index), then move each center to the mean of its members. Empty
    // clusters keep their previous center.
    std::vector<std::size_t> assign(n, 0);
    ReductionStats stats;
    stats.requested_k = k;
    constexpr int kMaxIterations = 300;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < centers.size(); ++c) {
                double d2 = detail::sq_dist(points[i], centers[c]);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            inertia += best_d2;
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        stats.inertia_history.push_back(inertia);
        stats.iterations = iter + 1;
        if (!changed && iter > 0) {
            stats.converged = true;
            break;
        }

        std::vector<std::vector<double>> sums(kk, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> sizes(kk, 0);
        for (std::size_t i = 0; i < n; ++i) {  // fixed scenario order
            ++sizes[assign[i]];
            for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += points[i][d];
        }
        for (std::size_t c = 0; c < kk; ++c) {
            if (sizes[c] == 0) continue;
            for (std::size_t d = 0; d < dim; ++d) {
                centers[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
            }
        }
    }

    // Medoid per non-empty cluster; probability = cluster frequency.
    ReducedScenarioSet out;
    out.k = k;
    for (std::size_t c = 0; c < kk; ++c) {
        std::size_t medoid = n;
        double best_d2 = std::numeric_limits<double>::infinity();
        std::size_t members = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (assign[i] != c) continue;
            ++members;
            double d2 = detail::sq_dist(points[i], centers[c]);
            if (d2 < best_d2 ||
                (d2 == best_d2 && population[i].id < population[medoid].id)) {
                best_d2 = d2;
                medoid = i;
            }
        }
        if (members == 0) continue;
        out.scenarios.push_back(
            {population[medoid], static_cast<double>(members) / static_cast<double>(n)});
    }
    std::sort(out.scenarios.begin(), out.scenarios.end(),
              [](const ReducedScenario& a, const ReducedScenario& b) {
                  return a.scenario.id < b.scenario.id;
              });
    stats.cluster_count = static_cast<int>(out.scenarios.size());
    out.stats = std::move(stats);
    return out;
}

}  // namespace merplan
