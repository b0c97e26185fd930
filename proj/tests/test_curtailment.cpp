#include "merplan/curtailment.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace merplan;
namespace ts = testing_support;

namespace {

MerPlacement placement(double unit, std::initializer_list<int> nodes) {
    MerPlacement p;
    p.unit_size_kw = unit;
    p.locations = std::set<int>(nodes);
    return p;
}

const IslandReport& report_for_node(const Network& net, const Reconfiguration& rc,
                                    const std::vector<IslandReport>& reports, int node) {
    return reports.at(rc.island_of.at(node));
}

}  // namespace

TEST(IslandClassification, GoldenOutageScenario) {
    Network net = ts::fixture_network();
    Reconfiguration rc = kruskal_spanning_forest(net, {3, 6, 15, 19, 25, 30, 32});
    auto reports = classify_islands(net, rc, placement(300.0, {6, 11, 15, 22}));
    ASSERT_EQ(reports.size(), 5u);

    const IslandReport& grid = report_for_node(net, rc, reports, 1);
    EXPECT_EQ(grid.kind, IslandKind::grid);
    EXPECT_DOUBLE_EQ(grid.curtailed_kw, 0.0);
    EXPECT_EQ(grid.island, 0);

    const IslandReport& mg1 = report_for_node(net, rc, reports, 4);  // {4,5,6}
    EXPECT_EQ(mg1.kind, IslandKind::microgrid);
    EXPECT_DOUBLE_EQ(mg1.critical_load_kw, 150.0);
    EXPECT_DOUBLE_EQ(mg1.mer_capacity_kw, 300.0);
    EXPECT_DOUBLE_EQ(mg1.curtailed_kw, 0.0);

    const IslandReport& mg2 = report_for_node(net, rc, reports, 7);  // {7..15,20,21,22}
    EXPECT_EQ(mg2.kind, IslandKind::microgrid);
    EXPECT_DOUBLE_EQ(mg2.critical_load_kw, 650.0);
    EXPECT_DOUBLE_EQ(mg2.mer_capacity_kw, 900.0);  // three units land here
    EXPECT_DOUBLE_EQ(mg2.curtailed_kw, 0.0);

    const IslandReport& il1 = report_for_node(net, rc, reports, 31);  // {31,32}
    EXPECT_EQ(il1.kind, IslandKind::isolate);
    EXPECT_DOUBLE_EQ(il1.curtailed_kw, 0.0);  // no critical load there

    const IslandReport& il2 = report_for_node(net, rc, reports, 16);  // {16,17,18,33}
    EXPECT_EQ(il2.kind, IslandKind::isolate);
    EXPECT_DOUBLE_EQ(il2.critical_load_kw, 75.0);
    EXPECT_DOUBLE_EQ(il2.curtailed_kw, 75.0);

    EXPECT_DOUBLE_EQ(load_curtailment(net, rc, placement(300.0, {6, 11, 15, 22})), 75.0);
}

TEST(IslandClassification, NoOutagesMeansOneGridIslandAndNoCurtailment) {
    Network net = ts::fixture_network();
    Reconfiguration rc = kruskal_spanning_forest(net, {});
    auto reports = classify_islands(net, rc, placement(100.0, {5}));
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].kind, IslandKind::grid);
    EXPECT_DOUBLE_EQ(load_curtailment(net, rc, placement(100.0, {5})), 0.0);
}

TEST(IslandClassification, SingletonIsolateCurtailsItsOwnCriticalLoad) {
    Network net = ts::fixture_network();
    std::vector<int> ids = net.branch_ids();
    Reconfiguration rc = kruskal_spanning_forest(net, std::set<int>(ids.begin(), ids.end()));
    auto reports = classify_islands(net, rc, placement(300.0, {5}));
    const IslandReport& node18 = report_for_node(net, rc, reports, 18);
    EXPECT_EQ(node18.kind, IslandKind::isolate);
    EXPECT_DOUBLE_EQ(node18.curtailed_kw, 45.0);
    EXPECT_EQ(node18.nodes, (std::vector<int>{18}));
}

TEST(IslandClassification, MicrogridDeficitIsCappedAtZero) {
    // toy island {5} carries 25 kW critical; outaging branches 4, 8 and tie 12
    // leaves node 5 with only the MER
    Network net = ts::toy_network();
    Reconfiguration rc = kruskal_spanning_forest(net, {4, 8, 12});
    double with_40 = load_curtailment(net, rc, placement(40.0, {5}));
    EXPECT_DOUBLE_EQ(with_40, 0.0);  // 40 > 25, surplus does not go negative
    double with_10 = load_curtailment(net, rc, placement(10.0, {5}));
    EXPECT_DOUBLE_EQ(with_10, 15.0);
}

TEST(IslandClassification, SingleMicrogridPartialService) {
    Network net = ts::toy_network();
    Reconfiguration rc = kruskal_spanning_forest(net, {2, 6, 12, 13});
    // island {3,4,5,9,10,11,12} holds 145 kW critical and gets the one unit;
    // island {7,8} is an isolate carrying 60 kW
    double lc = load_curtailment(net, rc, placement(40.0, {10}));
    EXPECT_DOUBLE_EQ(lc, (145.0 - 40.0) + 60.0);
}

TEST(IslandClassification, PlacementValidation) {
    Network net = ts::toy_network();
    Reconfiguration rc = kruskal_spanning_forest(net, {});
    EXPECT_THROW(classify_islands(net, rc, placement(100.0, {99})), UnknownNode);
    EXPECT_THROW(classify_islands(net, rc, placement(0.0, {5})), ConfigError);
    EXPECT_THROW(classify_islands(net, rc, placement(-10.0, {5})), ConfigError);
}

TEST(ExpectedCurtailment, DegenerateAndAveragedCases) {
    Network net = ts::fixture_network();
    auto golden = ts::scenario(0, {3, 6, 15, 19, 25, 30, 32});

    auto one = ts::reduced_set({{golden, 1.0}});
    ReconfigCache cache = build_reconfig_cache(net, one);
    EXPECT_DOUBLE_EQ(
        expected_load_curtailment(net, one, placement(300.0, {6, 11, 15, 22}), cache), 75.0);

    // two scenarios, equal odds: all-out (isolates everything critical except
    // MER-backed nodes) averaged against no-outage
    auto all_ids = net.branch_ids();
    auto worst = ts::scenario(1, {});
    worst.out_branches = std::set<int>(all_ids.begin(), all_ids.end());
    auto calm = ts::scenario(2, {});
    auto two = ts::reduced_set({{worst, 0.5}, {calm, 0.5}});
    ReconfigCache cache2 = build_reconfig_cache(net, two);
    MerPlacement at7 = placement(200.0, {7});
    // all-out: total critical 1265 minus 200 served at node 7 = 1065; calm: 0
    EXPECT_DOUBLE_EQ(expected_load_curtailment(net, two, at7, cache2), 0.5 * 1065.0);
}

TEST(ExpectedCurtailment, FullCoverageReachesZero) {
    Network net = ts::toy_network();
    auto reduced = ts::reduced_set({
        {ts::scenario(0, {2, 6}), 0.4},
        {ts::scenario(1, {4, 8, 12}), 0.6},
    });
    ReconfigCache cache = build_reconfig_cache(net, reduced);
    // one 205 kW unit at node 5 serves every islanded critical node in both
    // scenarios (205 covers the whole lateral island; node 5 alone needs 25)
    EXPECT_DOUBLE_EQ(
        expected_load_curtailment(net, reduced, placement(205.0, {5}), cache), 0.0);
}

TEST(ExpectedCurtailment, MissingReconfigurationIsAnError) {
    Network net = ts::toy_network();
    auto reduced = ts::reduced_set({{ts::scenario(0, {2}), 1.0}});
    ReconfigCache empty_cache;
    EXPECT_THROW(expected_load_curtailment(net, reduced, placement(50.0, {5}), empty_cache),
                 MissingReconfiguration);
}

TEST(ExpectedCurtailment, LinearInTheProbabilityVector) {
    Network net = ts::toy_network();
    auto s0 = ts::scenario(0, {2, 6});
    auto s1 = ts::scenario(1, {4, 8, 12});
    auto pa = ts::reduced_set({{s0, 1.0}, {s1, 0.0}});
    auto pb = ts::reduced_set({{s0, 0.0}, {s1, 1.0}});
    auto mix = ts::reduced_set({{s0, 0.3}, {s1, 0.7}});
    ReconfigCache cache = build_reconfig_cache(net, mix);
    MerPlacement p = placement(60.0, {7, 10});
    double ea = expected_load_curtailment(net, pa, p, cache);
    double eb = expected_load_curtailment(net, pb, p, cache);
    double em = expected_load_curtailment(net, mix, p, cache);
    EXPECT_NEAR(em, 0.3 * ea + 0.7 * eb, 1e-12);
}

TEST(CurtailmentProperties, BoundsAndMonotonicityOnRandomInputs) {
    Network net = ts::fixture_network();
    std::mt19937_64 gen(31337);
    const double total_critical = net.total_critical_kw();
    for (int trial = 0; trial < 50; ++trial) {
        std::set<int> outaged;
        for (const Branch& b : net.branches()) {
            if (uniform01(gen) < 0.3) outaged.insert(b.id);
        }
        Reconfiguration rc = kruskal_spanning_forest(net, outaged);

        MerPlacement base;
        base.unit_size_kw = 25.0 + 500.0 * uniform01(gen);
        const auto& nodes = net.nodes();
        int picks = 1 + static_cast<int>(gen() % 5);
        while (static_cast<int>(base.locations.size()) < picks) {
            base.locations.insert(nodes[gen() % nodes.size()]);
        }

        double lc = load_curtailment(net, rc, base);
        EXPECT_GE(lc, 0.0);
        EXPECT_LE(lc, total_critical);

        // cross-check against the straight-line oracle
        double want = oracle::load_curtailment(net, outaged, base.locations, base.unit_size_kw);
        EXPECT_NEAR(lc, want, 1e-9);

        MerPlacement bigger = base;
        bigger.unit_size_kw *= 1.5;
        EXPECT_LE(load_curtailment(net, rc, bigger), lc);

        MerPlacement wider = base;
        wider.locations.insert(nodes[gen() % nodes.size()]);
        EXPECT_LE(load_curtailment(net, rc, wider), lc);

        // grid island never contributes
        auto reports = classify_islands(net, rc, base);
        EXPECT_EQ(reports[0].kind, IslandKind::grid);
        EXPECT_DOUBLE_EQ(reports[0].curtailed_kw, 0.0);
    }
}
