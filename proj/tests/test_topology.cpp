#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>

#include "iotddos/topology.hpp"

using namespace iotddos;

namespace {

std::vector<NodeProfile> nodes_at(const std::vector<double>& xs) {
    std::vector<NodeProfile> out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        NodeProfile p;
        p.node_id = static_cast<int>(i);
        p.lat = 0;
        p.lng = xs[i];
        out.push_back(p);
    }
    return out;
}

// Table with explicit per-node packet series (all nodes share the grid).
TrafficTable table_from_series(const std::vector<std::vector<double>>& series) {
    TrafficTable t;
    for (std::size_t node = 0; node < series.size(); ++node) {
        for (std::size_t slot = 0; slot < series[node].size(); ++slot) {
            TrafficRow r;
            r.node_id = static_cast<int>(node);
            r.time = static_cast<Timestamp>(slot) * kSlotSeconds;
            r.packet = series[node][slot];
            r.active = r.packet > 0;
            t.rows.push_back(r);
        }
    }
    return t;
}

bool has_edge(const EdgeSet& e, int a, int b) {
    return std::find(e.edges.begin(), e.edges.end(), std::make_pair(a, b)) !=
           e.edges.end();
}

}  // namespace

TEST_CASE("distance p2p on a line") {
    const auto profiles = nodes_at({0, 1, 5});

    SUBCASE("undirected n=1") {
        const auto e = build_distance_p2p(profiles, 1, EdgeMode::undirected);
        CHECK(e.undirected);
        CHECK(e.edges.size() == 2);
        CHECK(has_edge(e, 0, 1));
        CHECK(has_edge(e, 1, 2));
    }
    SUBCASE("directed node-to-neighbors n=1") {
        const auto e = build_distance_p2p(profiles, 1, EdgeMode::directed_node_to_neighbors);
        CHECK_FALSE(e.undirected);
        CHECK(e.edges.size() == 3);
        CHECK(has_edge(e, 0, 1));
        CHECK(has_edge(e, 1, 0));
        CHECK(has_edge(e, 2, 1));
    }
    SUBCASE("directed neighbors-to-node n=1") {
        const auto e = build_distance_p2p(profiles, 1, EdgeMode::directed_neighbors_to_node);
        CHECK(has_edge(e, 1, 0));
        CHECK(has_edge(e, 0, 1));
        CHECK(has_edge(e, 1, 2));
    }
    SUBCASE("n=2 gives the complete graph on 3 nodes") {
        const auto e = build_distance_p2p(profiles, 2, EdgeMode::undirected);
        CHECK(e.edges.size() == 3);
    }
    SUBCASE("n >= node count is rejected") {
        CHECK_THROWS_AS(build_distance_p2p(profiles, 3, EdgeMode::undirected),
                        std::invalid_argument);
    }
}

TEST_CASE("p2p degree bounds pre-loss") {
    Rng rng(4);
    std::vector<NodeProfile> profiles;
    for (int i = 0; i < 30; ++i) {
        NodeProfile p;
        p.node_id = i;
        p.lat = rng.uniform(0, 1);
        p.lng = rng.uniform(0, 1);
        profiles.push_back(p);
    }
    for (int n : {1, 4, 7}) {
        SUBCASE(("n=" + std::to_string(n)).c_str()) {
            const auto out =
                build_distance_p2p(profiles, n, EdgeMode::directed_node_to_neighbors);
            const auto in =
                build_distance_p2p(profiles, n, EdgeMode::directed_neighbors_to_node);
            std::vector<int> outdeg(30, 0), indeg(30, 0);
            for (const auto& [s, t] : out.edges) outdeg[s]++;
            for (const auto& [s, t] : in.edges) indeg[t]++;
            for (int i = 0; i < 30; ++i) {
                CHECK(outdeg[i] == n);
                CHECK(indeg[i] == n);
            }
            // Undirected degree is own choices plus others' choices of this
            // node, de-duplicated; the merged directed sets are the oracle.
            const auto und = build_distance_p2p(profiles, n, EdgeMode::undirected);
            std::set<std::pair<int, int>> merged;
            for (const auto& [s, t] : out.edges)
                merged.emplace(std::min(s, t), std::max(s, t));
            for (const auto& [s, t] : in.edges)
                merged.emplace(std::min(s, t), std::max(s, t));
            CHECK(std::set<std::pair<int, int>>(und.edges.begin(), und.edges.end()) ==
                  merged);
            std::vector<int> deg(30, 0);
            for (const auto& [s, t] : und.edges) {
                deg[s]++;
                deg[t]++;
            }
            for (int i = 0; i < 30; ++i) CHECK(deg[i] >= n);
        }
    }
}

TEST_CASE("correlation p2p") {
    SUBCASE("perfectly correlated pair attracts each other") {
        // B = A, C = -A (plus offset to stay non-negative).
        const std::vector<double> a{1, 2, 3, 4, 5, 6};
        std::vector<double> c;
        for (double v : a) c.push_back(10 - v);
        const auto t = table_from_series({a, a, c});
        const auto e = build_correlation_p2p(t, 1, EdgeMode::directed_node_to_neighbors);
        CHECK(has_edge(e, 0, 1));
        CHECK(has_edge(e, 1, 0));
    }
    SUBCASE("zero-variance series is never chosen while alternatives remain") {
        const std::vector<double> a{1, 2, 3, 4};
        const std::vector<double> b{2, 4, 6, 8};
        const std::vector<double> flat{5, 5, 5, 5};
        const auto t = table_from_series({a, b, flat});
        const auto e = build_correlation_p2p(t, 1, EdgeMode::directed_node_to_neighbors);
        CHECK(has_edge(e, 0, 1));
        CHECK(has_edge(e, 1, 0));
        // flat node still picks someone (ties at -inf resolved by smaller id)
        CHECK(has_edge(e, 2, 0));
    }
    SUBCASE("ties break toward the smaller node id") {
        // B and C both equal A; A must pick B (id 1 < id 2).
        const std::vector<double> a{1, 2, 3, 4};
        const auto t = table_from_series({a, a, a});
        const auto e = build_correlation_p2p(t, 1, EdgeMode::directed_node_to_neighbors);
        CHECK(has_edge(e, 0, 1));
    }
    SUBCASE("too few nodes is rejected") {
        const auto t = table_from_series({{1, 2}, {2, 1}});
        CHECK_THROWS_AS(build_correlation_p2p(t, 2, EdgeMode::undirected),
                        std::invalid_argument);
    }
}

TEST_CASE("network topology") {
    SUBCASE("single router star over 50 nodes") {
        const auto e = build_network_topology(single_router_tree(50), 50);
        CHECK(e.edges.size() == 50);
        for (const auto& [s, t] : e.edges) CHECK(t == 50);
    }
    SUBCASE("two leaf routers under a root") {
        RouterTree tree;
        tree.parent = {-1, 0, 0};
        tree.iot_assignment = {1, 1, 2, 2};
        const auto e = build_network_topology(tree, 4);
        CHECK(e.edges.size() == 6);
    }
    SUBCASE("empty tree is rejected") {
        CHECK_THROWS_AS(build_network_topology(RouterTree{}, 0), std::invalid_argument);
    }
    SUBCASE("router cycle is rejected") {
        RouterTree tree;
        tree.parent = {1, 0, -1};
        tree.iot_assignment = {0};
        CHECK_THROWS_AS(build_network_topology(tree, 1), std::invalid_argument);
    }
}

TEST_CASE("hybrid is a de-duplicating union of undirected sets") {
    EdgeSet a{{{0, 1}, {1, 2}}, true};
    EdgeSet b{{{1, 2}, {2, 3}}, true};
    const auto h = build_hybrid(a, b);
    CHECK(h.edges.size() == 3);
    CHECK(build_hybrid(a, EdgeSet{{}, true}).edges == a.edges);
    EdgeSet directed{{{0, 1}}, false};
    CHECK_THROWS_AS(build_hybrid(directed, b), std::invalid_argument);
}

TEST_CASE("router feature aggregation") {
    SUBCASE("one router sums its children") {
        Eigen::MatrixXd x(2, 5);
        x << 1, 2, 0, 0, 0, 3, 4, 0, 0, 0;
        const auto out = aggregate_router_features(x, single_router_tree(2));
        CHECK(out.rows() == 3);
        CHECK(out.row(2)(0) == 4);
        CHECK(out.row(2)(1) == 6);
        CHECK(out.topRows(2) == x);
    }
    SUBCASE("router chain propagates the sum upward") {
        RouterTree tree;
        tree.parent = {-1, 0};
        tree.iot_assignment = {1};
        Eigen::MatrixXd x(1, 2);
        x << 7, 9;
        const auto out = aggregate_router_features(x, tree);
        CHECK(out.row(1) == x.row(0));
        CHECK(out.row(2) == x.row(0));
    }
    SUBCASE("aggregation is linear") {
        RouterTree tree;
        tree.parent = {-1, 0, 0};
        tree.iot_assignment = {1, 1, 2, 2, 2};
        Rng rng(3);
        Eigen::MatrixXd x(5, 4), y(5, 4);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 4; ++j) {
                x(i, j) = rng.uniform(-1, 1);
                y(i, j) = rng.uniform(-1, 1);
            }
        const double alpha = 2.5, beta = -0.75;
        const Eigen::MatrixXd lhs = aggregate_router_features(alpha * x + beta * y, tree);
        const Eigen::MatrixXd rhs = alpha * aggregate_router_features(x, tree) +
                                    beta * aggregate_router_features(y, tree);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("zero features give zero router rows") {
        const auto out =
            aggregate_router_features(Eigen::MatrixXd::Zero(3, 5), single_router_tree(3));
        CHECK(out.cwiseAbs().maxCoeff() == 0);
    }
}

TEST_CASE("drop_edges") {
    EdgeSet four{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}, true};
    Rng rng(8);
    SUBCASE("l=0 is identity") {
        CHECK(drop_edges(four, 0, rng).edges == four.edges);
    }
    SUBCASE("l=0.5 on 4 edges keeps exactly 2") {
        CHECK(drop_edges(four, 0.5, rng).edges.size() == 2);
    }
    SUBCASE("l=1 empties the set") {
        CHECK(drop_edges(four, 1, rng).edges.empty());
    }
    SUBCASE("count law |E| - floor(l|E|) over random sizes") {
        Rng gen(15);
        for (int trial = 0; trial < 50; ++trial) {
            const int count = 1 + static_cast<int>(gen.uniform_index(40));
            EdgeSet e;
            e.undirected = false;
            for (int i = 0; i < count; ++i) e.edges.emplace_back(i, (i + 1) % (count + 1));
            const double l = gen.uniform();
            const auto kept = drop_edges(e, l, gen);
            CHECK(kept.edges.size() ==
                  e.edges.size() - static_cast<std::size_t>(std::floor(l * count)));
        }
    }
}

TEST_CASE("normalize_adjacency closed forms") {
    SUBCASE("single undirected edge") {
        const auto a = normalize_adjacency(EdgeSet{{{0, 1}}, true}, 2);
        CHECK(a(0, 0) == doctest::Approx(0.5));
        CHECK(a(0, 1) == doctest::Approx(0.5));
        CHECK(a(1, 0) == doctest::Approx(0.5));
        CHECK(a(1, 1) == doctest::Approx(0.5));
    }
    SUBCASE("isolated node keeps a unit self-loop") {
        const auto a = normalize_adjacency(EdgeSet{{}, true}, 1);
        CHECK(a(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("directed edge 0->1 row-normalizes by in-degree") {
        const auto a = normalize_adjacency(EdgeSet{{{0, 1}}, false}, 2);
        CHECK(a(0, 0) == doctest::Approx(1.0));
        CHECK(a(0, 1) == doctest::Approx(0.0));
        CHECK(a(1, 0) == doctest::Approx(0.5));
        CHECK(a(1, 1) == doctest::Approx(0.5));
    }
    SUBCASE("directed rows sum to one") {
        const auto a = normalize_adjacency(EdgeSet{{{0, 1}, {2, 1}, {1, 0}}, false}, 3);
        for (int i = 0; i < 3; ++i) CHECK(a.row(i).sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("symmetric normalization: symmetry and spectral radius <= 1") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_index(19));
        EdgeSet e;
        e.undirected = true;
        std::set<std::pair<int, int>> seen;
        const int extra = static_cast<int>(rng.uniform_index(2 * n + 1));
        for (int i = 0; i < extra; ++i) {
            const int a = static_cast<int>(rng.uniform_index(n));
            const int b = static_cast<int>(rng.uniform_index(n));
            if (a == b) continue;
            const auto edge = std::make_pair(std::min(a, b), std::max(a, b));
            if (seen.insert(edge).second) e.edges.push_back(edge);
        }
        const Eigen::MatrixXd a_hat = normalize_adjacency(e, n);
        CHECK((a_hat - a_hat.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        // brute-force eigensolver as the oracle
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a_hat);
        CHECK(solver.eigenvalues().cwiseAbs().maxCoeff() <= 1 + 1e-9);
    }
}

TEST_CASE("topology spec validation") {
    TopologySpec spec;
    spec.kind = TopologyKind::network;
    spec.loss_fraction = 0;
    SUBCASE("network without router tree is rejected") {
        CHECK_THROWS_AS(spec.validate(10), std::invalid_argument);
    }
    SUBCASE("network with directed mode is rejected") {
        spec.router_tree = single_router_tree(10);
        spec.edge_mode = EdgeMode::directed_node_to_neighbors;
        CHECK_THROWS_AS(spec.validate(10), std::invalid_argument);
    }
}

TEST_CASE("build_snapshots") {
    std::vector<NodeProfile> profiles = nodes_at({0, 1, 2, 5, 7});
    for (auto& p : profiles) {
        p.benign_params = CauchyParams{5, 2, 100};
        p.activity_duty_cycle = 1.0;
    }
    Rng traffic_rng(17);
    const auto table = generate_traffic(profiles, std::nullopt,
                                        TimeRange{0, 36 * kSlotSeconds}, traffic_rng);

    SUBCASE("l=0 keeps identical edge sets and one snapshot per timestamp") {
        TopologySpec spec;
        spec.kind = TopologyKind::distance_p2p;
        spec.n = 2;
        Rng rng(1);
        const auto snaps = build_snapshots(table, profiles, spec, rng);
        REQUIRE(snaps.size() == 36);
        for (const auto& s : snaps) CHECK(s.edges.edges == snaps.front().edges.edges);
    }

    SUBCASE("network kind adds the router row and masks it") {
        TopologySpec spec;
        spec.kind = TopologyKind::network;
        spec.router_tree = single_router_tree(5);
        Rng rng(1);
        const auto snaps = build_snapshots(table, profiles, spec, rng);
        for (const auto& s : snaps) {
            CHECK(s.features.rows() == 6);
            CHECK(s.iot_mask.size() == 6);
            CHECK_FALSE(s.iot_mask[5]);
            // router row equals the sum of the standardized IoT rows
            CHECK((s.features.row(5) - s.features.topRows(5).colwise().sum())
                      .cwiseAbs()
                      .maxCoeff() < 1e-9);
        }
    }

    SUBCASE("same seed gives identical snapshot sequences under loss") {
        TopologySpec spec;
        spec.kind = TopologyKind::distance_p2p;
        spec.n = 2;
        spec.loss_fraction = 0.5;
        Rng a(5), b(5);
        const auto s1 = build_snapshots(table, profiles, spec, a);
        const auto s2 = build_snapshots(table, profiles, spec, b);
        REQUIRE(s1.size() == s2.size());
        for (std::size_t i = 0; i < s1.size(); ++i)
            CHECK(s1[i].edges.edges == s2[i].edges.edges);
    }
}

TEST_CASE("standardizer freezes training statistics") {
    Eigen::MatrixXd block(4, 2);
    block << 1, 10, 3, 10, 5, 10, 7, 10;
    const auto s = fit_standardizer({block});
    const Eigen::MatrixXd z = s.apply(block);
    CHECK(std::abs(z.col(0).mean()) < 1e-12);
    // zero-variance column maps to zero, not NaN
    CHECK(z.col(1).cwiseAbs().maxCoeff() < 1e-12);
}
