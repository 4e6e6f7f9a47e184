#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "iotddos/harness.hpp"

using namespace iotddos;

namespace {

std::vector<AttackScenario> dummy_scenarios(const std::vector<double>& ks, int per_k) {
    std::vector<AttackScenario> out;
    for (double k : ks) {
        for (int i = 0; i < per_k; ++i) {
            AttackScenario s;
            s.k = k;
            s.start_time = 3600 * i;
            s.duration_hours = 4;
            s.participation_ratio = 0.5;
            out.push_back(s);
        }
    }
    return out;
}

// A linearly separable node-classification instance: self-loop-only graph,
// positives carry a large first feature.
std::vector<TrainingExample> separable_examples(int copies, double k) {
    std::vector<TrainingExample> out;
    const int n = 6;
    for (int c = 0; c < copies; ++c) {
        TrainingExample ex;
        ex.a_hat = normalize_adjacency(EdgeSet{{}, true}, n);
        ex.x = Eigen::MatrixXd::Zero(n, 2);
        ex.labels = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            const bool pos = i < n / 2;
            ex.x(i, 0) = pos ? 3.0 + 0.1 * c : -3.0 - 0.1 * c;
            ex.x(i, 1) = 0.5;
            ex.labels(i) = pos ? 1 : 0;
        }
        ex.mask.assign(n, true);
        ex.k = k;
        out.push_back(std::move(ex));
    }
    return out;
}

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.seed = 11;
    cfg.groups = 1;
    cfg.nodes_per_group = 12;
    cfg.horizon_days = 0.25;  // 36 slots
    cfg.k_grid = {0, 1.0};
    cfg.l_grid = {0};
    cfg.attack.start_offsets = {0, 3600, 7200};
    cfg.attack.durations_hours = {2};
    cfg.attack.participation_ratios = {0.5};
    cfg.topologies = {{TopologyKind::distance_p2p, EdgeMode::undirected}};
    cfg.n = 2;
    cfg.model.hidden = 16;
    cfg.model.epochs = 3;
    cfg.validate();
    return cfg;
}

}  // namespace

TEST_CASE("split_scenarios is stratified 60/20/20") {
    const auto scenarios =
        dummy_scenarios({0, 0.2, 0.4, 0.6, 0.8, 1.0}, 10);  // 60 total
    Rng rng(7);
    const auto split = split_scenarios(scenarios, 0.6, 0.2, 0.2, rng);
    CHECK(split.train.size() == 36);
    CHECK(split.val.size() == 12);
    CHECK(split.test.size() == 12);

    std::vector<std::size_t> all;
    for (auto i : split.train) all.push_back(i);
    for (auto i : split.val) all.push_back(i);
    for (auto i : split.test) all.push_back(i);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == i);

    for (const auto* part : {&split.train, &split.val, &split.test}) {
        std::set<double> ks;
        for (auto i : *part) ks.insert(scenarios[i].k);
        CHECK(ks.size() == 6);  // every k in every split
    }
}

TEST_CASE("split_scenarios is seed-deterministic and rejects thin strata") {
    const auto scenarios = dummy_scenarios({0, 0.5}, 5);
    Rng a(3), b(3);
    const auto s1 = split_scenarios(scenarios, 0.6, 0.2, 0.2, a);
    const auto s2 = split_scenarios(scenarios, 0.6, 0.2, 0.2, b);
    CHECK(s1.train == s2.train);
    CHECK(s1.val == s2.val);
    CHECK(s1.test == s2.test);

    const auto thin = dummy_scenarios({0, 0.5}, 2);
    Rng c(3);
    CHECK_THROWS_AS(split_scenarios(thin, 0.6, 0.2, 0.2, c), std::invalid_argument);
    CHECK_THROWS_AS(split_scenarios(scenarios, 0.5, 0.2, 0.2, c), std::invalid_argument);
}

TEST_CASE("train with zero learning rate leaves the model unchanged") {
    Rng rng(5);
    GcnModel model = init_model(2, 8, 0.0, rng);
    const GcnModel before = model;
    const auto examples = separable_examples(4, 0);
    TrainParams params;
    params.epochs = 5;
    params.learning_rate = 0;
    Rng train_rng(9);
    const auto result = train(model, examples, examples, params, LossConfig{}, train_rng);
    CHECK(result.model.w0 == before.w0);
    CHECK(result.model.b0 == before.b0);
    CHECK(result.model.w1 == before.w1);
    CHECK(result.model.b1 == before.b1);
}

TEST_CASE("balanced initial loss is close to ln 2") {
    Rng rng(5);
    // tiny weights keep the initial scores near 0.5
    GcnModel model = init_model(2, 8, 0.0, rng);
    model.w0 *= 1e-3;
    model.w1 *= 1e-3;
    const auto examples = separable_examples(4, 0);
    TrainParams params;
    params.epochs = 1;
    params.learning_rate = 0;
    Rng train_rng(9);
    const auto result = train(model, examples, examples, params, LossConfig{}, train_rng);
    REQUIRE(result.history.size() == 1);
    CHECK(result.history[0].train_loss == doctest::Approx(std::log(2.0)).epsilon(0.02));
}

TEST_CASE("train solves a separable instance and evaluate agrees with the oracle") {
    Rng rng(21);
    GcnModel model = init_model(2, 8, 0.0, rng);
    const auto examples = separable_examples(6, 0.4);
    TrainParams params;
    params.epochs = 200;
    params.learning_rate = 0.05;
    Rng train_rng(13);
    const auto result = train(model, examples, examples, params, LossConfig{}, train_rng);
    CHECK(result.best_val_f1 == doctest::Approx(1.0));
    REQUIRE(result.history.size() == 200);
    // the returned model is the best-validation one, so it must score F1 = 1
    const auto per_k = evaluate(result.model, examples);
    REQUIRE(per_k.count(0.4) == 1);
    CHECK(per_k.at(0.4).f1 == doctest::Approx(1.0));
    CHECK(per_k.at(0.4).accuracy == doctest::Approx(1.0));
    CHECK(per_k.at(0.4).recall == doctest::Approx(1.0));
    CHECK(per_k.at(0.4).auc == doctest::Approx(1.0));
}

TEST_CASE("evaluate pools per k and ignores masked rows") {
    Rng rng(77);
    const GcnModel model = init_model(2, 4, 0.0, rng);
    auto set_a = separable_examples(2, 0);
    auto more = separable_examples(2, 0.8);
    set_a.insert(set_a.end(), more.begin(), more.end());

    auto set_b = set_a;
    for (auto& ex : set_b) {
        // flip the label of a masked-out node; metrics must not move
        ex.mask[0] = false;
        ex.labels(0) = 1 - ex.labels(0);
    }
    for (auto& ex : set_a) ex.mask[0] = false;

    const auto ma = evaluate(model, set_a);
    const auto mb = evaluate(model, set_b);
    REQUIRE(ma.size() == 2);
    REQUIRE(mb.size() == 2);
    for (const auto& [k, m] : ma) {
        CHECK(m.accuracy == mb.at(k).accuracy);
        CHECK(m.f1 == mb.at(k).f1);
        CHECK(m.auc == mb.at(k).auc);
        CHECK(m.recall == mb.at(k).recall);
    }

    // a positive-free attack slice is a labeling bug, not a metric of 0
    auto bad = separable_examples(1, 0.6);
    bad[0].labels.setZero();
    CHECK_THROWS_AS(evaluate(model, bad), std::runtime_error);
}

TEST_CASE("enumerate_cells covers the grids and names are unique") {
    ExperimentConfig cfg = tiny_config();
    cfg.groups = 2;
    cfg.l_grid = {0, 0.5};
    cfg.topologies = {{TopologyKind::distance_p2p, EdgeMode::undirected},
                      {TopologyKind::hybrid_correlation, EdgeMode::undirected}};
    cfg.n_sweep = {1, 8};
    const auto cells = enumerate_cells(cfg);
    CHECK(cells.size() == 2 * 2 * 2 + 2 * 2);

    std::set<std::string> names;
    for (const auto& c : cells) names.insert(c.name());
    CHECK(names.size() == cells.size());

    // n-sweep cells run at l = 0 with the requested fan-out
    const auto& last = cells.back();
    CHECK(last.topology.n == 8);
    CHECK(last.topology.loss_fraction == 0);
    CHECK(last.topology_label == "distance_p2p:n=8");
}

TEST_CASE("parse_cell_selector") {
    ExperimentConfig cfg = tiny_config();
    cfg.l_grid = {0, 0.5};
    cfg.n_sweep = {8};

    const auto cell = parse_cell_selector(
        cfg, "group=0,topology=distance_p2p,edge_mode=undirected,l=0.5");
    CHECK(cell.topology.kind == TopologyKind::distance_p2p);
    CHECK(cell.topology.loss_fraction == doctest::Approx(0.5));
    CHECK(cell.topology.n == cfg.n);

    const auto swept = parse_cell_selector(
        cfg, "group=0,topology=distance_p2p,edge_mode=undirected,l=0,n=8");
    CHECK(swept.topology.n == 8);

    CHECK_THROWS_WITH_AS(
        parse_cell_selector(cfg, "group=0,topology=mesh,l=0"),
        doctest::Contains("distance_p2p"), std::invalid_argument);
    CHECK_THROWS_AS(parse_cell_selector(cfg, "topology=distance_p2p,l=0"),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_cell_selector(cfg, "group=5,topology=distance_p2p,l=0"),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_cell_selector(cfg, "bogus=1"), std::invalid_argument);
}

TEST_CASE("run_cell is reproducible end to end") {
    const ExperimentConfig cfg = tiny_config();
    const auto cells = enumerate_cells(cfg);
    REQUIRE(cells.size() == 1);
    const auto r1 = run_cell(cfg, cells[0]);
    const auto r2 = run_cell(cfg, cells[0]);
    CHECK(r1.model.w0 == r2.model.w0);
    CHECK(r1.model.w1 == r2.model.w1);
    CHECK(r1.best_val_f1 == r2.best_val_f1);
    REQUIRE(r1.per_k.size() == 2);
    for (const auto& [k, m] : r1.per_k) {
        CHECK(m.f1 == r2.per_k.at(k).f1);
        CHECK(m.auc == r2.per_k.at(k).auc);
    }
    REQUIRE(r1.history.size() == cfg.model.epochs);
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
        CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
        CHECK(r1.history[i].val_f1 == r2.history[i].val_f1);
    }
}

TEST_CASE("aggregate_groups and the report/metrics CSVs round-trip") {
    ExperimentConfig cfg = tiny_config();
    cfg.groups = 3;
    const auto cells = enumerate_cells(cfg);
    REQUIRE(cells.size() == 3);

    std::vector<GroupMetrics> results;
    for (int g = 0; g < 3; ++g) {
        GroupMetrics gm;
        gm.cell = cells[g];
        gm.per_k[0.0] = BinaryMetrics{0.9 + 0.01 * g, 0.8 + 0.01 * g, 0.95, 0.7};
        gm.per_k[1.0] = BinaryMetrics{0.99, 0.98, 0.99, 0.97};
        results.push_back(std::move(gm));
    }
    const auto rows = aggregate_groups(results);
    // 2 k values x 4 metrics for one (topology, edge_mode, l) key
    REQUIRE(rows.size() == 8);
    bool found = false;
    for (const auto& row : rows) {
        CHECK(row.topology == "distance_p2p");
        CHECK(row.edge_mode == "undirected");
        CHECK(row.l == 0);
        if (row.k == 0.0 && row.metric == "f1") {
            found = true;
            CHECK(row.value.mean == doctest::Approx(0.81));
            // 95% t half-width over {0.80, 0.81, 0.82}, df = 2
            CHECK(row.value.ci95 ==
                  doctest::Approx(4.3026527297 * 0.01 / std::sqrt(3.0)).epsilon(1e-6));
        }
    }
    CHECK(found);

    const std::string dir = "harness_csv_test";
    std::filesystem::create_directories(dir);
    write_report_csv(rows, dir + "/report.csv");
    std::ifstream in(dir + "/report.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "topology,edge_mode,l,k,metric,mean,ci95");

    write_cell_metrics_csv(results[0].per_k, dir + "/cell.csv");
    const auto back = read_cell_metrics_csv(dir + "/cell.csv");
    REQUIRE(back.size() == 2);
    CHECK(back.at(0.0).accuracy == results[0].per_k.at(0.0).accuracy);
    CHECK(back.at(0.0).f1 == results[0].per_k.at(0.0).f1);
    CHECK(back.at(1.0).auc == results[0].per_k.at(1.0).auc);
    CHECK(back.at(1.0).recall == results[0].per_k.at(1.0).recall);
    std::filesystem::remove_all(dir);
}

TEST_CASE("make_profiles and make_scenarios are deterministic per group") {
    const ExperimentConfig cfg = tiny_config();
    const auto p1 = make_profiles(cfg, 0);
    const auto p2 = make_profiles(cfg, 0);
    REQUIRE(p1.size() == 12);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i].lat == p2[i].lat);
        CHECK(p1[i].lng == p2[i].lng);
        CHECK(p1[i].lat >= cfg.lat_min);
        CHECK(p1[i].lat <= cfg.lat_max);
    }

    const auto s1 = make_scenarios(cfg, 0);
    const auto s2 = make_scenarios(cfg, 0);
    REQUIRE(s1.size() == 6);  // 2 k x 3 starts x 1 duration x 1 ratio
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].k == s2[i].k);
        CHECK(s1[i].attacker_set == s2[i].attacker_set);
        CHECK(s1[i].attacker_set.size() == 6);  // round(0.5 * 12)
    }
}
