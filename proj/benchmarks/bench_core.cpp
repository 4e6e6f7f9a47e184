#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "iotddos/cauchy.hpp"
#include "iotddos/gcn.hpp"
#include "iotddos/rng.hpp"
#include "iotddos/topology.hpp"
#include "iotddos/traffic.hpp"

namespace {

using namespace iotddos;

std::vector<NodeProfile> random_profiles(int count, Rng& rng) {
    std::vector<NodeProfile> profiles(count);
    for (int i = 0; i < count; ++i) {
        auto& p = profiles[i];
        p.node_id = i;
        p.lat = rng.uniform(35.60, 35.80);
        p.lng = rng.uniform(51.20, 51.50);
        p.benign_params = CauchyParams{5.0, 2.0, 100.0};
        p.activity_phase_min = static_cast<int>(rng.uniform_index(120));
    }
    return profiles;
}

void BM_SampleTruncatedCauchy(benchmark::State& state) {
    const CauchyParams params{5.0, 2.0, 100.0};
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(sample_truncated_cauchy(params, rng));
}
BENCHMARK(BM_SampleTruncatedCauchy);

void BM_RollingAverage(benchmark::State& state) {
    const int slots = static_cast<int>(state.range(0));
    Rng rng(2);
    std::vector<double> packets(slots);
    for (auto& p : packets) p = rng.uniform(0, 100);
    for (auto _ : state) benchmark::DoNotOptimize(rolling_average(packets, 24));
    state.SetItemsProcessed(state.iterations() * slots);
}
BENCHMARK(BM_RollingAverage)->Arg(144)->Arg(1440)->Arg(14400);

void BM_GenerateTraffic(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    Rng rng(3);
    const auto profiles = random_profiles(nodes, rng);
    const TimeRange horizon{0, 144 * kSlotSeconds};
    for (auto _ : state) {
        Rng draw = rng.child(state.iterations());
        benchmark::DoNotOptimize(generate_traffic(profiles, std::nullopt, horizon, draw));
    }
}
BENCHMARK(BM_GenerateTraffic)->Arg(10)->Arg(50);

void BM_BuildDistanceP2p(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    Rng rng(4);
    const auto profiles = random_profiles(nodes, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_distance_p2p(profiles, 4, EdgeMode::undirected));
}
BENCHMARK(BM_BuildDistanceP2p)->Arg(50)->Arg(200);

void BM_NormalizeAdjacency(benchmark::State& state) {
    const int nodes = static_cast<int>(state.range(0));
    Rng rng(5);
    const auto profiles = random_profiles(nodes, rng);
    const EdgeSet edges = build_distance_p2p(profiles, 4, EdgeMode::undirected);
    for (auto _ : state) benchmark::DoNotOptimize(normalize_adjacency(edges, nodes));
}
BENCHMARK(BM_NormalizeAdjacency)->Arg(50)->Arg(200);

void BM_DropEdges(benchmark::State& state) {
    Rng rng(6);
    const auto profiles = random_profiles(200, rng);
    const EdgeSet edges = build_distance_p2p(profiles, 4, EdgeMode::undirected);
    for (auto _ : state) {
        Rng draw = rng.child(state.iterations());
        benchmark::DoNotOptimize(drop_edges(edges, 0.5, draw));
    }
}
BENCHMARK(BM_DropEdges);

struct GcnFixture {
    GcnModel model;
    Eigen::MatrixXd a_hat;
    Eigen::MatrixXd x;
    Eigen::VectorXd labels;
    std::vector<bool> mask;

    GcnFixture(int nodes, int f_in, int hidden) {
        Rng rng(7);
        model = init_model(f_in, hidden, 0.0, rng);
        const auto profiles = random_profiles(nodes, rng);
        const EdgeSet edges = build_distance_p2p(profiles, 4, EdgeMode::undirected);
        a_hat = normalize_adjacency(edges, nodes);
        x = Eigen::MatrixXd::NullaryExpr(nodes, f_in, [&] { return rng.uniform(-1, 1); });
        labels = Eigen::VectorXd::NullaryExpr(nodes, [&] { return double(rng.uniform() < 0.3); });
        mask.assign(nodes, true);
    }
};

void BM_GcnForward(benchmark::State& state) {
    GcnFixture f(static_cast<int>(state.range(0)), 6, 128);
    Rng rng(8);
    for (auto _ : state)
        benchmark::DoNotOptimize(forward(f.model, f.a_hat, f.x, /*train_mode=*/false, rng));
}
BENCHMARK(BM_GcnForward)->Arg(50)->Arg(200);

void BM_GcnForwardBackward(benchmark::State& state) {
    GcnFixture f(static_cast<int>(state.range(0)), 6, 128);
    Rng rng(9);
    const LossConfig loss_cfg = balanced_class_weights(35, 15);
    for (auto _ : state) {
        auto fwd = forward(f.model, f.a_hat, f.x, /*train_mode=*/true, rng);
        auto loss = weighted_bce_loss(fwd.scores, f.labels, f.mask, loss_cfg);
        benchmark::DoNotOptimize(backward(f.model, fwd.cache, loss.dscores));
    }
}
BENCHMARK(BM_GcnForwardBackward)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
