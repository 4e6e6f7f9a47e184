#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iotddos/cauchy.hpp"
#include "iotddos/timeutil.hpp"
#include "iotddos/topology.hpp"
#include "iotddos/traffic.hpp"

namespace iotddos {

struct ModelParams {
    int hidden = 1024;
    double dropout = 0.4;
    double learning_rate = 1e-3;
    int epochs = 100;
    int batch_size = 1024;
};

struct AttackGrid {
    std::vector<std::int64_t> start_offsets;  // seconds into the horizon's first day
    std::vector<double> durations_hours;
    std::vector<double> participation_ratios;
};

struct TopologyChoice {
    TopologyKind kind = TopologyKind::hybrid_correlation;
    EdgeMode edge_mode = EdgeMode::undirected;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int groups = 10;
    int nodes_per_group = 50;

    double lat_min = 35.60, lat_max = 35.80;
    double lng_min = 51.20, lng_max = 51.50;
    CauchyParams benign{5.0, 2.0, 100.0};
    int activity_period_min = 120;
    // Per-node duty cycle drawn uniformly from [min, max]; equal bounds give
    // the homogeneous schedule.
    double activity_duty_min = 0.5;
    double activity_duty_max = 0.5;

    Timestamp horizon_start = 0;
    double horizon_days = 1.0;

    std::vector<double> k_grid{0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> l_grid{0, 0.3, 0.5};
    AttackGrid attack;

    std::vector<TopologyChoice> topologies;
    int n = 4;
    std::vector<int> n_sweep;  // extra p2p cells at l = 0 when non-empty
    TopologyChoice n_sweep_topology{TopologyKind::distance_p2p, EdgeMode::undirected};

    bool single_router = true;
    std::optional<RouterTree> explicit_router_tree;

    ModelParams model;
    double split_train = 0.6, split_val = 0.2, split_test = 0.2;

    void validate() const;
    TimeRange horizon() const;
    RouterTree make_router_tree() const;
};

// Parses the JSON experiment config; errors name the offending key.
ExperimentConfig parse_config(const std::string& path);

// Canonical content hash of the config file bytes, hex.
std::string config_file_hash(const std::string& path);

}  // namespace iotddos
