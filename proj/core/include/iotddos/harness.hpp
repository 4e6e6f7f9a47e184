#pragma once

#include <map>
#include <string>
#include <vector>

#include "iotddos/config.hpp"
#include "iotddos/gcn.hpp"
#include "iotddos/metrics.hpp"
#include "iotddos/topology.hpp"

namespace iotddos {

// Deterministic per-group node profiles (positions and phases from the seed).
std::vector<NodeProfile> make_profiles(const ExperimentConfig& cfg, int group);

// Deterministic scenario grid k x start x duration x ratio, with per-scenario
// attacker draws.
std::vector<AttackScenario> make_scenarios(const ExperimentConfig& cfg, int group);

// One traffic table per scenario, identical to what cmd_generate writes.
TrafficTable generate_scenario_table(const ExperimentConfig& cfg, int group,
                                     std::size_t scenario_index);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

// Whole-scenario split, stratified so every k value lands in every part.
SplitIndices split_scenarios(const std::vector<AttackScenario>& scenarios,
                             double train_ratio, double val_ratio, double test_ratio,
                             Rng& rng);

// One training/evaluation unit: a snapshot with its normalized adjacency and
// labels padded to the full node count (router rows masked out).
struct TrainingExample {
    Eigen::MatrixXd a_hat;
    Eigen::MatrixXd x;
    Eigen::VectorXd labels;
    std::vector<bool> mask;
    double k = 0;
};

std::vector<TrainingExample> snapshots_to_examples(
    const std::vector<GraphSnapshot>& snaps, double k);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0;
    double val_f1 = 0;
};

struct TrainParams {
    int epochs = 100;
    int batch_size = 1024;
    double learning_rate = 1e-3;
};

struct TrainResult {
    GcnModel model;  // parameters from the epoch with the best validation F1
    std::vector<EpochStats> history;
    double best_val_f1 = 0;
};

TrainResult train(GcnModel model, const std::vector<TrainingExample>& train_set,
                  const std::vector<TrainingExample>& val_set, const TrainParams& params,
                  const LossConfig& loss_cfg, Rng& rng);

// Pooled metrics per k over the masked IoT entries of all examples.
std::map<double, BinaryMetrics> evaluate(const GcnModel& model,
                                         const std::vector<TrainingExample>& test_set);

// One experiment cell: a (group, topology, l) end-to-end run.
struct CellSpec {
    int group = 0;
    TopologySpec topology;
    std::string topology_label;  // e.g. "hybrid_correlation" or "distance_p2p:n=8"
    std::string edge_mode_label;

    std::string name() const;
};

// All cells implied by the config's grids, groups varying fastest.
std::vector<CellSpec> enumerate_cells(const ExperimentConfig& cfg);
// Parses "group=0,topology=hybrid_correlation,edge_mode=undirected,l=0.5[,n=8]".
CellSpec parse_cell_selector(const ExperimentConfig& cfg, const std::string& selector);

struct CellResult {
    std::map<double, BinaryMetrics> per_k;
    std::vector<EpochStats> history;
    GcnModel model;
    Standardizer standardizer;
    double best_val_f1 = 0;
};

// When `preloaded` is non-null it must hold one table per scenario in
// make_scenarios order (as read back from cmd_generate output).
CellResult run_cell(const ExperimentConfig& cfg, const CellSpec& cell,
                    const std::vector<TrafficTable>* preloaded = nullptr);

// Aggregated report row: mean and 95% CI over groups for one metric cell.
struct ReportRow {
    std::string topology;
    std::string edge_mode;
    double l = 0;
    double k = 0;
    std::string metric;
    MeanCi value;
};

struct GroupMetrics {
    CellSpec cell;
    std::map<double, BinaryMetrics> per_k;
};

// Groups entries by (topology, edge_mode, l) and aggregates across groups.
std::vector<ReportRow> aggregate_groups(const std::vector<GroupMetrics>& results);

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);
void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);
void write_cell_metrics_csv(const std::map<double, BinaryMetrics>& per_k,
                            const std::string& path);
std::map<double, BinaryMetrics> read_cell_metrics_csv(const std::string& path);

}  // namespace iotddos
