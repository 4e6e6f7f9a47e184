#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "iotddos/rng.hpp"
#include "iotddos/traffic.hpp"

namespace iotddos {

enum class TopologyKind {
    distance_p2p,
    correlation_p2p,
    network,
    hybrid_distance,
    hybrid_correlation,
};

enum class EdgeMode {
    undirected,
    directed_node_to_neighbors,
    directed_neighbors_to_node,
};

std::string to_string(TopologyKind k);
std::string to_string(EdgeMode m);
TopologyKind topology_kind_from_string(const std::string& s);
EdgeMode edge_mode_from_string(const std::string& s);

bool is_p2p(TopologyKind k);
bool uses_routers(TopologyKind k);

// Rooted router tree with every IoT node assigned to exactly one router.
// Router indices are local (0..num_routers-1); parent[i] == -1 marks the root.
struct RouterTree {
    std::vector<int> parent;          // per router
    std::vector<int> iot_assignment;  // per IoT node index -> router index

    int num_routers() const { return static_cast<int>(parent.size()); }
    void validate() const;
    // Router indices in child-before-parent order.
    std::vector<int> bottom_up_order() const;
};

RouterTree single_router_tree(int num_iot);

struct TopologySpec {
    TopologyKind kind = TopologyKind::distance_p2p;
    int n = 4;  // neighbors per node for p2p construction
    EdgeMode edge_mode = EdgeMode::undirected;
    std::optional<RouterTree> router_tree;
    double loss_fraction = 0;  // l in [0, 1]

    void validate(int num_iot) const;
};

// Edges as index pairs; undirected sets store each edge once as (min, max).
struct EdgeSet {
    std::vector<std::pair<int, int>> edges;
    bool undirected = true;
};

EdgeSet build_distance_p2p(const std::vector<NodeProfile>& profiles, int n, EdgeMode mode);

// Pearson correlation of per-node packet series over the table's horizon;
// zero-variance series correlate at -inf and are never preferred.
EdgeSet build_correlation_p2p(const TrafficTable& benign, int n, EdgeMode mode);

// IoT->assigned-router and router->parent edges; router node index i maps
// to graph index num_iot + i.
EdgeSet build_network_topology(const RouterTree& tree, int num_iot);

EdgeSet build_hybrid(const EdgeSet& p2p, const EdgeSet& network);

// Leaf routers sum their assigned IoT rows; ancestors sum their child routers.
Eigen::MatrixXd aggregate_router_features(const Eigen::MatrixXd& iot_features,
                                          const RouterTree& tree);

// Removes floor(l * |edges|) edges uniformly without replacement.
EdgeSet drop_edges(const EdgeSet& edges, double l, Rng& rng);

// Undirected: D^{-1/2}(A+I)D^{-1/2}. Directed: rows of D_in^{-1}(A+I), each
// row averaging over in-neighbors plus self. Isolated nodes keep A_hat[i][i]=1.
Eigen::MatrixXd normalize_adjacency(const EdgeSet& edges, int num_nodes);

// Per-feature z-score with statistics frozen on the training split.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd stddev;  // entries >= epsilon floor

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

Standardizer fit_standardizer(const std::vector<Eigen::MatrixXd>& feature_blocks);

inline constexpr int kNumFeatures = 5;  // PACKET + four rolling averages

struct GraphSnapshot {
    Timestamp time = 0;
    int num_iot = 0;
    int num_routers = 0;
    Eigen::MatrixXd features;  // (num_iot + num_routers) x kNumFeatures
    EdgeSet edges;             // after loss
    Eigen::VectorXd labels;    // over IoT nodes
    std::vector<bool> iot_mask;
};

// Raw (unstandardized) IoT feature matrix at one timestamp, node-major in
// ascending node_id order. `slot` indexes the table's common grid.
Eigen::MatrixXd iot_features_at(const TrafficTable& table, std::size_t slot);

// Static base edges per spec kind, computed from positions and benign series.
EdgeSet build_base_edges(const std::vector<NodeProfile>& profiles,
                         const TrafficTable& benign, const TopologySpec& spec);

// One snapshot per timestamp of `table`; base edges fixed, loss re-drawn per
// snapshot, features standardized then router-aggregated.
std::vector<GraphSnapshot> build_snapshots(const TrafficTable& table,
                                           const TopologySpec& spec,
                                           const EdgeSet& base_edges,
                                           const Standardizer& standardizer, Rng& rng);

// Convenience: derives base edges from `table` itself (correlation kinds
// require an attack-free table) and standardizes with the table's own stats.
std::vector<GraphSnapshot> build_snapshots(const TrafficTable& table,
                                           const std::vector<NodeProfile>& profiles,
                                           const TopologySpec& spec, Rng& rng);

// Plain-text debug dump: one block per snapshot with edges and features.
void dump_snapshots(const std::vector<GraphSnapshot>& snaps, const std::string& path);

}  // namespace iotddos
