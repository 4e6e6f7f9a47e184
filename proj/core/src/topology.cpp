#include "iotddos/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace iotddos {

std::string to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::distance_p2p: return "distance_p2p";
        case TopologyKind::correlation_p2p: return "correlation_p2p";
        case TopologyKind::network: return "network";
        case TopologyKind::hybrid_distance: return "hybrid_distance";
        case TopologyKind::hybrid_correlation: return "hybrid_correlation";
    }
    return "?";
}

std::string to_string(EdgeMode m) {
    switch (m) {
        case EdgeMode::undirected: return "undirected";
        case EdgeMode::directed_node_to_neighbors: return "directed_node_to_neighbors";
        case EdgeMode::directed_neighbors_to_node: return "directed_neighbors_to_node";
    }
    return "?";
}

TopologyKind topology_kind_from_string(const std::string& s) {
    for (auto k : {TopologyKind::distance_p2p, TopologyKind::correlation_p2p,
                   TopologyKind::network, TopologyKind::hybrid_distance,
                   TopologyKind::hybrid_correlation}) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument(
        "unknown topology kind '" + s +
        "' (valid: distance_p2p, correlation_p2p, network, hybrid_distance, "
        "hybrid_correlation)");
}

EdgeMode edge_mode_from_string(const std::string& s) {
    for (auto m : {EdgeMode::undirected, EdgeMode::directed_node_to_neighbors,
                   EdgeMode::directed_neighbors_to_node}) {
        if (to_string(m) == s) return m;
    }
    throw std::invalid_argument(
        "unknown edge mode '" + s +
        "' (valid: undirected, directed_node_to_neighbors, directed_neighbors_to_node)");
}

bool is_p2p(TopologyKind k) {
    return k == TopologyKind::distance_p2p || k == TopologyKind::correlation_p2p;
}

bool uses_routers(TopologyKind k) {
    return k == TopologyKind::network || k == TopologyKind::hybrid_distance ||
           k == TopologyKind::hybrid_correlation;
}

void RouterTree::validate() const {
    if (parent.empty()) throw std::invalid_argument("router tree is empty");
    int roots = 0;
    for (int p : parent) {
        if (p == -1) {
            ++roots;
        } else if (p < 0 || p >= num_routers()) {
            throw std::invalid_argument("router parent index out of range");
        }
    }
    if (roots != 1) throw std::invalid_argument("router tree must have exactly one root");
    bottom_up_order();  // throws on cycles
    for (int r : iot_assignment) {
        if (r < 0 || r >= num_routers())
            throw std::invalid_argument("IoT node assigned to nonexistent router");
    }
}

std::vector<int> RouterTree::bottom_up_order() const {
    const int r = num_routers();
    std::vector<int> depth(r, -1);
    for (int i = 0; i < r; ++i) {
        int d = 0;
        int cur = i;
        while (cur != -1) {
            if (++d > r) throw std::invalid_argument("router tree contains a cycle");
            cur = parent[cur];
        }
        depth[i] = d;
    }
    std::vector<int> order(r);
    for (int i = 0; i < r; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return depth[a] > depth[b] || (depth[a] == depth[b] && a < b); });
    return order;
}

RouterTree single_router_tree(int num_iot) {
    return RouterTree{{-1}, std::vector<int>(num_iot, 0)};
}

void TopologySpec::validate(int num_iot) const {
    if (!(loss_fraction >= 0 && loss_fraction <= 1))
        throw std::invalid_argument("loss_fraction must be in [0, 1]");
    if (uses_routers(kind)) {
        if (!router_tree) throw std::invalid_argument(to_string(kind) + " requires a router_tree");
        router_tree->validate();
        if (static_cast<int>(router_tree->iot_assignment.size()) != num_iot)
            throw std::invalid_argument("router tree IoT assignment size mismatch");
        if (edge_mode != EdgeMode::undirected)
            throw std::invalid_argument(to_string(kind) + " supports only undirected edges");
    }
    if (kind != TopologyKind::network) {
        if (n < 1) throw std::invalid_argument("n must be >= 1");
        if (n >= num_iot)
            throw std::invalid_argument("n must be smaller than the number of nodes");
    }
}

namespace {

// Per-node top-n choices -> EdgeSet under the given orientation rule.
EdgeSet assemble_p2p(const std::vector<std::vector<int>>& chosen, EdgeMode mode) {
    EdgeSet out;
    out.undirected = (mode == EdgeMode::undirected);
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < static_cast<int>(chosen.size()); ++i) {
        for (int j : chosen[i]) {
            std::pair<int, int> e;
            switch (mode) {
                case EdgeMode::undirected:
                    e = {std::min(i, j), std::max(i, j)};
                    break;
                case EdgeMode::directed_node_to_neighbors:
                    e = {i, j};
                    break;
                case EdgeMode::directed_neighbors_to_node:
                    e = {j, i};
                    break;
            }
            if (seen.insert(e).second) out.edges.push_back(e);
        }
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

// Top-n peers by score (higher is better), ties broken by smaller index.
std::vector<std::vector<int>> top_n_peers(const Eigen::MatrixXd& score, int n) {
    const int count = static_cast<int>(score.rows());
    std::vector<std::vector<int>> chosen(count);
    for (int i = 0; i < count; ++i) {
        std::vector<int> cand;
        cand.reserve(count - 1);
        for (int j = 0; j < count; ++j)
            if (j != i) cand.push_back(j);
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            if (score(i, a) != score(i, b)) return score(i, a) > score(i, b);
            return a < b;
        });
        chosen[i].assign(cand.begin(), cand.begin() + n);
    }
    return chosen;
}

}  // namespace

EdgeSet build_distance_p2p(const std::vector<NodeProfile>& profiles, int n, EdgeMode mode) {
    const int count = static_cast<int>(profiles.size());
    if (n >= count) throw std::invalid_argument("n must be smaller than the node count");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    Eigen::MatrixXd score(count, count);
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            const double dx = profiles[i].lat - profiles[j].lat;
            const double dy = profiles[i].lng - profiles[j].lng;
            score(i, j) = -std::sqrt(dx * dx + dy * dy);  // closer is better
        }
    }
    return assemble_p2p(top_n_peers(score, n), mode);
}

EdgeSet build_correlation_p2p(const TrafficTable& benign, int n, EdgeMode mode) {
    const auto ids = benign.node_ids();
    const int count = static_cast<int>(ids.size());
    if (count < n + 1)
        throw std::invalid_argument("correlation p2p needs at least n+1 nodes");
    const auto ts = benign.timestamps();
    if (ts.size() < 2)
        throw std::invalid_argument("correlation p2p needs at least 2 timestamps per node");

    const auto slots = static_cast<Eigen::Index>(ts.size());
    Eigen::MatrixXd series(slots, count);
    for (int j = 0; j < count; ++j) {
        const auto s = benign.packet_series(ids[j]);
        for (Eigen::Index t = 0; t < slots; ++t) series(t, j) = s[t];
    }
    Eigen::MatrixXd centered = series.rowwise() - series.colwise().mean();
    Eigen::VectorXd norm = centered.colwise().norm();

    const double neg_inf = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd score(count, count);
    for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
            if (norm(i) == 0 || norm(j) == 0) {
                score(i, j) = neg_inf;  // zero-variance series never preferred
            } else {
                score(i, j) = centered.col(i).dot(centered.col(j)) / (norm(i) * norm(j));
            }
        }
    }
    return assemble_p2p(top_n_peers(score, n), mode);
}

EdgeSet build_network_topology(const RouterTree& tree, int num_iot) {
    tree.validate();
    if (static_cast<int>(tree.iot_assignment.size()) != num_iot)
        throw std::invalid_argument("router tree IoT assignment size mismatch");
    EdgeSet out;
    out.undirected = true;
    for (int i = 0; i < num_iot; ++i) {
        out.edges.emplace_back(i, num_iot + tree.iot_assignment[i]);
    }
    for (int r = 0; r < tree.num_routers(); ++r) {
        if (tree.parent[r] != -1) {
            const int a = num_iot + r;
            const int b = num_iot + tree.parent[r];
            out.edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

EdgeSet build_hybrid(const EdgeSet& p2p, const EdgeSet& network) {
    if (!p2p.undirected || !network.undirected)
        throw std::invalid_argument("hybrid topology requires undirected edge sets");
    std::set<std::pair<int, int>> merged(p2p.edges.begin(), p2p.edges.end());
    merged.insert(network.edges.begin(), network.edges.end());
    EdgeSet out;
    out.undirected = true;
    out.edges.assign(merged.begin(), merged.end());
    return out;
}

Eigen::MatrixXd aggregate_router_features(const Eigen::MatrixXd& iot_features,
                                          const RouterTree& tree) {
    const int num_iot = static_cast<int>(iot_features.rows());
    if (static_cast<int>(tree.iot_assignment.size()) != num_iot)
        throw std::invalid_argument("aggregate_router_features: assignment size mismatch");
    const int r = tree.num_routers();
    Eigen::MatrixXd out(num_iot + r, iot_features.cols());
    out.topRows(num_iot) = iot_features;
    out.bottomRows(r).setZero();
    for (int i = 0; i < num_iot; ++i) {
        out.row(num_iot + tree.iot_assignment[i]) += iot_features.row(i);
    }
    for (int router : tree.bottom_up_order()) {
        if (tree.parent[router] != -1) {
            out.row(num_iot + tree.parent[router]) += out.row(num_iot + router);
        }
    }
    return out;
}

EdgeSet drop_edges(const EdgeSet& edges, double l, Rng& rng) {
    if (!(l >= 0 && l <= 1)) throw std::invalid_argument("loss fraction must be in [0, 1]");
    const std::size_t total = edges.edges.size();
    const auto drop = static_cast<std::size_t>(std::floor(l * static_cast<double>(total)));
    if (drop == 0) return edges;

    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    for (std::size_t i = 0; i < drop; ++i) {
        const std::size_t j = i + rng.uniform_index(total - i);
        std::swap(idx[i], idx[j]);
    }
    std::vector<bool> dropped(total, false);
    for (std::size_t i = 0; i < drop; ++i) dropped[idx[i]] = true;

    EdgeSet out;
    out.undirected = edges.undirected;
    out.edges.reserve(total - drop);
    for (std::size_t i = 0; i < total; ++i) {
        if (!dropped[i]) out.edges.push_back(edges.edges[i]);
    }
    return out;
}

Eigen::MatrixXd normalize_adjacency(const EdgeSet& edges, int num_nodes) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(num_nodes, num_nodes);
    for (const auto& [s, t] : edges.edges) {
        if (s < 0 || s >= num_nodes || t < 0 || t >= num_nodes)
            throw std::invalid_argument("edge index out of range");
        // A(target, source): row i collects what node i aggregates from.
        a(t, s) = 1;
        if (edges.undirected) a(s, t) = 1;
    }
    if (edges.undirected) {
        Eigen::VectorXd dinv_sqrt = a.rowwise().sum().array().rsqrt();
        return dinv_sqrt.asDiagonal() * a * dinv_sqrt.asDiagonal();
    }
    Eigen::VectorXd dinv = a.rowwise().sum().array().inverse();
    return dinv.asDiagonal() * a;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean).array().rowwise() / stddev.array();
}

Standardizer fit_standardizer(const std::vector<Eigen::MatrixXd>& feature_blocks) {
    if (feature_blocks.empty())
        throw std::invalid_argument("fit_standardizer: no feature blocks");
    const Eigen::Index cols = feature_blocks.front().cols();
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(cols);
    Eigen::RowVectorXd sumsq = Eigen::RowVectorXd::Zero(cols);
    double count = 0;
    for (const auto& block : feature_blocks) {
        sum += block.colwise().sum();
        sumsq += block.array().square().colwise().sum().matrix();
        count += static_cast<double>(block.rows());
    }
    Standardizer s;
    s.mean = sum / count;
    Eigen::RowVectorXd var = sumsq / count - s.mean.cwiseProduct(s.mean);
    s.stddev = var.cwiseMax(0.0).cwiseSqrt().cwiseMax(1e-9);
    return s;
}

Eigen::MatrixXd iot_features_at(const TrafficTable& table, std::size_t slot) {
    const auto ts = table.timestamps();
    if (slot >= ts.size()) throw std::out_of_range("slot out of range");
    const std::size_t num_slots = ts.size();
    const std::size_t num_iot = table.rows.size() / num_slots;
    Eigen::MatrixXd x(num_iot, kNumFeatures);
    for (std::size_t i = 0; i < num_iot; ++i) {
        const auto& r = table.rows[i * num_slots + slot];
        x(i, 0) = r.packet;
        x(i, 1) = r.avg_30m;
        x(i, 2) = r.avg_1h;
        x(i, 3) = r.avg_2h;
        x(i, 4) = r.avg_4h;
    }
    return x;
}

EdgeSet build_base_edges(const std::vector<NodeProfile>& profiles,
                         const TrafficTable& benign, const TopologySpec& spec) {
    const int num_iot = static_cast<int>(profiles.size());
    spec.validate(num_iot);
    switch (spec.kind) {
        case TopologyKind::distance_p2p:
            return build_distance_p2p(profiles, spec.n, spec.edge_mode);
        case TopologyKind::correlation_p2p:
            return build_correlation_p2p(benign, spec.n, spec.edge_mode);
        case TopologyKind::network:
            return build_network_topology(*spec.router_tree, num_iot);
        case TopologyKind::hybrid_distance:
            return build_hybrid(build_distance_p2p(profiles, spec.n, EdgeMode::undirected),
                                build_network_topology(*spec.router_tree, num_iot));
        case TopologyKind::hybrid_correlation:
            return build_hybrid(build_correlation_p2p(benign, spec.n, EdgeMode::undirected),
                                build_network_topology(*spec.router_tree, num_iot));
    }
    throw std::logic_error("unreachable");
}

std::vector<GraphSnapshot> build_snapshots(const TrafficTable& table,
                                           const TopologySpec& spec,
                                           const EdgeSet& base_edges,
                                           const Standardizer& standardizer, Rng& rng) {
    const auto ts = table.timestamps();
    if (ts.empty()) return {};
    const int num_iot = static_cast<int>(table.rows.size() / ts.size());
    spec.validate(num_iot);
    const int num_routers = uses_routers(spec.kind) ? spec.router_tree->num_routers() : 0;
    const std::size_t num_slots = ts.size();

    std::vector<GraphSnapshot> snaps;
    snaps.reserve(num_slots);
    for (std::size_t slot = 0; slot < num_slots; ++slot) {
        GraphSnapshot snap;
        snap.time = ts[slot];
        snap.num_iot = num_iot;
        snap.num_routers = num_routers;

        Eigen::MatrixXd x = standardizer.apply(iot_features_at(table, slot));
        snap.features = uses_routers(spec.kind)
                            ? aggregate_router_features(x, *spec.router_tree)
                            : std::move(x);

        Rng slot_rng = rng.child(static_cast<std::uint64_t>(slot));
        snap.edges = drop_edges(base_edges, spec.loss_fraction, slot_rng);

        snap.labels.resize(num_iot);
        for (int i = 0; i < num_iot; ++i) {
            snap.labels(i) = table.rows[static_cast<std::size_t>(i) * num_slots + slot].label;
        }
        snap.iot_mask.assign(num_iot + num_routers, false);
        for (int i = 0; i < num_iot; ++i) snap.iot_mask[i] = true;
        snaps.push_back(std::move(snap));
    }
    return snaps;
}

std::vector<GraphSnapshot> build_snapshots(const TrafficTable& table,
                                           const std::vector<NodeProfile>& profiles,
                                           const TopologySpec& spec, Rng& rng) {
    const EdgeSet base = build_base_edges(profiles, table, spec);
    const auto ts = table.timestamps();
    std::vector<Eigen::MatrixXd> blocks;
    blocks.reserve(ts.size());
    for (std::size_t slot = 0; slot < ts.size(); ++slot)
        blocks.push_back(iot_features_at(table, slot));
    return build_snapshots(table, spec, base, fit_standardizer(blocks), rng);
}

void dump_snapshots(const std::vector<GraphSnapshot>& snaps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& s : snaps) {
        out << "# t=" << format_time(s.time) << " iot=" << s.num_iot
            << " routers=" << s.num_routers
            << " undirected=" << (s.edges.undirected ? 1 : 0) << '\n';
        out << "edges:";
        for (const auto& [a, b] : s.edges.edges) out << ' ' << a << '-' << b;
        out << '\n';
        for (Eigen::Index i = 0; i < s.features.rows(); ++i) {
            out << i << ':';
            for (Eigen::Index j = 0; j < s.features.cols(); ++j) out << ' ' << s.features(i, j);
            out << '\n';
        }
    }
}

}  // namespace iotddos
