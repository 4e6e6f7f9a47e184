#include "iotddos/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace iotddos {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (groups < 1) throw std::invalid_argument("config key `groups` must be >= 1");
    if (nodes_per_group < 2)
        throw std::invalid_argument("config key `nodes_per_group` must be >= 2");
    benign.validate();
    if (activity_period_min <= 0)
        throw std::invalid_argument("config key `activity.period_min` must be > 0");
    if (!(activity_duty_min > 0 && activity_duty_min <= 1) ||
        !(activity_duty_max > 0 && activity_duty_max <= 1) ||
        activity_duty_min > activity_duty_max)
        throw std::invalid_argument(
            "config key `activity.duty_cycle` must be a value or [min, max] range in (0, 1]");
    if (horizon_days <= 0) throw std::invalid_argument("config key `horizon.days` must be > 0");
    if (k_grid.empty()) throw std::invalid_argument("config key `k_grid` must be non-empty");
    for (double k : k_grid)
        if (k < 0) throw std::invalid_argument("config key `k_grid` entries must be >= 0");
    if (l_grid.empty()) throw std::invalid_argument("config key `l_grid` must be non-empty");
    for (double l : l_grid)
        if (!(l >= 0 && l <= 1))
            throw std::invalid_argument("config key `l_grid` entries must be in [0, 1]");
    if (attack.start_offsets.empty())
        throw std::invalid_argument("config key `attack.start_times` must be non-empty");
    if (attack.durations_hours.empty())
        throw std::invalid_argument("config key `attack.durations_hours` must be non-empty");
    if (attack.participation_ratios.empty())
        throw std::invalid_argument("config key `attack.participation_ratios` must be non-empty");
    if (topologies.empty() && n_sweep.empty())
        throw std::invalid_argument("config key `topologies` must be non-empty (or set `n_sweep`)");
    if (n < 1 || n >= nodes_per_group)
        throw std::invalid_argument("config key `n` must be in [1, nodes_per_group)");
    for (int v : n_sweep)
        if (v < 1 || v >= nodes_per_group)
            throw std::invalid_argument("config key `n_sweep` entries must be in [1, nodes_per_group)");
    if (!is_p2p(n_sweep_topology.kind))
        throw std::invalid_argument("config key `n_sweep_topology.kind` must be a p2p kind");
    if (model.hidden < 1) throw std::invalid_argument("config key `model.hidden` must be >= 1");
    if (!(model.dropout >= 0 && model.dropout < 1))
        throw std::invalid_argument("config key `model.dropout` must be in [0, 1)");
    if (model.epochs < 1) throw std::invalid_argument("config key `model.epochs` must be >= 1");
    if (model.batch_size < 1)
        throw std::invalid_argument("config key `model.batch_size` must be >= 1");
    const double total = split_train + split_val + split_test;
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("config key `split` ratios must sum to 1");
    if (split_train <= 0 || split_val <= 0 || split_test <= 0)
        throw std::invalid_argument("config key `split` ratios must all be positive");
    make_router_tree();
}

TimeRange ExperimentConfig::horizon() const {
    const auto slots = static_cast<std::int64_t>(std::llround(horizon_days * 144));
    return TimeRange{horizon_start, horizon_start + slots * kSlotSeconds};
}

RouterTree ExperimentConfig::make_router_tree() const {
    if (explicit_router_tree) {
        RouterTree t = *explicit_router_tree;
        if (static_cast<int>(t.iot_assignment.size()) != nodes_per_group)
            throw std::invalid_argument(
                "config key `router_tree.iot_assignment` must have one entry per node");
        t.validate();
        return t;
    }
    if (!single_router)
        throw std::invalid_argument("config key `router_tree` must be \"single\" or explicit");
    return single_router_tree(nodes_per_group);
}

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config key `" + key + "`: " + why);
}

template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        bad_key(key, e.what());
    }
}

template <typename T>
T require(const json& j, const std::string& key) {
    if (!j.contains(key)) bad_key(key, "missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        bad_key(key, e.what());
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }

    ExperimentConfig cfg;
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.groups = get_or<int>(j, "groups", cfg.groups);
    cfg.nodes_per_group = get_or<int>(j, "nodes_per_group", cfg.nodes_per_group);

    if (j.contains("area")) {
        const auto& a = j.at("area");
        const auto lat = require<std::vector<double>>(a, "lat");
        const auto lng = require<std::vector<double>>(a, "lng");
        if (lat.size() != 2 || lng.size() != 2) bad_key("area", "lat/lng must be [min, max]");
        cfg.lat_min = lat[0];
        cfg.lat_max = lat[1];
        cfg.lng_min = lng[0];
        cfg.lng_max = lng[1];
    }
    if (j.contains("benign")) {
        const auto& b = j.at("benign");
        cfg.benign = CauchyParams{require<double>(b, "x0"), require<double>(b, "gamma"),
                                  require<double>(b, "m")};
    }
    if (j.contains("activity")) {
        const auto& a = j.at("activity");
        cfg.activity_period_min = get_or<int>(a, "period_min", cfg.activity_period_min);
        if (a.contains("duty_cycle")) {
            const auto& d = a.at("duty_cycle");
            if (d.is_array()) {
                const auto range = require<std::vector<double>>(a, "duty_cycle");
                if (range.size() != 2)
                    bad_key("activity.duty_cycle", "range form must be [min, max]");
                cfg.activity_duty_min = range[0];
                cfg.activity_duty_max = range[1];
            } else {
                cfg.activity_duty_min = require<double>(a, "duty_cycle");
                cfg.activity_duty_max = cfg.activity_duty_min;
            }
        }
    }
    if (j.contains("horizon")) {
        const auto& h = j.at("horizon");
        cfg.horizon_start = parse_time(require<std::string>(h, "start"));
        cfg.horizon_days = get_or<double>(h, "days", cfg.horizon_days);
    }
    if (!j.contains("k_grid")) bad_key("k_grid", "missing");
    cfg.k_grid = require<std::vector<double>>(j, "k_grid");
    cfg.l_grid = get_or<std::vector<double>>(j, "l_grid", cfg.l_grid);

    if (j.contains("attack")) {
        const auto& a = j.at("attack");
        if (a.contains("start_times")) {
            cfg.attack.start_offsets.clear();
            for (const auto& s : require<std::vector<std::string>>(a, "start_times"))
                cfg.attack.start_offsets.push_back(parse_time_of_day(s));
        }
        cfg.attack.durations_hours =
            get_or<std::vector<double>>(a, "durations_hours", cfg.attack.durations_hours);
        cfg.attack.participation_ratios = get_or<std::vector<double>>(
            a, "participation_ratios", cfg.attack.participation_ratios);
    }
    if (cfg.attack.start_offsets.empty()) cfg.attack.start_offsets = {2 * 3600, 6 * 3600, 12 * 3600};
    if (cfg.attack.durations_hours.empty()) cfg.attack.durations_hours = {4, 8, 16};
    if (cfg.attack.participation_ratios.empty()) cfg.attack.participation_ratios = {0.5, 1.0};

    if (j.contains("topologies")) {
        for (const auto& t : j.at("topologies")) {
            TopologyChoice c;
            c.kind = topology_kind_from_string(require<std::string>(t, "kind"));
            c.edge_mode = edge_mode_from_string(
                get_or<std::string>(t, "edge_mode", "undirected"));
            cfg.topologies.push_back(c);
        }
    }
    cfg.n = get_or<int>(j, "n", cfg.n);
    cfg.n_sweep = get_or<std::vector<int>>(j, "n_sweep", cfg.n_sweep);
    if (j.contains("n_sweep_topology")) {
        const auto& t = j.at("n_sweep_topology");
        cfg.n_sweep_topology.kind = topology_kind_from_string(require<std::string>(t, "kind"));
        cfg.n_sweep_topology.edge_mode =
            edge_mode_from_string(get_or<std::string>(t, "edge_mode", "undirected"));
    }

    if (j.contains("router_tree")) {
        const auto& r = j.at("router_tree");
        if (r.is_string()) {
            if (r.get<std::string>() != "single")
                bad_key("router_tree", "string form must be \"single\"");
            cfg.single_router = true;
        } else {
            RouterTree t;
            t.parent = require<std::vector<int>>(r, "parents");
            t.iot_assignment = require<std::vector<int>>(r, "iot_assignment");
            cfg.explicit_router_tree = std::move(t);
        }
    }

    if (j.contains("model")) {
        const auto& m = j.at("model");
        cfg.model.hidden = get_or<int>(m, "hidden", cfg.model.hidden);
        cfg.model.dropout = get_or<double>(m, "dropout", cfg.model.dropout);
        cfg.model.learning_rate = get_or<double>(m, "learning_rate", cfg.model.learning_rate);
        cfg.model.epochs = get_or<int>(m, "epochs", cfg.model.epochs);
        cfg.model.batch_size = get_or<int>(m, "batch_size", cfg.model.batch_size);
    }
    if (j.contains("split")) {
        const auto& s = j.at("split");
        cfg.split_train = require<double>(s, "train");
        cfg.split_val = require<double>(s, "val");
        cfg.split_test = require<double>(s, "test");
    }

    cfg.validate();
    return cfg;
}

std::string config_file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_str(bytes)));
    return buf;
}

}  // namespace iotddos
