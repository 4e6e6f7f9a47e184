#include "iotddos/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace iotddos {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

template <typename T>
void shuffle_with(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const std::size_t j = i + rng.uniform_index(v.size() - i);
        std::swap(v[i], v[j]);
    }
}

}  // namespace

std::vector<NodeProfile> make_profiles(const ExperimentConfig& cfg, int group) {
    Rng rng = Rng(cfg.seed).child("profiles").child(static_cast<std::uint64_t>(group));
    std::vector<NodeProfile> profiles;
    profiles.reserve(cfg.nodes_per_group);
    for (int i = 0; i < cfg.nodes_per_group; ++i) {
        NodeProfile p;
        p.node_id = i;
        p.lat = rng.uniform(cfg.lat_min, cfg.lat_max);
        p.lng = rng.uniform(cfg.lng_min, cfg.lng_max);
        p.benign_params = cfg.benign;
        p.activity_period_min = cfg.activity_period_min;
        p.activity_duty_cycle = cfg.activity_duty_min == cfg.activity_duty_max
                                    ? cfg.activity_duty_min
                                    : rng.uniform(cfg.activity_duty_min, cfg.activity_duty_max);
        p.activity_phase_min = static_cast<int>(
            rng.uniform_index(static_cast<std::uint64_t>(cfg.activity_period_min)));
        profiles.push_back(p);
    }
    return profiles;
}

std::vector<AttackScenario> make_scenarios(const ExperimentConfig& cfg, int group) {
    std::vector<int> ids(cfg.nodes_per_group);
    std::iota(ids.begin(), ids.end(), 0);
    std::vector<AttackScenario> scenarios;
    std::size_t index = 0;
    for (double k : cfg.k_grid) {
        for (std::int64_t offset : cfg.attack.start_offsets) {
            for (double dur : cfg.attack.durations_hours) {
                for (double ratio : cfg.attack.participation_ratios) {
                    Rng rng = Rng(cfg.seed)
                                  .child("attackers")
                                  .child(static_cast<std::uint64_t>(group))
                                  .child(index);
                    scenarios.push_back(make_attack_scenario(
                        k, cfg.horizon_start + offset, dur, ratio, ids, rng));
                    ++index;
                }
            }
        }
    }
    return scenarios;
}

TrafficTable generate_scenario_table(const ExperimentConfig& cfg, int group,
                                     std::size_t scenario_index) {
    const auto profiles = make_profiles(cfg, group);
    const auto scenarios = make_scenarios(cfg, group);
    if (scenario_index >= scenarios.size())
        throw std::out_of_range("scenario index out of range");
    Rng rng = Rng(cfg.seed)
                  .child("traffic")
                  .child(static_cast<std::uint64_t>(group))
                  .child(scenario_index);
    return generate_traffic(profiles, scenarios[scenario_index], cfg.horizon(), rng);
}

SplitIndices split_scenarios(const std::vector<AttackScenario>& scenarios,
                             double train_ratio, double val_ratio, double test_ratio,
                             Rng& rng) {
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("split ratios must sum to 1");

    std::map<double, std::vector<std::size_t>> by_k;
    for (std::size_t i = 0; i < scenarios.size(); ++i) by_k[scenarios[i].k].push_back(i);

    SplitIndices out;
    for (auto& [k, bucket] : by_k) {
        if (bucket.size() < 3)
            throw std::invalid_argument(
                "too few scenarios for stratified split at k=" + fmt_double(k) +
                " (need at least 3 per k)");
        shuffle_with(bucket, rng);

        const double c = static_cast<double>(bucket.size());
        const double ideals[3] = {train_ratio * c, val_ratio * c, test_ratio * c};
        std::size_t counts[3];
        double fracs[3];
        std::size_t assigned = 0;
        for (int i = 0; i < 3; ++i) {
            counts[i] = static_cast<std::size_t>(std::floor(ideals[i]));
            fracs[i] = ideals[i] - static_cast<double>(counts[i]);
            assigned += counts[i];
        }
        while (assigned < bucket.size()) {
            int best = 0;
            for (int i = 1; i < 3; ++i)
                if (fracs[i] > fracs[best]) best = i;
            counts[best] += 1;
            fracs[best] = -1;
            ++assigned;
        }
        // Every split must see every k value.
        for (int i = 0; i < 3; ++i) {
            while (counts[i] == 0) {
                int donor = 0;
                for (int d = 1; d < 3; ++d)
                    if (counts[d] > counts[donor]) donor = d;
                counts[donor] -= 1;
                counts[i] += 1;
            }
        }
        std::size_t pos = 0;
        for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(bucket[pos++]);
        for (std::size_t i = 0; i < counts[1]; ++i) out.val.push_back(bucket[pos++]);
        for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(bucket[pos++]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<TrainingExample> snapshots_to_examples(
    const std::vector<GraphSnapshot>& snaps, double k) {
    std::vector<TrainingExample> out;
    out.reserve(snaps.size());
    for (const auto& s : snaps) {
        TrainingExample ex;
        const int total = s.num_iot + s.num_routers;
        ex.a_hat = normalize_adjacency(s.edges, total);
        ex.x = s.features;
        ex.labels = Eigen::VectorXd::Zero(total);
        ex.labels.head(s.num_iot) = s.labels;
        ex.mask = s.iot_mask;
        ex.k = k;
        out.push_back(std::move(ex));
    }
    return out;
}

namespace {

double pooled_f1(const GcnModel& model, const std::vector<TrainingExample>& set) {
    Rng dummy(0);
    std::vector<int> preds;
    std::vector<int> labels;
    for (const auto& ex : set) {
        const auto fwd = forward(model, ex.a_hat, ex.x, false, dummy);
        for (Eigen::Index i = 0; i < fwd.scores.size(); ++i) {
            if (!ex.mask[static_cast<std::size_t>(i)]) continue;
            preds.push_back(fwd.scores(i) >= 0.5 ? 1 : 0);
            labels.push_back(ex.labels(i) > 0.5 ? 1 : 0);
        }
    }
    return f1_score(count_confusion(preds, labels));
}

}  // namespace

TrainResult train(GcnModel model, const std::vector<TrainingExample>& train_set,
                  const std::vector<TrainingExample>& val_set, const TrainParams& params,
                  const LossConfig& loss_cfg, Rng& rng) {
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");

    AdamState state(model, params.learning_rate);
    TrainResult result;
    result.model = model;
    result.best_val_f1 = -1;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= params.epochs; ++epoch) {
        shuffle_with(order, rng);
        double loss_sum = 0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(params.batch_size)) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(params.batch_size));
            Gradients acc(model);
            double batch_loss = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const auto& ex = train_set[order[i]];
                auto fwd = forward(model, ex.a_hat, ex.x, true, rng);
                const auto lr = weighted_bce_loss(fwd.scores, ex.labels, ex.mask, loss_cfg);
                acc += backward(model, fwd.cache, lr.dscores);
                batch_loss += lr.loss;
            }
            const double inv = 1.0 / static_cast<double>(end - begin);
            acc *= inv;
            batch_loss *= inv;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch));
            adam_step(model, acc, state);
            loss_sum += batch_loss;
            ++batches;
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(batches);
        stats.val_f1 = val_set.empty() ? 0 : pooled_f1(model, val_set);
        result.history.push_back(stats);
        if (val_set.empty() || stats.val_f1 > result.best_val_f1) {
            result.best_val_f1 = stats.val_f1;
            result.model = model;
        }
    }
    if (!result.model.finite()) throw std::runtime_error("train: non-finite parameters");
    return result;
}

std::map<double, BinaryMetrics> evaluate(const GcnModel& model,
                                         const std::vector<TrainingExample>& test_set) {
    Rng dummy(0);
    std::map<double, std::pair<std::vector<double>, std::vector<int>>> pools;
    for (const auto& ex : test_set) {
        const auto fwd = forward(model, ex.a_hat, ex.x, false, dummy);
        auto& [scores, labels] = pools[ex.k];
        for (Eigen::Index i = 0; i < fwd.scores.size(); ++i) {
            if (!ex.mask[static_cast<std::size_t>(i)]) continue;
            scores.push_back(fwd.scores(i));
            labels.push_back(ex.labels(i) > 0.5 ? 1 : 0);
        }
    }
    std::map<double, BinaryMetrics> out;
    for (const auto& [k, pool] : pools) {
        const auto& [scores, labels] = pool;
        if (k > 0 && std::find(labels.begin(), labels.end(), 1) == labels.end())
            throw std::runtime_error("evaluate: no positive labels in the k=" +
                                     fmt_double(k) + " slice (mislabeled data)");
        out[k] = compute_metrics(scores, labels);
    }
    return out;
}

std::string CellSpec::name() const {
    return "g" + std::to_string(group) + "_" + topology_label + "_" + edge_mode_label +
           "_l" + fmt_double(topology.loss_fraction);
}

std::vector<CellSpec> enumerate_cells(const ExperimentConfig& cfg) {
    std::vector<CellSpec> cells;
    const RouterTree tree = cfg.make_router_tree();
    for (const auto& choice : cfg.topologies) {
        for (double l : cfg.l_grid) {
            for (int g = 0; g < cfg.groups; ++g) {
                CellSpec cell;
                cell.group = g;
                cell.topology.kind = choice.kind;
                cell.topology.n = cfg.n;
                cell.topology.edge_mode = choice.edge_mode;
                if (uses_routers(choice.kind)) cell.topology.router_tree = tree;
                cell.topology.loss_fraction = l;
                cell.topology_label = to_string(choice.kind);
                cell.edge_mode_label = to_string(choice.edge_mode);
                cells.push_back(std::move(cell));
            }
        }
    }
    for (int n : cfg.n_sweep) {
        for (int g = 0; g < cfg.groups; ++g) {
            CellSpec cell;
            cell.group = g;
            cell.topology.kind = cfg.n_sweep_topology.kind;
            cell.topology.n = n;
            cell.topology.edge_mode = cfg.n_sweep_topology.edge_mode;
            cell.topology.loss_fraction = 0;
            cell.topology_label = to_string(cfg.n_sweep_topology.kind) + ":n=" + std::to_string(n);
            cell.edge_mode_label = to_string(cfg.n_sweep_topology.edge_mode);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

CellSpec parse_cell_selector(const ExperimentConfig& cfg, const std::string& selector) {
    int group = -1;
    std::string topology, edge_mode = "undirected";
    double l = -1;
    int n = -1;
    std::stringstream ss(selector);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("cell selector token '" + token + "' is not key=value");
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "group") {
            group = std::stoi(value);
        } else if (key == "topology") {
            topology = value;
        } else if (key == "edge_mode") {
            edge_mode = value;
        } else if (key == "l") {
            l = std::stod(value);
        } else if (key == "n") {
            n = std::stoi(value);
        } else {
            throw std::invalid_argument("unknown cell selector key '" + key +
                                        "' (valid: group, topology, edge_mode, l, n)");
        }
    }
    if (group < 0 || topology.empty() || l < 0)
        throw std::invalid_argument("cell selector must set group, topology and l");
    topology_kind_from_string(topology);  // throws listing valid kinds
    const EdgeMode mode = edge_mode_from_string(edge_mode);

    for (const auto& cell : enumerate_cells(cfg)) {
        const std::string base_label = to_string(cell.topology.kind);
        const bool n_matches = (n == -1) ? cell.topology_label == base_label
                                         : cell.topology.n == n;
        if (cell.group == group && base_label == topology &&
            cell.topology.edge_mode == mode &&
            std::abs(cell.topology.loss_fraction - l) < 1e-12 && n_matches) {
            return cell;
        }
    }
    throw std::invalid_argument("cell selector '" + selector +
                                "' matches no cell in the config grids");
}

CellResult run_cell(const ExperimentConfig& cfg, const CellSpec& cell,
                    const std::vector<TrafficTable>* preloaded) {
    const Rng root(cfg.seed);
    const auto profiles = make_profiles(cfg, cell.group);
    const auto scenarios = make_scenarios(cfg, cell.group);
    if (preloaded && preloaded->size() != scenarios.size())
        throw std::invalid_argument("preloaded table count does not match the scenario grid");

    std::vector<TrafficTable> tables;
    if (!preloaded) {
        tables.reserve(scenarios.size());
        for (std::size_t i = 0; i < scenarios.size(); ++i)
            tables.push_back(generate_scenario_table(cfg, cell.group, i));
    }
    const auto& all_tables = preloaded ? *preloaded : tables;

    // Base topology is static per group: positions plus a dedicated
    // attack-free trace for the correlation kinds.
    Rng benign_rng = root.child("benign").child(static_cast<std::uint64_t>(cell.group));
    const TrafficTable benign_table =
        generate_traffic(profiles, std::nullopt, cfg.horizon(), benign_rng);
    const EdgeSet base_edges = build_base_edges(profiles, benign_table, cell.topology);

    Rng split_rng = root.child("split").child(static_cast<std::uint64_t>(cell.group));
    const SplitIndices split =
        split_scenarios(scenarios, cfg.split_train, cfg.split_val, cfg.split_test, split_rng);

    std::vector<Eigen::MatrixXd> train_blocks;
    for (std::size_t idx : split.train) {
        const auto& table = all_tables[idx];
        const auto ts = table.timestamps();
        for (std::size_t slot = 0; slot < ts.size(); ++slot)
            train_blocks.push_back(iot_features_at(table, slot));
    }
    const Standardizer standardizer = fit_standardizer(train_blocks);

    Rng cell_rng = root.child("cell").child(hash_str(cell.name()));
    const auto build_split = [&](const std::vector<std::size_t>& indices) {
        std::vector<TrainingExample> out;
        for (std::size_t idx : indices) {
            Rng loss_rng = cell_rng.child("loss").child(idx);
            auto snaps = build_snapshots(all_tables[idx], cell.topology, base_edges,
                                         standardizer, loss_rng);
            auto exs = snapshots_to_examples(snaps, scenarios[idx].k);
            out.insert(out.end(), std::make_move_iterator(exs.begin()),
                       std::make_move_iterator(exs.end()));
        }
        return out;
    };
    const auto train_set = build_split(split.train);
    const auto val_set = build_split(split.val);
    const auto test_set = build_split(split.test);

    double pos = 0, neg = 0;
    for (const auto& ex : train_set) {
        for (Eigen::Index i = 0; i < ex.labels.size(); ++i) {
            if (!ex.mask[static_cast<std::size_t>(i)]) continue;
            (ex.labels(i) > 0.5 ? pos : neg) += 1;
        }
    }
    const LossConfig loss_cfg = balanced_class_weights(neg, pos);

    Rng init_rng = cell_rng.child("init");
    GcnModel model = init_model(kNumFeatures, cfg.model.hidden, cfg.model.dropout, init_rng);

    TrainParams params;
    params.epochs = cfg.model.epochs;
    params.batch_size = cfg.model.batch_size;
    params.learning_rate = cfg.model.learning_rate;

    Rng train_rng = cell_rng.child("train");
    auto trained = train(std::move(model), train_set, val_set, params, loss_cfg, train_rng);

    CellResult result;
    result.per_k = evaluate(trained.model, test_set);
    result.history = std::move(trained.history);
    result.model = std::move(trained.model);
    result.standardizer = standardizer;
    result.best_val_f1 = trained.best_val_f1;
    return result;
}

std::vector<ReportRow> aggregate_groups(const std::vector<GroupMetrics>& results) {
    // (topology, edge_mode, l) -> k -> metric values over groups.
    struct Key {
        std::string topology, edge_mode;
        double l;
        bool operator<(const Key& o) const {
            return std::tie(topology, edge_mode, l) < std::tie(o.topology, o.edge_mode, o.l);
        }
    };
    std::map<Key, std::map<double, std::vector<BinaryMetrics>>> grouped;
    for (const auto& r : results) {
        const Key key{r.cell.topology_label, r.cell.edge_mode_label,
                      r.cell.topology.loss_fraction};
        for (const auto& [k, m] : r.per_k) grouped[key][k].push_back(m);
    }

    std::vector<ReportRow> rows;
    for (const auto& [key, per_k] : grouped) {
        for (const auto& [k, values] : per_k) {
            const auto collect = [&](auto member) {
                std::vector<double> v;
                for (const auto& m : values) v.push_back(m.*member);
                // a single group has no spread to report
                if (v.size() == 1) return MeanCi{v[0], 0};
                return aggregate_mean_ci(v);
            };
            const std::pair<std::string, double BinaryMetrics::*> metrics[] = {
                {"binary_accuracy", &BinaryMetrics::accuracy},
                {"f1", &BinaryMetrics::f1},
                {"auc", &BinaryMetrics::auc},
                {"recall", &BinaryMetrics::recall},
            };
            for (const auto& [name, member] : metrics) {
                rows.push_back(ReportRow{key.topology, key.edge_mode, key.l, k, name,
                                         collect(member)});
            }
        }
    }
    return rows;
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "topology,edge_mode,l,k,metric,mean,ci95\n";
    for (const auto& r : rows) {
        out << r.topology << ',' << r.edge_mode << ',' << fmt_double(r.l) << ','
            << fmt_double(r.k) << ',' << r.metric << ',' << fmt_double(r.value.mean) << ','
            << fmt_double(r.value.ci95) << '\n';
    }
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "epoch,train_loss,val_f1\n";
    for (const auto& h : history)
        out << h.epoch << ',' << fmt_double(h.train_loss) << ',' << fmt_double(h.val_f1)
            << '\n';
}

void write_cell_metrics_csv(const std::map<double, BinaryMetrics>& per_k,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "k,binary_accuracy,f1,auc,recall\n";
    for (const auto& [k, m] : per_k) {
        out << fmt_double(k) << ',' << fmt_double(m.accuracy) << ',' << fmt_double(m.f1)
            << ',' << fmt_double(m.auc) << ',' << fmt_double(m.recall) << '\n';
    }
}

std::map<double, BinaryMetrics> read_cell_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cell metrics: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "k,binary_accuracy,f1,auc,recall")
        throw std::runtime_error("bad cell metrics header in " + path);
    std::map<double, BinaryMetrics> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<double> v;
        while (std::getline(ss, f, ',')) v.push_back(std::stod(f));
        if (v.size() != 5) throw std::runtime_error("bad cell metrics row in " + path);
        out[v[0]] = BinaryMetrics{v[1], v[2], v[3], v[4]};
    }
    return out;
}

}  // namespace iotddos
