#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "iotddos/config.hpp"
#include "iotddos/harness.hpp"
#include "iotddos/manifest.hpp"
#include "iotddos/traffic.hpp"

namespace fs = std::filesystem;
using namespace iotddos;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig load_config(const std::string& path, std::uint64_t seed_override,
                             bool has_seed_override) {
    ExperimentConfig cfg = parse_config(path);
    if (has_seed_override) cfg.seed = seed_override;
    return cfg;
}

std::string dataset_path(int group, std::size_t scenario) {
    return "datasets/group" + std::to_string(group) + "/scenario_" +
           std::to_string(scenario) + ".csv";
}

ArtifactEntry record(const fs::path& out_dir, const std::string& rel) {
    return ArtifactEntry{rel, file_checksum((out_dir / rel).string())};
}

int cmd_generate(const std::string& config_path, const fs::path& out_dir,
                 const ExperimentConfig& cfg) {
    RunManifest manifest;
    manifest.command = "generate";
    manifest.config_hash = config_file_hash(config_path);
    manifest.seed = cfg.seed;

    for (int g = 0; g < cfg.groups; ++g) {
        const auto t0 = std::chrono::steady_clock::now();
        CellStatus status;
        status.name = "group" + std::to_string(g);
        fs::create_directories(out_dir / "datasets" / ("group" + std::to_string(g)));
        const auto scenarios = make_scenarios(cfg, g);
        for (std::size_t s = 0; s < scenarios.size(); ++s) {
            const std::string rel = dataset_path(g, s);
            write_dataset(generate_scenario_table(cfg, g, s), (out_dir / rel).string());
            status.outputs.push_back(record(out_dir, rel));
        }
        status.status = "ok";
        status.seconds = elapsed_since(t0);
        manifest.cells.push_back(std::move(status));
    }
    write_manifest(manifest, (out_dir / "manifest_generate.json").string());
    return 0;
}

std::vector<TrafficTable> load_group_tables(const ExperimentConfig& cfg,
                                            const fs::path& out_dir, int group) {
    const auto scenarios = make_scenarios(cfg, group);
    std::vector<TrafficTable> tables;
    tables.reserve(scenarios.size());
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        const fs::path path = out_dir / dataset_path(group, s);
        if (!fs::exists(path)) {
            throw std::runtime_error("missing dataset " + path.string() +
                                     " (run `iotddos generate` with this config first)");
        }
        tables.push_back(read_dataset(path.string()));
    }
    return tables;
}

// Runs one cell and writes checkpoint.bin, history.csv, metrics.csv under
// out/cells/<name>/. Returns the artifacts written.
CellStatus execute_cell(const ExperimentConfig& cfg, const CellSpec& cell,
                        const fs::path& out_dir,
                        const std::vector<TrafficTable>* preloaded) {
    const auto t0 = std::chrono::steady_clock::now();
    CellStatus status;
    status.name = cell.name();
    const std::string rel_dir = "cells/" + cell.name();
    fs::create_directories(out_dir / rel_dir);

    const CellResult result = run_cell(cfg, cell, preloaded);

    const std::string ckpt = rel_dir + "/checkpoint.bin";
    const std::string hist = rel_dir + "/history.csv";
    const std::string metr = rel_dir + "/metrics.csv";
    save_checkpoint((out_dir / ckpt).string(), result.model, AdamState{},
                    result.standardizer);
    write_history_csv(result.history, (out_dir / hist).string());
    write_cell_metrics_csv(result.per_k, (out_dir / metr).string());
    status.outputs = {record(out_dir, ckpt), record(out_dir, hist), record(out_dir, metr)};
    status.status = "ok";
    status.seconds = elapsed_since(t0);
    return status;
}

int cmd_train(const std::string& config_path, const fs::path& out_dir,
              const ExperimentConfig& cfg, const std::string& selector) {
    const CellSpec cell = parse_cell_selector(cfg, selector);
    const auto tables = load_group_tables(cfg, out_dir, cell.group);

    RunManifest manifest;
    manifest.command = "train";
    manifest.config_hash = config_file_hash(config_path);
    manifest.seed = cfg.seed;
    manifest.cells.push_back(execute_cell(cfg, cell, out_dir, &tables));
    write_manifest(manifest, (out_dir / ("manifest_" + cell.name() + ".json")).string());
    return 0;
}

int cmd_sweep(const std::string& config_path, const fs::path& out_dir,
              const ExperimentConfig& cfg, int jobs) {
    const auto cells = enumerate_cells(cfg);
    std::vector<CellStatus> statuses(cells.size());
    std::vector<GroupMetrics> metrics(cells.size());
    std::vector<bool> ok(cells.size(), false);

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                statuses[i] = execute_cell(cfg, cells[i], out_dir, nullptr);
                metrics[i] = GroupMetrics{
                    cells[i],
                    read_cell_metrics_csv(
                        (out_dir / ("cells/" + cells[i].name() + "/metrics.csv")).string())};
                ok[i] = true;
            } catch (const std::exception& e) {
                statuses[i].name = cells[i].name();
                statuses[i].status = std::string("failed: ") + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::max(1, jobs);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    RunManifest manifest;
    manifest.command = "sweep";
    manifest.config_hash = config_file_hash(config_path);
    manifest.seed = cfg.seed;

    std::vector<GroupMetrics> completed;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        manifest.cells.push_back(statuses[i]);
        if (ok[i]) completed.push_back(metrics[i]);
    }
    if (!completed.empty()) {
        const auto rows = aggregate_groups(completed);
        write_report_csv(rows, (out_dir / "metrics.csv").string());
        manifest.cells.push_back(CellStatus{
            "aggregate", "ok", 0, {record(out_dir, "metrics.csv")}});
    }
    write_manifest(manifest, (out_dir / "manifest_sweep.json").string());
    if (!manifest.all_ok()) {
        std::cerr << "sweep: some cells failed; see manifest_sweep.json\n";
        return kExitRuntimeError;
    }
    return 0;
}

int cmd_report(const fs::path& out_dir, const ExperimentConfig& cfg) {
    std::vector<GroupMetrics> completed;
    for (const auto& cell : enumerate_cells(cfg)) {
        const fs::path path = out_dir / ("cells/" + cell.name() + "/metrics.csv");
        if (!fs::exists(path)) continue;
        completed.push_back(GroupMetrics{cell, read_cell_metrics_csv(path.string())});
    }
    if (completed.empty())
        throw std::runtime_error("report: no cell metrics found under " +
                                 (out_dir / "cells").string());
    write_report_csv(aggregate_groups(completed), (out_dir / "metrics.csv").string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic IoT DDoS traffic, temporal graphs and GCN detection experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string cell_selector;
    std::uint64_t seed_override = 0;
    int jobs = 1;

    const auto add_common = [&](CLI::App* sub, bool with_cell, bool with_jobs) {
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed_override, "override the config's master seed");
        if (with_cell)
            sub->add_option("--cell", cell_selector,
                            "cell selector, e.g. group=0,topology=hybrid_correlation,"
                            "edge_mode=undirected,l=0.5")
                ->required();
        if (with_jobs) sub->add_option("--jobs", jobs, "parallel cells")->default_val(1);
    };

    auto* generate = app.add_subcommand("generate", "write per-(group,scenario) datasets");
    add_common(generate, false, false);
    auto* train = app.add_subcommand("train", "train and evaluate one experiment cell");
    add_common(train, true, false);
    auto* sweep = app.add_subcommand("sweep", "run every cell in the config grids");
    add_common(sweep, false, true);
    auto* report = app.add_subcommand("report", "re-aggregate existing cell outputs");
    add_common(report, false, false);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        const ExperimentConfig cfg =
            load_config(config_path, seed_override, active->count("--seed") > 0);
        fs::create_directories(out_dir);
        if (generate->parsed()) return cmd_generate(config_path, out_dir, cfg);
        if (train->parsed()) return cmd_train(config_path, out_dir, cfg, cell_selector);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, cfg, jobs);
        if (report->parsed()) return cmd_report(out_dir, cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
    return 0;
}
