#include "iotddos/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace iotddos {

void NodeProfile::validate() const {
    benign_params.validate();
    if (activity_period_min <= 0)
        throw std::invalid_argument("NodeProfile: activity_period_min must be > 0");
    if (!(activity_duty_cycle > 0 && activity_duty_cycle <= 1))
        throw std::invalid_argument("NodeProfile: activity_duty_cycle must be in (0, 1]");
}

bool NodeProfile::active_at(Timestamp t) const {
    const std::int64_t minute = t / 60 + activity_phase_min;
    const std::int64_t pos = ((minute % activity_period_min) + activity_period_min) % activity_period_min;
    return pos < activity_duty_cycle * activity_period_min;
}

bool AttackScenario::is_attacker(int node_id) const {
    return std::binary_search(attacker_set.begin(), attacker_set.end(), node_id);
}

AttackScenario make_attack_scenario(double k, Timestamp start, double duration_hours,
                                    double participation_ratio,
                                    const std::vector<int>& node_ids, Rng& rng) {
    if (k < 0) throw std::invalid_argument("attack intensity k must be >= 0");
    if (!(participation_ratio > 0 && participation_ratio <= 1))
        throw std::invalid_argument("participation_ratio must be in (0, 1]");
    const auto count = static_cast<std::size_t>(
        std::llround(participation_ratio * static_cast<double>(node_ids.size())));

    // Partial Fisher-Yates draw of `count` ids without replacement.
    std::vector<int> pool = node_ids;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return AttackScenario{k, start, duration_hours, participation_ratio, std::move(pool)};
}

std::vector<int> TrafficTable::node_ids() const {
    std::vector<int> ids;
    for (const auto& r : rows) {
        if (ids.empty() || ids.back() != r.node_id) ids.push_back(r.node_id);
    }
    return ids;
}

std::vector<Timestamp> TrafficTable::timestamps() const {
    if (rows.empty()) return {};
    const int first = rows.front().node_id;
    std::vector<Timestamp> ts;
    for (const auto& r : rows) {
        if (r.node_id != first) break;
        ts.push_back(r.time);
    }
    return ts;
}

std::vector<double> TrafficTable::packet_series(int node_id) const {
    std::vector<double> out;
    for (const auto& r : rows) {
        if (r.node_id == node_id) out.push_back(r.packet);
    }
    return out;
}

std::vector<double> rolling_average(const std::vector<double>& packets, int window_slots) {
    std::vector<double> out(packets.size());
    double sum = 0;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        sum += packets[i];
        if (i >= static_cast<std::size_t>(window_slots)) sum -= packets[i - window_slots];
        out[i] = sum / window_slots;
    }
    return out;
}

TrafficTable generate_traffic(const std::vector<NodeProfile>& profiles,
                              const std::optional<AttackScenario>& scenario,
                              const TimeRange& horizon, Rng& rng) {
    if (!is_grid_aligned(horizon.begin) || !is_grid_aligned(horizon.end))
        throw std::invalid_argument("horizon must be aligned to the 10-minute grid");
    if (horizon.end <= horizon.begin)
        throw std::invalid_argument("horizon must be non-empty");

    if (scenario) {
        std::unordered_set<int> known;
        for (const auto& p : profiles) known.insert(p.node_id);
        for (int id : scenario->attacker_set) {
            if (!known.count(id))
                throw std::invalid_argument("attacker_set references unknown node_id " +
                                            std::to_string(id));
        }
    }

    const std::int64_t slots = horizon.num_slots();
    TrafficTable table;
    table.rows.reserve(profiles.size() * slots);

    for (const auto& profile : profiles) {
        profile.validate();
        Rng node_rng = rng.child(static_cast<std::uint64_t>(profile.node_id));
        const bool is_attacker = scenario && scenario->is_attacker(profile.node_id);
        const CauchyParams attack_params =
            scenario ? scale_attack_params(profile.benign_params, scenario->k)
                     : profile.benign_params;

        std::vector<double> packets(slots);
        std::vector<int> active(slots);
        std::vector<int> label(slots);
        for (std::int64_t i = 0; i < slots; ++i) {
            const Timestamp t = horizon.begin + i * kSlotSeconds;
            const bool attacking = is_attacker && scenario->in_window(t);
            const bool is_active = attacking || profile.active_at(t);
            active[i] = is_active ? 1 : 0;
            label[i] = attacking ? 1 : 0;
            if (attacking) {
                packets[i] = sample_truncated_cauchy(attack_params, node_rng);
            } else if (is_active) {
                packets[i] = sample_truncated_cauchy(profile.benign_params, node_rng);
            }
        }

        const auto avg30 = rolling_average(packets, 3);
        const auto avg1h = rolling_average(packets, 6);
        const auto avg2h = rolling_average(packets, 12);
        const auto avg4h = rolling_average(packets, 24);
        for (std::int64_t i = 0; i < slots; ++i) {
            table.rows.push_back(TrafficRow{profile.node_id, profile.lat, profile.lng,
                                            horizon.begin + i * kSlotSeconds, active[i],
                                            packets[i], avg30[i], avg1h[i], avg2h[i],
                                            avg4h[i], label[i]});
        }
    }
    return table;
}

namespace {

const char* kHeader =
    "NODE,LAT,LNG,TIME,ACTIVE,PACKET,PACKET_30MIN_AVG,PACKET_1HR_AVG,"
    "PACKET_2HR_AVG,PACKET_4HR_AVG,LABEL";

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(const std::string& field, const std::string& col, std::size_t line) {
    double v;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw std::runtime_error("dataset line " + std::to_string(line) + ": bad " + col +
                                 " value '" + field + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    // TIME fields contain no commas; plain splitting suffices.
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

void write_dataset(const TrafficTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << kHeader << '\n';
    for (const auto& r : table.rows) {
        out << r.node_id << ',' << fmt_double(r.lat) << ',' << fmt_double(r.lng) << ','
            << format_time(r.time) << ',' << r.active << ',' << fmt_double(r.packet) << ','
            << fmt_double(r.avg_30m) << ',' << fmt_double(r.avg_1h) << ','
            << fmt_double(r.avg_2h) << ',' << fmt_double(r.avg_4h) << ',' << r.label << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

TrafficTable read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto want = split_csv(kHeader);
    const auto got = split_csv(line);
    for (const auto& col : want) {
        if (std::find(got.begin(), got.end(), col) == got.end())
            throw std::runtime_error("dataset missing column " + col + ": " + path);
    }
    if (got != want)
        throw std::runtime_error("dataset column order mismatch in " + path);

    TrafficTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != want.size())
            throw std::runtime_error("dataset line " + std::to_string(lineno) +
                                     ": expected " + std::to_string(want.size()) +
                                     " fields, got " + std::to_string(f.size()));
        TrafficRow r;
        r.node_id = static_cast<int>(parse_double(f[0], "NODE", lineno));
        r.lat = parse_double(f[1], "LAT", lineno);
        r.lng = parse_double(f[2], "LNG", lineno);
        r.time = parse_time(f[3]);
        if (!is_grid_aligned(r.time))
            throw std::runtime_error("dataset line " + std::to_string(lineno) +
                                     ": TIME not on the 10-minute grid: " + f[3]);
        r.active = static_cast<int>(parse_double(f[4], "ACTIVE", lineno));
        r.packet = parse_double(f[5], "PACKET", lineno);
        r.avg_30m = parse_double(f[6], "PACKET_30MIN_AVG", lineno);
        r.avg_1h = parse_double(f[7], "PACKET_1HR_AVG", lineno);
        r.avg_2h = parse_double(f[8], "PACKET_2HR_AVG", lineno);
        r.avg_4h = parse_double(f[9], "PACKET_4HR_AVG", lineno);
        r.label = static_cast<int>(parse_double(f[10], "LABEL", lineno));
        table.rows.push_back(r);
    }

    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const TrafficRow& a, const TrafficRow& b) {
                         return std::tie(a.node_id, a.time) < std::tie(b.node_id, b.time);
                     });
    // Every node must cover the same contiguous slot grid.
    const auto ts = table.timestamps();
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] - ts[i - 1] != kSlotSeconds)
            throw std::runtime_error("dataset timestamps are not a regular 10-minute grid");
    }
    std::size_t idx = 0;
    for (int id : table.node_ids()) {
        for (const auto t : ts) {
            if (idx >= table.rows.size() || table.rows[idx].node_id != id ||
                table.rows[idx].time != t)
                throw std::runtime_error("dataset node " + std::to_string(id) +
                                         " does not cover the common time grid");
            ++idx;
        }
    }
    if (idx != table.rows.size())
        throw std::runtime_error("dataset has duplicate (node, time) rows");
    return table;
}

}  // namespace iotddos
