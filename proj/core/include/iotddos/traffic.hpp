#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iotddos/cauchy.hpp"
#include "iotddos/rng.hpp"
#include "iotddos/timeutil.hpp"

namespace iotddos {

// A synthetic IoT device: position, benign volume distribution and a
// periodic activity schedule (period / duty cycle / phase, all minutes).
struct NodeProfile {
    int node_id = 0;
    double lat = 0;
    double lng = 0;
    CauchyParams benign_params;
    int activity_period_min = 120;
    double activity_duty_cycle = 0.5;  // in (0, 1]
    int activity_phase_min = 0;

    void validate() const;
    bool active_at(Timestamp t) const;
};

struct AttackScenario {
    double k = 0;  // intensity, >= 0
    Timestamp start_time = 0;
    double duration_hours = 0;
    double participation_ratio = 1.0;
    std::vector<int> attacker_set;  // node_ids, sorted

    Timestamp end_time() const {
        return start_time + static_cast<Timestamp>(duration_hours * 3600);
    }
    bool in_window(Timestamp t) const { return t >= start_time && t < end_time(); }
    bool is_attacker(int node_id) const;
};

// Picks round(ratio * N) attackers uniformly without replacement.
AttackScenario make_attack_scenario(double k, Timestamp start, double duration_hours,
                                    double participation_ratio,
                                    const std::vector<int>& node_ids, Rng& rng);

struct TrafficRow {
    int node_id = 0;
    double lat = 0;
    double lng = 0;
    Timestamp time = 0;
    int active = 0;
    double packet = 0;
    double avg_30m = 0;
    double avg_1h = 0;
    double avg_2h = 0;
    double avg_4h = 0;
    int label = 0;
};

// Rows sorted by (node_id, time); one row per (node, slot) over a regular
// 10-minute grid shared by all nodes.
struct TrafficTable {
    std::vector<TrafficRow> rows;

    std::vector<int> node_ids() const;
    std::vector<Timestamp> timestamps() const;
    // Packet series for one node over the table's grid, in time order.
    std::vector<double> packet_series(int node_id) const;
};

TrafficTable generate_traffic(const std::vector<NodeProfile>& profiles,
                              const std::optional<AttackScenario>& scenario,
                              const TimeRange& horizon, Rng& rng);

// Rolling sums over trailing windows ending at the current slot, divided by
// the full slot count; slots before the trace start contribute zero.
// Exposed for tests; generate_traffic applies it.
std::vector<double> rolling_average(const std::vector<double>& packets, int window_slots);

// CSV with header NODE,LAT,LNG,TIME,ACTIVE,PACKET,PACKET_30MIN_AVG,
// PACKET_1HR_AVG,PACKET_2HR_AVG,PACKET_4HR_AVG,LABEL. Values are written
// with shortest round-trip precision so read(write(t)) == t.
void write_dataset(const TrafficTable& table, const std::string& path);
TrafficTable read_dataset(const std::string& path);

}  // namespace iotddos
