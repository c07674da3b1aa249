#pragma once

#include <fogbandit/bandit.hpp>
#include <fogbandit/cost_model.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fogbandit {

struct TaskStreamConfig {
    enum class Kind { fixed, uniform, truncated_normal };

    Kind kind = Kind::uniform;
    double size_bits = 0.6e6;  // fixed
    double lo_bits = 0.2e6;    // uniform, truncated_normal
    double hi_bits = 1.0e6;
    double mean_bits = 0.6e6;  // truncated_normal
    double sd_bits = 0.2e6;
    double intensity = 1000.0;  // cycles/bit

    double min_size() const { return kind == Kind::fixed ? size_bits : lo_bits; }
    double max_size() const { return kind == Kind::fixed ? size_bits : hi_bits; }
    void validate(double q_min, double q_max) const;
};

// Oblivious perturbation of the allocated CPU fraction: phases with geometric
// lengths (shared by all arms), a per-(phase, arm) mean drawn uniformly in the
// arm's fraction range, and clamped uniform jitter of the given width.
struct AdversaryConfig {
    double phase_length_mean = 250.0;
    double jitter_width = 0.05;
    std::uint64_t seed = 17;
};

struct Epoch {
    std::int64_t start_round = 1;
    std::vector<ArmId> arms;
};

// Where a trace-driven scenario came from; echoed into config documents.
struct TraceSource {
    std::string path;
    ArmId client_id = 0;
    double comm_range_m = 400.0;
    int rounds_per_sample = 1;
    double cpu_hz_lo = 1e9;
    double cpu_hz_hi = 5e9;
};

struct Scenario {
    std::string name = "custom";
    std::int64_t horizon = 0;
    std::vector<Epoch> epochs;  // contiguous cover of [1, horizon]
    std::vector<VfnSpec> vfns;
    TaskStreamConfig task_stream;
    ChannelParams channel;
    AdversaryConfig adversary;
    HyperSchedule schedule;
    double xi = 1.0;
    double q_min = 0.2e6;
    double q_max = 1.0e6;
    double rho = kDefaultRho;
    double comm_range_km = 0.4;  // largest admissible client-node distance
    double nu = 0.05;
    std::uint64_t seed = 1;

    // Trace mode only: per-round distance of every candidate, index round - 1.
    std::vector<std::map<ArmId, double>> round_distance_km;
    std::optional<TraceSource> trace_source;

    const std::vector<ArmId>& candidates(std::int64_t round) const;
    std::size_t epoch_index(std::int64_t round) const;
    const VfnSpec& vfn(ArmId id) const;
    double distance_km(ArmId id, std::int64_t round) const;

    // Throws ConfigError on any violated invariant.
    void validate() const;
};

// Seven volatile nodes over three epochs of 1000 rounds.
Scenario build_synthetic(std::uint64_t seed = 1);

// The first two epochs of the synthetic scenario, with `count` nodes appearing
// at round 1001 next to nodes 1-4 (ids 8, 9, ...). Each new node takes a
// frequency from the synthetic set and a uniform distance.
Scenario build_appearing_arms(std::size_t count, std::uint64_t seed = 1);

struct TraceRow {
    double time_s = 0.0;
    ArmId vehicle_id = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    double speed_mps = 0.0;
    int heading_flag = 0;
};

struct MobilityTrace {
    std::vector<TraceRow> rows;  // sorted by time_s
    ArmId client_id = 0;
    double comm_range_m = 400.0;
};

inline constexpr const char* kTraceHeader = "time_s,vehicle_id,x_m,y_m,speed_mps,heading_flag";

// Parses the trace CSV. Throws ParseError with the 1-based line number.
MobilityTrace parse_trace_csv(std::istream& in, ArmId client_id, double comm_range_m);
MobilityTrace load_trace_csv(const std::string& path, ArmId client_id, double comm_range_m);

struct TraceSchedule {
    std::vector<double> sample_times;
    std::vector<std::vector<ArmId>> candidates;             // per round
    std::vector<std::map<ArmId, double>> distance_km;       // per round
};

// Candidates of each sample are the non-client vehicles within comm_range
// (inclusive) that share the client's heading flag. Each sample expands into
// rounds_per_sample rounds. Throws ConfigError naming the first sample time
// with an empty candidate set.
TraceSchedule candidate_sets_from_trace(const MobilityTrace& trace, int rounds_per_sample = 1);

struct TraceScenarioOptions {
    int rounds_per_sample = 1;
    double cpu_hz_lo = 1e9;
    double cpu_hz_hi = 5e9;
    std::uint64_t seed = 1;
};

// Scenario over the trace schedule. Epochs are maximal runs of an unchanged
// candidate set; node CPU frequencies are uniform in [cpu_hz_lo, cpu_hz_hi].
Scenario build_trace_scenario(const MobilityTrace& trace, const TraceScenarioOptions& options,
                              const Scenario& base = build_synthetic());

// Task sizes as a pure function of (stream key, round).
class TaskStream {
public:
    TaskStream(TaskStreamConfig config, std::uint64_t key) : config_(config), key_(key) {}

    Task at(std::int64_t round) const;

    // Sequential interface; the n-th call returns at(n).
    Task next_task() { return at(++round_); }

private:
    TaskStreamConfig config_;
    std::uint64_t key_;
    std::int64_t round_ = 0;
};

// Maximal runs of identical candidate sets, as (first round, last round).
std::vector<std::pair<std::int64_t, std::int64_t>> intervals_of(const std::vector<std::vector<ArmId>>& per_round);

// --- Config documents ------------------------------------------------------

// Builds a scenario from a JSON document; unknown keys are rejected.
// base_dir resolves a relative trace path.
Scenario scenario_from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
Scenario load_scenario_file(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

std::string task_kind_name(TaskStreamConfig::Kind kind);

} // namespace fogbandit
