#include <fogbandit/scenario.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fogbandit {

void TaskStreamConfig::validate(double q_min, double q_max) const
{
    if (!(intensity > 0.0))
        throw ConfigError("task_stream: intensity must be positive");
    switch (kind) {
    case Kind::fixed:
        if (!(size_bits > 0.0))
            throw ConfigError("task_stream: size_bits must be positive");
        break;
    case Kind::truncated_normal:
        if (!(sd_bits > 0.0))
            throw ConfigError("task_stream: sd_bits must be positive");
        [[fallthrough]];
    case Kind::uniform:
        if (!(lo_bits > 0.0 && lo_bits <= hi_bits))
            throw ConfigError("task_stream: need 0 < lo_bits <= hi_bits");
        break;
    }
    if (min_size() < q_min || max_size() > q_max)
        throw ConfigError("task_stream: emitted sizes must lie within [q_min, q_max]");
}

std::string task_kind_name(TaskStreamConfig::Kind kind)
{
    switch (kind) {
    case TaskStreamConfig::Kind::fixed: return "fixed";
    case TaskStreamConfig::Kind::uniform: return "uniform";
    case TaskStreamConfig::Kind::truncated_normal: return "truncated_normal";
    }
    return "unknown";
}

std::size_t Scenario::epoch_index(std::int64_t round) const
{
    require(round >= 1 && round <= horizon, "scenario: round outside the horizon");
    auto it = std::upper_bound(epochs.begin(), epochs.end(), round,
                               [](std::int64_t r, const Epoch& e) { return r < e.start_round; });
    require(it != epochs.begin(), "scenario: round precedes the first epoch");
    return static_cast<std::size_t>(std::distance(epochs.begin(), it) - 1);
}

const std::vector<ArmId>& Scenario::candidates(std::int64_t round) const
{
    return epochs[epoch_index(round)].arms;
}

const VfnSpec& Scenario::vfn(ArmId id) const
{
    for (const auto& v : vfns)
        if (v.id == id)
            return v;
    throw ContractError("scenario: no node with id " + std::to_string(id));
}

double Scenario::distance_km(ArmId id, std::int64_t round) const
{
    if (!round_distance_km.empty()) {
        const auto& row = round_distance_km.at(static_cast<std::size_t>(round - 1));
        auto it = row.find(id);
        require(it != row.end(), "scenario: no trace distance for a candidate");
        return it->second;
    }
    return vfn(id).distance_km;
}

void Scenario::validate() const
{
    if (horizon < 1)
        throw ConfigError("scenario: horizon must be >= 1");
    if (epochs.empty() || epochs.front().start_round != 1)
        throw ConfigError("scenario: epochs must start at round 1");
    std::set<ArmId> ids;
    for (const auto& v : vfns) {
        v.validate();
        if (!ids.insert(v.id).second)
            throw ConfigError("scenario: duplicate vfn id " + std::to_string(v.id));
    }
    std::vector<std::size_t> k_counts;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        const auto& e = epochs[i];
        if (i > 0 && e.start_round <= epochs[i - 1].start_round)
            throw ConfigError("scenario: epoch start rounds must be strictly increasing");
        if (e.start_round > horizon)
            throw ConfigError("scenario: epoch starts after the horizon");
        if (e.arms.empty())
            throw ConfigError("scenario: epoch starting at round " + std::to_string(e.start_round) +
                              " has an empty candidate set");
        std::set<ArmId> unique(e.arms.begin(), e.arms.end());
        if (unique.size() != e.arms.size())
            throw ConfigError("scenario: duplicate arm in epoch starting at round " + std::to_string(e.start_round));
        for (ArmId a : e.arms)
            if (!ids.count(a))
                throw ConfigError("scenario: arm " + std::to_string(a) + " has no vfn spec");
        k_counts.push_back(e.arms.size());
    }
    channel.validate();
    if (!(q_min > 0.0 && q_min < q_max))
        throw ConfigError("scenario: need 0 < q_min_bits < q_max_bits");
    task_stream.validate(q_min, q_max);
    if (!(xi >= 0.0 && xi <= 1.0))
        throw ConfigError("scenario: xi must be in [0, 1]");
    if (!(rho >= 0.0))
        throw ConfigError("scenario: rho must be non-negative");
    if (!(comm_range_km > 0.0))
        throw ConfigError("scenario: comm_range_km must be positive");
    if (!(nu > 0.0 && nu < 1.0))
        throw ConfigError("scenario: nu must be in (0, 1)");
    if (!(adversary.phase_length_mean >= 1.0))
        throw ConfigError("adversary: phase_length_mean must be >= 1");
    if (!(adversary.jitter_width >= 0.0))
        throw ConfigError("adversary: jitter_width must be non-negative");
    if (!round_distance_km.empty()) {
        if (static_cast<std::int64_t>(round_distance_km.size()) != horizon)
            throw ConfigError("scenario: per-round distances must cover the horizon");
        for (std::int64_t r = 1; r <= horizon; ++r)
            for (ArmId a : candidates(r))
                if (!round_distance_km[static_cast<std::size_t>(r - 1)].count(a))
                    throw ConfigError("scenario: missing trace distance at round " + std::to_string(r));
    }
    std::sort(k_counts.begin(), k_counts.end());
    k_counts.erase(std::unique(k_counts.begin(), k_counts.end()), k_counts.end());
    validate_schedule(schedule, horizon, k_counts);
}

Scenario build_synthetic(std::uint64_t seed)
{
    Scenario s;
    s.name = "synthetic";
    s.seed = seed;
    s.horizon = 3000;
    s.epochs = {{1, {1, 2, 3, 4, 5}}, {1001, {1, 2, 3, 4, 6, 7}}, {2001, {1, 2, 3, 5, 6, 7}}};
    const double ghz[] = {6.0, 4.0, 5.0, 4.0, 1.5, 2.0, 4.0};
    KeyedStream dist({seed, 0xd15ULL});
    for (ArmId id = 1; id <= 7; ++id) {
        VfnSpec v;
        v.id = id;
        v.max_cpu_hz = ghz[id - 1] * 1e9;
        v.distance_km = s.comm_range_km * (1.0 - dist.uniform());  // (0, range]
        v.fraction_lo = 0.2;
        v.fraction_hi = 0.5;
        s.vfns.push_back(v);
    }
    return s;
}

Scenario build_appearing_arms(std::size_t count, std::uint64_t seed)
{
    if (count < 1)
        throw ConfigError("arm_count must be >= 1");
    Scenario s = build_synthetic(seed);
    s.name = "synthetic-arms-" + std::to_string(count);
    s.horizon = 2000;
    std::vector<ArmId> second = {1, 2, 3, 4};
    const double ghz[] = {6.0, 4.0, 5.0, 4.0, 1.5, 2.0, 4.0};
    KeyedStream draw({seed, 0xa99eULL});
    for (std::size_t i = 0; i < count; ++i) {
        VfnSpec v;
        v.id = 8 + static_cast<ArmId>(i);
        v.max_cpu_hz = ghz[static_cast<std::size_t>(draw.uniform() * 7.0) % 7] * 1e9;
        v.distance_km = s.comm_range_km * (1.0 - draw.uniform());
        s.vfns.push_back(v);
        second.push_back(v.id);
    }
    s.epochs = {{1, {1, 2, 3, 4, 5}}, {1001, second}};
    return s;
}

// --- trace ingestion --------------------------------------------------------

namespace {

std::string trim(std::string s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
        ++i;
    return s.substr(i);
}

double parse_double(const std::string& field, const char* name, std::size_t line)
{
    const std::string f = trim(field);
    char* end = nullptr;
    const double v = std::strtod(f.c_str(), &end);
    if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v))
        throw ParseError(std::string("invalid ") + name + " '" + f + "'", line);
    return v;
}

long long parse_int(const std::string& field, const char* name, std::size_t line)
{
    const std::string f = trim(field);
    char* end = nullptr;
    const long long v = std::strtoll(f.c_str(), &end, 10);
    if (f.empty() || end != f.c_str() + f.size())
        throw ParseError(std::string("invalid ") + name + " '" + f + "'", line);
    return v;
}

std::string format_time(double t)
{
    std::ostringstream os;
    os << t;
    return os.str();
}

} // namespace

MobilityTrace parse_trace_csv(std::istream& in, ArmId client_id, double comm_range_m)
{
    if (!(comm_range_m > 0.0))
        throw ConfigError("trace: comm_range_m must be positive");
    MobilityTrace trace;
    trace.client_id = client_id;
    trace.comm_range_m = comm_range_m;

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        throw ParseError("empty trace file", 1);
    ++line_no;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
        line = line.substr(3);  // UTF-8 BOM
    if (trim(line) != kTraceHeader)
        throw ParseError(std::string("expected header '") + kTraceHeader + "'", line_no);

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ','))
            fields.push_back(f);
        if (!line.empty() && line.back() == ',')
            fields.emplace_back();
        if (fields.size() != 6)
            throw ParseError("expected 6 fields, got " + std::to_string(fields.size()), line_no);
        TraceRow r;
        r.time_s = parse_double(fields[0], "time_s", line_no);
        r.vehicle_id = parse_int(fields[1], "vehicle_id", line_no);
        r.x_m = parse_double(fields[2], "x_m", line_no);
        r.y_m = parse_double(fields[3], "y_m", line_no);
        r.speed_mps = parse_double(fields[4], "speed_mps", line_no);
        r.heading_flag = static_cast<int>(parse_int(fields[5], "heading_flag", line_no));
        if (r.heading_flag != 0 && r.heading_flag != 1)
            throw ParseError("heading_flag must be 0 or 1", line_no);
        if (!trace.rows.empty() && r.time_s < trace.rows.back().time_s)
            throw ParseError("rows must be sorted by time_s", line_no);
        if (!trace.rows.empty() && r.time_s == trace.rows.back().time_s) {
            for (auto it = trace.rows.rbegin(); it != trace.rows.rend() && it->time_s == r.time_s; ++it)
                if (it->vehicle_id == r.vehicle_id)
                    throw ParseError("duplicate vehicle " + std::to_string(r.vehicle_id) + " at time_s " +
                                         format_time(r.time_s),
                                     line_no);
        }
        trace.rows.push_back(r);
    }
    if (trace.rows.empty())
        throw ParseError("trace has no rows", line_no);
    return trace;
}

MobilityTrace load_trace_csv(const std::string& path, ArmId client_id, double comm_range_m)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open trace file '" + path + "'");
    return parse_trace_csv(in, client_id, comm_range_m);
}

TraceSchedule candidate_sets_from_trace(const MobilityTrace& trace, int rounds_per_sample)
{
    if (rounds_per_sample < 1)
        throw ConfigError("trace: rounds_per_sample must be >= 1");
    TraceSchedule out;
    std::size_t i = 0;
    const auto& rows = trace.rows;
    while (i < rows.size()) {
        std::size_t j = i;
        while (j < rows.size() && rows[j].time_s == rows[i].time_s)
            ++j;
        const TraceRow* client = nullptr;
        for (std::size_t k = i; k < j; ++k)
            if (rows[k].vehicle_id == trace.client_id)
                client = &rows[k];
        const double t = rows[i].time_s;
        if (!client)
            throw ConfigError("trace: client " + std::to_string(trace.client_id) + " missing at time_s " +
                              format_time(t));
        std::map<ArmId, double> dist;
        for (std::size_t k = i; k < j; ++k) {
            const auto& r = rows[k];
            if (r.vehicle_id == trace.client_id || r.heading_flag != client->heading_flag)
                continue;
            const double d = std::hypot(r.x_m - client->x_m, r.y_m - client->y_m);
            if (d <= trace.comm_range_m)
                dist[r.vehicle_id] = std::max(d, 1.0) / 1000.0;  // floor at 1 m keeps pathloss finite
        }
        if (dist.empty())
            throw ConfigError("trace: empty candidate set at time_s " + format_time(t));
        std::vector<ArmId> cands;
        for (const auto& kv : dist)
            cands.push_back(kv.first);
        out.sample_times.push_back(t);
        for (int r = 0; r < rounds_per_sample; ++r) {
            out.candidates.push_back(cands);
            out.distance_km.push_back(dist);
        }
        i = j;
    }
    return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> intervals_of(const std::vector<std::vector<ArmId>>& per_round)
{
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    std::set<ArmId> current;
    for (std::size_t r = 0; r < per_round.size(); ++r) {
        std::set<ArmId> s(per_round[r].begin(), per_round[r].end());
        const auto round = static_cast<std::int64_t>(r + 1);
        if (out.empty() || s != current) {
            out.emplace_back(round, round);
            current = std::move(s);
        } else {
            out.back().second = round;
        }
    }
    return out;
}

Scenario build_trace_scenario(const MobilityTrace& trace, const TraceScenarioOptions& options, const Scenario& base)
{
    if (!(options.cpu_hz_lo > 0.0 && options.cpu_hz_lo <= options.cpu_hz_hi))
        throw ConfigError("trace: need 0 < cpu_hz_lo <= cpu_hz_hi");
    TraceSchedule sched = candidate_sets_from_trace(trace, options.rounds_per_sample);

    Scenario s = base;
    s.name = "trace";
    s.seed = options.seed;
    s.horizon = static_cast<std::int64_t>(sched.candidates.size());
    s.comm_range_km = trace.comm_range_m / 1000.0;
    s.epochs.clear();
    for (auto [first, last] : intervals_of(sched.candidates))
        s.epochs.push_back({first, sched.candidates[static_cast<std::size_t>(first - 1)]});

    std::set<ArmId> all;
    for (const auto& c : sched.candidates)
        all.insert(c.begin(), c.end());
    const double lo = base.vfns.empty() ? 0.2 : base.vfns.front().fraction_lo;
    const double hi = base.vfns.empty() ? 0.5 : base.vfns.front().fraction_hi;
    s.vfns.clear();
    for (ArmId id : all) {
        KeyedStream cpu({options.seed, static_cast<std::uint64_t>(id), 0xc9c0ULL});
        VfnSpec v;
        v.id = id;
        v.max_cpu_hz = cpu.uniform(options.cpu_hz_lo, options.cpu_hz_hi);
        v.distance_km = s.comm_range_km;
        v.fraction_lo = lo;
        v.fraction_hi = hi;
        s.vfns.push_back(v);
    }
    s.round_distance_km = std::move(sched.distance_km);
    TraceSource src;
    src.client_id = trace.client_id;
    src.comm_range_m = trace.comm_range_m;
    src.rounds_per_sample = options.rounds_per_sample;
    src.cpu_hz_lo = options.cpu_hz_lo;
    src.cpu_hz_hi = options.cpu_hz_hi;
    if (base.trace_source)
        src.path = base.trace_source->path;
    s.trace_source = src;
    return s;
}

// --- task stream ------------------------------------------------------------

Task TaskStream::at(std::int64_t round) const
{
    Task task;
    task.intensity = config_.intensity;
    KeyedStream u({key_, static_cast<std::uint64_t>(round), 0x7a5cULL});
    switch (config_.kind) {
    case TaskStreamConfig::Kind::fixed:
        task.size_bits = config_.size_bits;
        break;
    case TaskStreamConfig::Kind::uniform:
        task.size_bits = u.uniform(config_.lo_bits, config_.hi_bits);
        break;
    case TaskStreamConfig::Kind::truncated_normal: {
        double q = 0.0;
        int tries = 0;
        do {
            q = config_.mean_bits + config_.sd_bits * u.normal();
        } while ((q < config_.lo_bits || q > config_.hi_bits) && ++tries < 100000);
        task.size_bits = std::clamp(q, config_.lo_bits, config_.hi_bits);
        break;
    }
    }
    return task;
}

} // namespace fogbandit
