#include <fogbandit/scenario.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fogbandit {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items())
        if (!ok.count(item.key()))
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

double number(const json& obj, const char* key, const std::string& where, double fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

std::int64_t integer(const json& obj, const char* key, const std::string& where, std::int64_t fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

std::uint64_t seed_value(const json& obj, const char* key, const std::string& where, std::uint64_t fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where + "." + key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::pair<double, double> range(const json& obj, const char* key, const std::string& where,
                                std::pair<double, double> fallback)
{
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(where + "." + key + ": expected [lo, hi]");
    return {v[0].get<double>(), v[1].get<double>()};
}

void read_channel(const json& j, ChannelParams& c)
{
    check_keys(j, {"tx_power_dbm", "bandwidth_hz", "noise_dbm_per_hz", "interference_w"}, "channel");
    c.tx_power_dbm = number(j, "tx_power_dbm", "channel", c.tx_power_dbm);
    c.bandwidth_hz = number(j, "bandwidth_hz", "channel", c.bandwidth_hz);
    c.noise_dbm_per_hz = number(j, "noise_dbm_per_hz", "channel", c.noise_dbm_per_hz);
    c.interference_w = number(j, "interference_w", "channel", c.interference_w);
}

void read_adversary(const json& j, AdversaryConfig& a)
{
    check_keys(j, {"phase_length_mean", "jitter_width", "seed"}, "adversary");
    a.phase_length_mean = number(j, "phase_length_mean", "adversary", a.phase_length_mean);
    a.jitter_width = number(j, "jitter_width", "adversary", a.jitter_width);
    a.seed = seed_value(j, "seed", "adversary", a.seed);
}

void read_task_stream(const json& j, TaskStreamConfig& t)
{
    check_keys(j, {"kind", "size_bits", "lo_bits", "hi_bits", "mean_bits", "sd_bits", "intensity_cycles_per_bit"},
               "task_stream");
    if (j.contains("kind")) {
        if (!j.at("kind").is_string())
            throw ConfigError("task_stream.kind: expected a string");
        const auto k = j.at("kind").get<std::string>();
        if (k == "fixed")
            t.kind = TaskStreamConfig::Kind::fixed;
        else if (k == "uniform")
            t.kind = TaskStreamConfig::Kind::uniform;
        else if (k == "truncated_normal")
            t.kind = TaskStreamConfig::Kind::truncated_normal;
        else
            throw ConfigError("task_stream.kind: unknown kind '" + k + "'");
    }
    t.size_bits = number(j, "size_bits", "task_stream", t.size_bits);
    t.lo_bits = number(j, "lo_bits", "task_stream", t.lo_bits);
    t.hi_bits = number(j, "hi_bits", "task_stream", t.hi_bits);
    t.mean_bits = number(j, "mean_bits", "task_stream", t.mean_bits);
    t.sd_bits = number(j, "sd_bits", "task_stream", t.sd_bits);
    t.intensity = number(j, "intensity_cycles_per_bit", "task_stream", t.intensity);
}

void read_schedule(const json& j, HyperSchedule& s)
{
    check_keys(j, {"eta_scale", "gamma_rule", "phi", "gamma_constant"}, "schedule");
    s.eta_scale = number(j, "eta_scale", "schedule", s.eta_scale);
    s.phi = number(j, "phi", "schedule", s.phi);
    s.gamma_constant = number(j, "gamma_constant", "schedule", s.gamma_constant);
    if (j.contains("gamma_rule")) {
        const auto& r = j.at("gamma_rule");
        if (r == "ratio")
            s.gamma_rule = HyperSchedule::GammaRule::ratio;
        else if (r == "constant")
            s.gamma_rule = HyperSchedule::GammaRule::constant;
        else
            throw ConfigError("schedule.gamma_rule: expected \"ratio\" or \"constant\"");
    }
}

std::vector<VfnSpec> read_vfns(const json& j)
{
    if (!j.is_array())
        throw ConfigError("vfns: expected an array");
    std::vector<VfnSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "vfns[" + std::to_string(i) + "]";
        const json& v = j[i];
        check_keys(v, {"id", "max_cpu_hz", "distance_km", "fraction_range"}, where);
        if (!v.contains("id") || !v.contains("max_cpu_hz") || !v.contains("distance_km"))
            throw ConfigError(where + ": id, max_cpu_hz and distance_km are required");
        VfnSpec s;
        s.id = integer(v, "id", where, 0);
        s.max_cpu_hz = number(v, "max_cpu_hz", where, 0.0);
        s.distance_km = number(v, "distance_km", where, 0.0);
        auto [lo, hi] = range(v, "fraction_range", where, {s.fraction_lo, s.fraction_hi});
        s.fraction_lo = lo;
        s.fraction_hi = hi;
        out.push_back(s);
    }
    return out;
}

std::vector<Epoch> read_epochs(const json& j)
{
    if (!j.is_array())
        throw ConfigError("epochs: expected an array");
    std::vector<Epoch> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "epochs[" + std::to_string(i) + "]";
        const json& e = j[i];
        check_keys(e, {"start_round", "arms"}, where);
        if (!e.contains("start_round") || !e.contains("arms") || !e.at("arms").is_array())
            throw ConfigError(where + ": start_round and arms[] are required");
        Epoch ep;
        ep.start_round = integer(e, "start_round", where, 1);
        for (const auto& a : e.at("arms")) {
            if (!a.is_number_integer())
                throw ConfigError(where + ".arms: expected integer ids");
            ep.arms.push_back(a.get<ArmId>());
        }
        out.push_back(std::move(ep));
    }
    return out;
}

} // namespace

Scenario scenario_from_json(const json& doc, const std::string& base_dir)
{
    check_keys(doc,
               {"base", "name", "seed", "horizon", "xi", "rho", "nu", "q_min_bits", "q_max_bits", "comm_range_km",
                "channel", "adversary", "task_stream", "schedule", "vfns", "epochs", "trace"},
               "scenario");

    const std::uint64_t seed = seed_value(doc, "seed", "scenario", 1);
    Scenario s;
    if (doc.contains("base")) {
        if (doc.at("base") != "synthetic")
            throw ConfigError("scenario.base: only \"synthetic\" is available");
        s = build_synthetic(seed);
    } else {
        s.seed = seed;
    }
    if (doc.contains("name")) {
        if (!doc.at("name").is_string())
            throw ConfigError("scenario.name: expected a string");
        s.name = doc.at("name").get<std::string>();
    }
    s.xi = number(doc, "xi", "scenario", s.xi);
    s.rho = number(doc, "rho", "scenario", s.rho);
    s.nu = number(doc, "nu", "scenario", s.nu);
    s.q_min = number(doc, "q_min_bits", "scenario", s.q_min);
    s.q_max = number(doc, "q_max_bits", "scenario", s.q_max);
    s.comm_range_km = number(doc, "comm_range_km", "scenario", s.comm_range_km);
    if (doc.contains("channel"))
        read_channel(doc.at("channel"), s.channel);
    if (doc.contains("adversary"))
        read_adversary(doc.at("adversary"), s.adversary);
    if (doc.contains("task_stream"))
        read_task_stream(doc.at("task_stream"), s.task_stream);
    if (doc.contains("schedule"))
        read_schedule(doc.at("schedule"), s.schedule);

    if (doc.contains("trace")) {
        if (doc.contains("vfns") || doc.contains("epochs"))
            throw ConfigError("scenario: trace excludes explicit vfns/epochs");
        const json& t = doc.at("trace");
        check_keys(t, {"path", "client_id", "comm_range_m", "rounds_per_sample", "cpu_hz_range"}, "trace");
        if (!t.contains("path") || !t.at("path").is_string())
            throw ConfigError("trace.path: required string");
        std::filesystem::path p = t.at("path").get<std::string>();
        if (p.is_relative())
            p = std::filesystem::path(base_dir) / p;
        TraceScenarioOptions opt;
        opt.seed = seed;
        opt.rounds_per_sample = static_cast<int>(integer(t, "rounds_per_sample", "trace", 1));
        auto [lo, hi] = range(t, "cpu_hz_range", "trace", {opt.cpu_hz_lo, opt.cpu_hz_hi});
        opt.cpu_hz_lo = lo;
        opt.cpu_hz_hi = hi;
        const ArmId client = integer(t, "client_id", "trace", 0);
        const double range_m = number(t, "comm_range_m", "trace", 400.0);
        MobilityTrace trace = load_trace_csv(p.string(), client, range_m);
        Scenario base = s;
        base.trace_source = TraceSource{t.at("path").get<std::string>()};
        s = build_trace_scenario(trace, opt, base);
        if (doc.contains("name"))
            s.name = doc.at("name").get<std::string>();
        if (doc.contains("horizon") && integer(doc, "horizon", "scenario", 0) != s.horizon)
            throw ConfigError("scenario.horizon: does not match the trace length " + std::to_string(s.horizon));
    } else {
        if (doc.contains("vfns"))
            s.vfns = read_vfns(doc.at("vfns"));
        if (doc.contains("epochs"))
            s.epochs = read_epochs(doc.at("epochs"));
        s.horizon = integer(doc, "horizon", "scenario", s.horizon);
    }
    s.validate();
    return s;
}

Scenario load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n')
                ++line;
        throw ParseError(e.what(), line);
    }
    const auto dir = std::filesystem::path(path).parent_path();
    return scenario_from_json(doc, dir.empty() ? "." : dir.string());
}

json scenario_to_json(const Scenario& s)
{
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["horizon"] = s.horizon;
    j["xi"] = s.xi;
    j["rho"] = s.rho;
    j["nu"] = s.nu;
    j["q_min_bits"] = s.q_min;
    j["q_max_bits"] = s.q_max;
    j["comm_range_km"] = s.comm_range_km;
    j["channel"] = {{"tx_power_dbm", s.channel.tx_power_dbm},
                    {"bandwidth_hz", s.channel.bandwidth_hz},
                    {"noise_dbm_per_hz", s.channel.noise_dbm_per_hz},
                    {"interference_w", s.channel.interference_w}};
    j["adversary"] = {{"phase_length_mean", s.adversary.phase_length_mean},
                      {"jitter_width", s.adversary.jitter_width},
                      {"seed", s.adversary.seed}};
    const auto& t = s.task_stream;
    json ts = {{"kind", task_kind_name(t.kind)}, {"intensity_cycles_per_bit", t.intensity}};
    switch (t.kind) {
    case TaskStreamConfig::Kind::fixed: ts["size_bits"] = t.size_bits; break;
    case TaskStreamConfig::Kind::truncated_normal:
        ts["mean_bits"] = t.mean_bits;
        ts["sd_bits"] = t.sd_bits;
        [[fallthrough]];
    case TaskStreamConfig::Kind::uniform:
        ts["lo_bits"] = t.lo_bits;
        ts["hi_bits"] = t.hi_bits;
        break;
    }
    j["task_stream"] = ts;
    json sch = {{"eta_scale", s.schedule.eta_scale}};
    if (s.schedule.gamma_rule == HyperSchedule::GammaRule::ratio) {
        sch["gamma_rule"] = "ratio";
        sch["phi"] = s.schedule.phi;
    } else {
        sch["gamma_rule"] = "constant";
        sch["gamma_constant"] = s.schedule.gamma_constant;
    }
    j["schedule"] = sch;
    if (s.trace_source) {
        const auto& src = *s.trace_source;
        j["trace"] = {{"path", src.path},
                      {"client_id", src.client_id},
                      {"comm_range_m", src.comm_range_m},
                      {"rounds_per_sample", src.rounds_per_sample},
                      {"cpu_hz_range", {src.cpu_hz_lo, src.cpu_hz_hi}}};
    } else {
        json vfns = json::array();
        for (const auto& v : s.vfns)
            vfns.push_back({{"id", v.id},
                            {"max_cpu_hz", v.max_cpu_hz},
                            {"distance_km", v.distance_km},
                            {"fraction_range", {v.fraction_lo, v.fraction_hi}}});
        j["vfns"] = vfns;
        json epochs = json::array();
        for (const auto& e : s.epochs)
            epochs.push_back({{"start_round", e.start_round}, {"arms", e.arms}});
        j["epochs"] = epochs;
    }
    return j;
}

} // namespace fogbandit
