#include <fogbandit/cli.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace fogbandit {

namespace {

// Shortest round-trip representation keeps CSVs byte-stable and lossless.
std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty())
            out.push_back(item);
    return out;
}

SupplyMode parse_beta(const std::string& v)
{
    if (v == "proposed")
        return SupplyMode::proposed;
    if (v == "partial")
        return SupplyMode::partial_reset;
    if (v == "full")
        return SupplyMode::full_reset;
    throw ConfigError("unknown beta mode: " + v);
}

std::string beta_name(SupplyMode m)
{
    switch (m) {
    case SupplyMode::proposed: return "proposed";
    case SupplyMode::partial_reset: return "partial";
    case SupplyMode::full_reset: return "full";
    }
    return "?";
}

bool parse_delta(const std::string& v)
{
    if (v == "on")
        return true;
    if (v == "off")
        return false;
    throw ConfigError("unknown delta mode: " + v);
}

void apply_task_size(Scenario& s, const std::string& v)
{
    auto& ts = s.task_stream;
    if (v == "uniform") {
        ts.kind = TaskStreamConfig::Kind::uniform;
        ts.lo_bits = s.q_min;
        ts.hi_bits = s.q_max;
        return;
    }
    if (v == "truncated-normal") {
        ts.kind = TaskStreamConfig::Kind::truncated_normal;
        ts.lo_bits = s.q_min;
        ts.hi_bits = s.q_max;
        return;
    }
    char* end = nullptr;
    const double mbit = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !(mbit > 0.0))
        throw ConfigError("invalid task size: " + v);
    ts.kind = TaskStreamConfig::Kind::fixed;
    ts.size_bits = mbit * 1e6;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot write " + path.string());
    f << text;
    if (!f)
        throw ConfigError("failed writing " + path.string());
}

nlohmann::json overrides_json(const ExperimentSpec& spec)
{
    nlohmann::json o = nlohmann::json::object();
    if (spec.xi)
        o["xi"] = *spec.xi;
    if (spec.delta)
        o["delta_mode"] = *spec.delta ? "on" : "off";
    if (spec.beta)
        o["beta_mode"] = beta_name(*spec.beta);
    if (spec.task_size)
        o["task_size"] = *spec.task_size;
    if (spec.arm_count)
        o["arm_count"] = *spec.arm_count;
    return o;
}

nlohmann::json source_json(const ExperimentSpec& spec)
{
    switch (spec.source) {
    case ExperimentSpec::Source::builtin: return {{"kind", "builtin-synthetic"}};
    case ExperimentSpec::Source::config: return {{"kind", "config"}, {"path", spec.path}};
    case ExperimentSpec::Source::trace:
        return {{"kind", "trace"},
                {"path", spec.path},
                {"client_id", spec.client_id},
                {"comm_range_m", spec.comm_range_m},
                {"rounds_per_sample", spec.rounds_per_sample}};
    }
    return {};
}

void emit_error(std::ostream& err, const std::string& kind, const std::string& message,
                const std::optional<std::string>& token = std::nullopt, std::size_t line = 0)
{
    nlohmann::json e = {{"error", kind}, {"message", message}};
    if (token)
        e["token"] = *token;
    if (line)
        e["line"] = line;
    err << e.dump() << '\n';
}

// Shared scenario/experiment options of run and sweep.
struct Flags {
    std::string scenario;
    std::string trace;
    long long client_id = 0;
    double range_m = 400.0;
    int rounds_per_sample = 1;
    std::string policies = "mix-aalto";
    std::size_t seeds = 20;
    std::string seed_list;
    std::string out;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::optional<double> xi;
    std::string delta, beta, task_size;
    std::optional<std::size_t> arm_count;
};

void add_source_options(CLI::App* cmd, Flags& f)
{
    auto* sc = cmd->add_option("--scenario", f.scenario, "Scenario config file (JSON)");
    auto* tr = cmd->add_option("--trace", f.trace, "Mobility trace CSV");
    sc->excludes(tr);
    cmd->add_option("--client-id", f.client_id, "Client vehicle id in the trace");
    cmd->add_option("--range-m", f.range_m, "Communication range in meters (trace mode)");
    cmd->add_option("--rounds-per-sample", f.rounds_per_sample, "Bandit rounds per trace sample");
}

void add_experiment_options(CLI::App* cmd, Flags& f)
{
    add_source_options(cmd, f);
    cmd->add_option("--policies", f.policies, "Comma-separated policy tokens");
    cmd->add_option("--seeds", f.seeds, "Run seeds 1..N");
    cmd->add_option("--seed-list", f.seed_list, "Comma-separated explicit seeds");
    cmd->add_option("--out", f.out, "Output directory (default $FOGBANDIT_OUT or ./fogbandit-out)");
    cmd->add_option("--jobs", f.jobs, "Worker threads");
    cmd->add_option("--xi", f.xi, "Latency weight in [0, 1]");
    cmd->add_option("--delta", f.delta, "Demand weighting of mix-aalto: on|off");
    cmd->add_option("--beta", f.beta, "Supply handling of mix-aalto: proposed|partial|full");
    cmd->add_option("--task-size", f.task_size, "Fixed size in Mbit, or uniform|truncated-normal");
    cmd->add_option("--arm-count", f.arm_count, "Nodes appearing at round 1001 (builtin only)");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s)
{
    std::vector<std::uint64_t> out;
    for (const auto& item : split(s, ',')) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
        if (end != item.c_str() + item.size())
            throw ConfigError("invalid seed: " + item);
        out.push_back(v);
    }
    return out;
}

ExperimentSpec to_spec(const Flags& f)
{
    ExperimentSpec spec;
    if (!f.scenario.empty()) {
        spec.source = ExperimentSpec::Source::config;
        spec.path = f.scenario;
    } else if (!f.trace.empty()) {
        spec.source = ExperimentSpec::Source::trace;
        spec.path = f.trace;
    }
    spec.client_id = f.client_id;
    spec.comm_range_m = f.range_m;
    spec.rounds_per_sample = f.rounds_per_sample;
    spec.policies = split(f.policies, ',');
    if (spec.policies.empty())
        throw ConfigError("at least one policy is required");
    if (!f.seed_list.empty()) {
        spec.seeds = parse_seed_list(f.seed_list);
    } else {
        if (f.seeds < 1)
            throw ConfigError("--seeds must be >= 1");
        for (std::uint64_t s = 1; s <= f.seeds; ++s)
            spec.seeds.push_back(s);
    }
    if (spec.seeds.empty())
        throw ConfigError("at least one seed is required");
    if (!f.out.empty())
        spec.out_dir = f.out;
    else if (const char* env = std::getenv("FOGBANDIT_OUT"); env && *env)
        spec.out_dir = env;
    else
        spec.out_dir = "fogbandit-out";
    spec.jobs = std::max(1u, f.jobs);
    spec.xi = f.xi;
    if (!f.delta.empty())
        spec.delta = parse_delta(f.delta);
    if (!f.beta.empty())
        spec.beta = parse_beta(f.beta);
    if (!f.task_size.empty())
        spec.task_size = f.task_size;
    spec.arm_count = f.arm_count;
    return spec;
}

struct PolicyRun {
    std::string token;
    ExperimentResult result;
};

std::vector<PolicyRun> run_policies(const ExperimentSpec& spec, const Scenario& scenario,
                                    std::vector<double>* runtimes = nullptr)
{
    std::vector<PolicySpec> resolved;
    for (const auto& tok : spec.policies)
        resolved.push_back(resolve_policy(tok, spec));
    std::vector<PolicyRun> out;
    for (std::size_t i = 0; i < resolved.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        RunOptions opts;
        opts.jobs = spec.jobs;
        out.push_back({spec.policies[i], run_experiment(scenario, resolved[i], spec.seeds, opts)});
        if (runtimes)
            runtimes->push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return out;
}

int cmd_run(const Flags& f, std::ostream& out)
{
    const ExperimentSpec spec = to_spec(f);
    const Scenario scenario = build_scenario(spec);
    std::vector<double> runtimes;
    const auto runs = run_policies(spec, scenario, &runtimes);
    fs::create_directories(spec.out_dir);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const fs::path dir = fs::path(spec.out_dir) / output_dir_name(runs[i].token);
        write_outputs(dir.string(), runs[i].result, scenario, spec, runs[i].token, runtimes[i]);
        out << runs[i].token << ": final regret " << num(runs[i].result.final_regret_mean()) << " +/- "
            << num(runs[i].result.final_regret_std()) << " -> " << dir.string() << '\n';
    }
    return 0;
}

const std::vector<std::string> kAxes = {"xi", "task_size", "arm_count", "delta_mode", "beta_mode"};

std::vector<std::string> default_axis_values(const std::string& axis)
{
    if (axis == "xi")
        return {"0", "0.5", "1"};
    if (axis == "task_size")
        return {"0.3", "0.6", "0.9", "uniform"};
    if (axis == "arm_count")
        return {"1", "2", "3", "4", "5"};
    if (axis == "delta_mode")
        return {"on", "off"};
    return {"proposed", "partial", "full"};
}

ExperimentSpec at_axis_point(ExperimentSpec spec, const std::string& axis, const std::string& value)
{
    if (axis == "xi") {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (value.empty() || end != value.c_str() + value.size())
            throw ConfigError("invalid xi value: " + value);
        spec.xi = v;
    } else if (axis == "task_size") {
        spec.task_size = value;
    } else if (axis == "arm_count") {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
        if (value.empty() || end != value.c_str() + value.size())
            throw ConfigError("invalid arm_count value: " + value);
        spec.arm_count = static_cast<std::size_t>(v);
    } else if (axis == "delta_mode") {
        spec.delta = parse_delta(value);
    } else {
        spec.beta = parse_beta(value);
    }
    return spec;
}

int cmd_sweep(const Flags& f, const std::string& axis, const std::string& values, std::ostream& out)
{
    if (std::find(kAxes.begin(), kAxes.end(), axis) == kAxes.end())
        throw ConfigError("unknown sweep axis: " + axis);
    const ExperimentSpec base = to_spec(f);
    const auto points = values.empty() ? default_axis_values(axis) : split(values, ',');
    std::string csv = "axis,value,policy,final_regret_mean,final_regret_std,latency_per_bit_mean,"
                      "latency_per_bit_std,energy_per_bit_mean,energy_per_bit_std\n";
    // Validate every point before spending time on runs.
    std::vector<std::pair<ExperimentSpec, Scenario>> prepared;
    for (const auto& v : points) {
        ExperimentSpec spec = at_axis_point(base, axis, v);
        Scenario s = build_scenario(spec);
        for (const auto& tok : spec.policies)
            resolve_policy(tok, spec);
        prepared.emplace_back(std::move(spec), std::move(s));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (const auto& run : run_policies(prepared[i].first, prepared[i].second)) {
            const auto& r = run.result;
            csv += axis + "," + points[i] + "," + run.token + "," + num(r.final_regret_mean()) + "," +
                   num(r.final_regret_std()) + "," + num(r.latency_per_bit.mean.back()) + "," +
                   num(r.latency_per_bit.std.back()) + "," + num(r.energy_per_bit.mean.back()) + "," +
                   num(r.energy_per_bit.std.back()) + "\n";
        }
    }
    fs::create_directories(base.out_dir);
    const fs::path path = fs::path(base.out_dir) / ("sweep_" + axis + ".csv");
    write_file(path, csv);
    out << csv;
    return 0;
}

int cmd_validate(const Flags& f, std::ostream& out)
{
    ExperimentSpec spec;
    if (!f.scenario.empty()) {
        spec.source = ExperimentSpec::Source::config;
        spec.path = f.scenario;
    } else if (!f.trace.empty()) {
        spec.source = ExperimentSpec::Source::trace;
        spec.path = f.trace;
    }
    spec.client_id = f.client_id;
    spec.comm_range_m = f.range_m;
    spec.rounds_per_sample = f.rounds_per_sample;
    const Scenario s = build_scenario(spec);
    out << scenario_to_json(s).dump(2) << '\n';
    return 0;
}

} // namespace

Scenario build_scenario(const ExperimentSpec& spec)
{
    Scenario s;
    switch (spec.source) {
    case ExperimentSpec::Source::builtin:
        s = spec.arm_count ? build_appearing_arms(*spec.arm_count) : build_synthetic();
        break;
    case ExperimentSpec::Source::config:
        s = load_scenario_file(spec.path);
        break;
    case ExperimentSpec::Source::trace: {
        if (spec.rounds_per_sample < 1)
            throw ConfigError("rounds_per_sample must be >= 1");
        const auto trace = load_trace_csv(spec.path, spec.client_id, spec.comm_range_m);
        TraceScenarioOptions opts;
        opts.rounds_per_sample = spec.rounds_per_sample;
        s = build_trace_scenario(trace, opts);
        break;
    }
    }
    if (spec.arm_count && spec.source != ExperimentSpec::Source::builtin)
        throw ConfigError("arm_count applies to the builtin synthetic scenario only");
    if (spec.xi) {
        if (!(*spec.xi >= 0.0 && *spec.xi <= 1.0))
            throw ConfigError("xi must be in [0, 1]");
        s.xi = *spec.xi;
    }
    if (spec.task_size)
        apply_task_size(s, *spec.task_size);
    s.validate();
    return s;
}

PolicySpec resolve_policy(const std::string& token, const ExperimentSpec& spec)
{
    PolicySpec p = parse_policy(token);
    if (p.kind == PolicyKind::mix_aalto) {
        if (spec.delta)
            p.mix.demand_weighting = *spec.delta;
        if (spec.beta)
            p.mix.supply = *spec.beta;
    }
    return p;
}

std::string output_dir_name(const std::string& policy_token)
{
    std::string d = policy_token;
    std::replace(d.begin(), d.end(), ':', '_');
    return d;
}

void write_outputs(const std::string& dir, const ExperimentResult& r, const Scenario& scenario,
                   const ExperimentSpec& spec, const std::string& policy_token, double runtime_s)
{
    fs::create_directories(dir);
    const std::size_t n = r.regret.mean.size();

    std::string regret = "round,mean,std,bound\n";
    std::string decomp = "round,var_mean,var_std,bias_mean,bias_std,exp3_mean,exp3_std\n";
    std::string costs = "round,latency_per_bit_mean,latency_per_bit_std,energy_per_bit_mean,"
                        "energy_per_bit_std,unit_cost_raw_mean,unit_cost_raw_std\n";
    std::string seeds = "round";
    for (const auto& s : r.per_seed)
        seeds += ",seed_" + std::to_string(s.seed);
    seeds += "\n";
    for (std::size_t t = 0; t < n; ++t) {
        const std::string round = std::to_string(t + 1);
        regret += round + "," + num(r.regret.mean[t]) + "," + num(r.regret.std[t]) + "," + num(r.bound[t]) + "\n";
        decomp += round + "," + num(r.var.mean[t]) + "," + num(r.var.std[t]) + "," + num(r.bias.mean[t]) + "," +
                  num(r.bias.std[t]) + "," + num(r.exp3.mean[t]) + "," + num(r.exp3.std[t]) + "\n";
        costs += round + "," + num(r.latency_per_bit.mean[t]) + "," + num(r.latency_per_bit.std[t]) + "," +
                 num(r.energy_per_bit.mean[t]) + "," + num(r.energy_per_bit.std[t]) + "," +
                 num(r.unit_cost_raw.mean[t]) + "," + num(r.unit_cost_raw.std[t]) + "\n";
        seeds += round;
        for (const auto& s : r.per_seed)
            seeds += "," + num(s.regret[t]);
        seeds += "\n";
    }
    const fs::path base(dir);
    write_file(base / "regret.csv", regret);
    write_file(base / "decomposition.csv", decomp);
    write_file(base / "costs.csv", costs);
    write_file(base / "seeds.csv", seeds);

    std::size_t task_clamps = 0;
    std::vector<std::uint64_t> seed_ids;
    for (const auto& s : r.per_seed) {
        task_clamps += s.clamped_tasks;
        seed_ids.push_back(s.seed);
    }
    nlohmann::json summary = {
        {"version", FOGBANDIT_VERSION},
        {"policy", policy_token},
        {"policy_name", r.policy},
        {"seeds", seed_ids},
        {"rounds", n},
        {"final_regret_mean", n ? r.regret.mean.back() : 0.0},
        {"final_regret_std", n ? r.regret.std.back() : 0.0},
        {"final_per_round_regret_mean", n ? r.per_round_regret.mean.back() : 0.0},
        {"final_bound", n ? r.bound.back() : 0.0},
        {"bound_coverage", r.bound_coverage()},
        {"final_latency_per_bit_mean", n ? r.latency_per_bit.mean.back() : 0.0},
        {"final_energy_per_bit_mean", n ? r.energy_per_bit.mean.back() : 0.0},
        {"clamp_rate", r.clamp_rate},
        {"task_size_clamps", task_clamps},
        {"runtime_s", runtime_s},
        {"jobs", spec.jobs},
        {"source", source_json(spec)},
        {"overrides", overrides_json(spec)},
        {"scenario", scenario_to_json(scenario)},
    };
    write_file(base / "summary.json", summary.dump(2) + "\n");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Adversarial bandit task offloading simulator", "fogbandit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(FOGBANDIT_VERSION));

    Flags run_flags, sweep_flags, validate_flags;
    std::string axis, values;
    sweep_flags.policies = "mix-aalto";

    auto* run = app.add_subcommand("run", "Run policies over seeds and write regret/cost series");
    add_experiment_options(run, run_flags);
    auto* sweep = app.add_subcommand("sweep", "Sweep one parameter and write one summary row per point");
    add_experiment_options(sweep, sweep_flags);
    sweep->add_option("--axis", axis, "xi | task_size | arm_count | delta_mode | beta_mode")->required();
    sweep->add_option("--values", values, "Comma-separated axis values (default per axis)");
    auto* validate = app.add_subcommand("validate", "Check a scenario or trace and print the normalized config");
    add_source_options(validate, validate_flags);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << FOGBANDIT_VERSION << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "usage", e.what());
        return 2;
    }

    try {
        if (run->parsed())
            return cmd_run(run_flags, out);
        if (sweep->parsed())
            return cmd_sweep(sweep_flags, axis, values, out);
        return cmd_validate(validate_flags, out);
    } catch (const ParseError& e) {
        emit_error(err, "parse", e.what(), std::nullopt, e.line());
        return 2;
    } catch (const ConfigError& e) {
        std::optional<std::string> token;
        const std::string msg = e.what();
        if (auto colon = msg.rfind(": "); colon != std::string::npos && msg.rfind("unknown ", 0) == 0)
            token = msg.substr(colon + 2);
        emit_error(err, "config", msg, token);
        return 2;
    } catch (const std::exception& e) {
        emit_error(err, "runtime", e.what());
        return 1;
    }
}

} // namespace fogbandit
