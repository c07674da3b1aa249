#pragma once

#include <fogbandit/harness.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fogbandit {

struct ExperimentSpec {
    enum class Source { builtin, config, trace };

    Source source = Source::builtin;
    std::string path;  // config or trace file
    ArmId client_id = 0;
    double comm_range_m = 400.0;
    int rounds_per_sample = 1;

    std::vector<std::string> policies = {"mix-aalto"};
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    unsigned jobs = 1;

    // Overrides on top of the scenario source.
    std::optional<double> xi;
    std::optional<bool> delta;          // demand weighting of mix-aalto
    std::optional<SupplyMode> beta;     // supply handling of mix-aalto
    std::optional<std::string> task_size;  // Mbit value or "uniform" / "truncated-normal"
    std::optional<std::size_t> arm_count;  // builtin only
};

// Scenario with every override applied and validated.
Scenario build_scenario(const ExperimentSpec& spec);

// parse_policy plus the delta/beta overrides, which apply to mix-aalto only.
PolicySpec resolve_policy(const std::string& token, const ExperimentSpec& spec);

// Writes regret.csv, decomposition.csv, costs.csv, seeds.csv and summary.json into dir.
void write_outputs(const std::string& dir, const ExperimentResult& result, const Scenario& scenario,
                   const ExperimentSpec& spec, const std::string& policy_token, double runtime_s);

std::string output_dir_name(const std::string& policy_token);

// Entry point of the fogbandit executable; args excludes the program name.
// Exit codes: 0 success, 1 runtime failure, 2 usage/config/parse error
// (reported as a JSON object on err).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fogbandit
