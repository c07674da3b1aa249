#pragma once

#include <fogbandit/environment.hpp>
#include <fogbandit/policy.hpp>
#include <fogbandit/scenario.hpp>

#include <cstdint>
#include <vector>

namespace fogbandit {

// One round of a run. Vectors are aligned with candidates.
struct RoundRecord {
    std::int64_t round = 0;
    std::vector<ArmId> candidates;
    std::vector<double> distribution;
    std::vector<double> estimates;
    std::vector<double> losses;  // true normalized loss of every candidate
    std::size_t chosen_index = 0;
    ArmId chosen = 0;
    double realized_loss = 0.0;
    double delta = 1.0;
    double eta = 0.0;
    double gamma = 0.0;
    double task_bits = 0.0;
    // Chosen arm, raw units.
    double latency_per_bit = 0.0;
    double energy_per_bit = 0.0;
    double unit_cost_raw = 0.0;
};

struct RunRecord {
    std::string policy;
    std::uint64_t seed = 0;
    std::vector<RoundRecord> rounds;
    std::size_t clamped_losses = 0;  // normalized losses saturated at 1
    std::size_t total_losses = 0;
    std::size_t clamped_tasks = 0;   // task sizes clamped into [q_min, q_max]

    double clamp_rate() const
    {
        return total_losses ? static_cast<double>(clamped_losses) / static_cast<double>(total_losses) : 0.0;
    }
};

// Stream keys derived from the run seed; the environment key is shared by
// every policy so policies face identical losses for the same seed.
std::uint64_t policy_seed(std::uint64_t run_seed);

RunRecord run_single(const Scenario& scenario, const PolicySpec& policy, std::uint64_t seed);

struct Interval {
    std::int64_t first = 1;
    std::int64_t last = 1;
    std::vector<ArmId> arms;  // sorted
};

// Maximal runs of unchanged candidate sets.
std::vector<Interval> record_intervals(const RunRecord& record);
std::vector<Interval> scenario_intervals(const Scenario& scenario);

// Per interval: argmin of the empirical mean true loss; ties go to the lowest id.
std::vector<ArmId> interval_oracle(const RunRecord& record, const std::vector<Interval>& intervals);

// Prefix sums of chosen loss minus the interval oracle's loss.
std::vector<double> cumulative_regret(const RunRecord& record, const std::vector<Interval>& intervals,
                                      const std::vector<ArmId>& oracle);

// R_var = Lhat* - L*, R_bias = L_chosen - Ltilde, R_exp3 = Ltilde - Lhat*,
// with Ltilde the running sum of sum_k p_k lhat_k.
struct Decomposition {
    std::vector<double> var;
    std::vector<double> bias;
    std::vector<double> exp3;
};

// Throws ContractError if the three parts differ from the regret by more than 1e-9.
Decomposition decompose_regret(const RunRecord& record, const std::vector<Interval>& intervals,
                               const std::vector<ArmId>& oracle, const std::vector<double>& regret);

// Per-interval high-probability regret bound summed over intervals, as a prefix series:
//   ln K / eta_T + (1 / (2 gamma_T) + 1) ln(K / nu) + sum_t (gamma_t + eta_t / 2) K.
std::vector<double> theoretical_bound(const HyperSchedule& schedule, const std::vector<Interval>& intervals,
                                      double nu);

struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> std;  // sample standard deviation, 0 for a single seed
};

// Pointwise statistics over equally long series.
SeriesStats aggregate(const std::vector<std::vector<double>>& series);

// Derived per-seed series; RunRecords themselves are only kept on request.
struct SeedResult {
    std::uint64_t seed = 0;
    std::vector<double> regret;
    Decomposition decomposition;
    std::vector<double> avg_latency_per_bit;  // running averages of the chosen arm
    std::vector<double> avg_energy_per_bit;
    std::vector<double> avg_unit_cost_raw;
    std::vector<double> bound;
    std::size_t clamped_losses = 0;
    std::size_t total_losses = 0;
    std::size_t clamped_tasks = 0;
};

SeedResult analyze(const RunRecord& record, const Scenario& scenario);

struct ExperimentResult {
    std::string policy;
    std::vector<SeedResult> per_seed;  // sorted by seed
    std::vector<RunRecord> records;    // only with keep_records
    SeriesStats regret;
    SeriesStats per_round_regret;
    SeriesStats var, bias, exp3;
    SeriesStats latency_per_bit, energy_per_bit, unit_cost_raw;
    std::vector<double> bound;  // identical across seeds on a fixed schedule of candidate sets
    double clamp_rate = 0.0;

    double final_regret_mean() const { return regret.mean.empty() ? 0.0 : regret.mean.back(); }
    double final_regret_std() const { return regret.std.empty() ? 0.0 : regret.std.back(); }
    // Fraction of seeds whose final regret stays within the final bound.
    double bound_coverage() const;
};

struct RunOptions {
    unsigned jobs = 1;
    bool keep_records = false;
};

// Independent runs per seed on a worker pool; results do not depend on the
// seed order or the number of workers.
ExperimentResult run_experiment(const Scenario& scenario, const PolicySpec& policy,
                                const std::vector<std::uint64_t>& seeds, const RunOptions& options = {});

} // namespace fogbandit
