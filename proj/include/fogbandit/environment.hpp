#pragma once

#include <fogbandit/cost_model.hpp>
#include <fogbandit/scenario.hpp>

#include <map>
#include <span>
#include <vector>

namespace fogbandit {

// Oblivious adversary over allocated CPU fractions. Every value is a pure
// function of (key, round, arm); the adversary never sees learner decisions.
class Adversary {
public:
    Adversary(const AdversaryConfig& config, std::uint64_t run_seed, std::int64_t horizon);

    std::size_t phase_of(std::int64_t round) const;
    std::size_t phase_count() const { return phase_starts_.size(); }
    double phase_mean(const VfnSpec& vfn, std::int64_t round) const;
    double fraction(const VfnSpec& vfn, std::int64_t round) const;

private:
    AdversaryConfig config_;
    std::uint64_t key_;
    std::vector<std::int64_t> phase_starts_;
};

// fraction(round) * F_k.
double allocated_frequency(const VfnSpec& vfn, const Adversary& adversary, std::int64_t round);

// Raw per-bit cost of the worst admissible configuration: largest distance,
// fading power at its 1st percentile, and the smallest or largest admissible
// CPU frequency (the per-bit cost is convex in f, so one of the two is worst).
double normalization_scale(const Scenario& scenario);

inline constexpr double kFadingFloorQuantile = 0.01;

struct ArmCost {
    CostBreakdown cost;
    double freq_hz = 0.0;
    double rate_bps = 0.0;
    double fading = 0.0;
};

class Environment {
public:
    Environment(const Scenario& scenario, std::uint64_t run_seed);

    // Costs of every candidate for this round with fresh fading per arm.
    std::map<ArmId, ArmCost> env_round(std::span<const ArmId> candidates, const Task& task,
                                       std::int64_t round) const;

    double fading_power(ArmId id, std::int64_t round) const;
    double l_scale() const { return l_scale_; }
    const Adversary& adversary() const { return adversary_; }
    const Scenario& scenario() const { return scenario_; }

private:
    const Scenario& scenario_;
    std::uint64_t key_;
    Adversary adversary_;
    double l_scale_;
    double tx_power_w_;
};

} // namespace fogbandit
