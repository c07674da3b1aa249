#pragma once

#include <fogbandit/common.hpp>
#include <fogbandit/rng.hpp>

#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

namespace fogbandit {

// Inputs of one offloading decision.
struct RoundContext {
    std::vector<ArmId> candidates;  // non-empty, no duplicates, order defines sampling order
    double task_size = 0.0;         // bits
    double q_min = 0.0;             // bits
    double q_max = 1.0;             // bits
    std::int64_t round = 1;         // 1-based

    void validate() const;
};

struct Decision {
    std::vector<ArmId> candidates;
    std::vector<double> distribution;  // aligned with candidates
    ArmId chosen = 0;
    std::size_t chosen_index = 0;
    double delta_used = 1.0;
    std::map<ArmId, double> beta_used;
};

struct Feedback {
    ArmId chosen = 0;
    double realized_loss = 0.0;  // normalized, in [0, 1]
};

// Everything a policy produced in one round. estimates is aligned with
// decision.candidates and holds the loss estimate the policy fed into its
// scores (zero for unobserved arms under bandit feedback).
struct StepOutcome {
    Decision decision;
    Feedback feedback;
    std::vector<double> estimates;
    double eta = 0.0;
    double gamma = 0.0;
    bool task_clamped = false;
};

// Realized normalized loss of an arm for the current round.
using LossFn = std::function<double(ArmId)>;

// Per-client learning state. Scores exist for exactly the arms in known_arms.
struct PolicyState {
    std::map<ArmId, double> scores;
    std::set<ArmId> known_arms;
    std::vector<ArmId> previous_candidates;
    std::int64_t round = 0;  // last completed round
    PolicyRng rng;

    explicit PolicyState(std::uint64_t seed = 0) : rng(seed) {}

    // Advances round, throws if ctx.round is not round + 1.
    void begin_round(const RoundContext& ctx);
};

// Learning-rate / implicit-exploration schedule.
//   eta_t   = min(1, eta_scale * sqrt(ln K / (K t)))
//   gamma_t = min(1, phi * eta_t)           (ratio rule)
//   gamma_t = gamma_constant                (constant rule, rejected by validate_schedule)
struct HyperSchedule {
    enum class GammaRule { ratio, constant };

    double eta_scale = 1.0;
    double phi = 0.5;
    GammaRule gamma_rule = GammaRule::ratio;
    double gamma_constant = 0.1;

    double eta(std::int64_t t, std::size_t k_count) const;
    double gamma(std::int64_t t, std::size_t k_count) const;
};

// Checks eta_t <= 2 gamma_t and a constant gamma/eta ratio over t in [1, horizon]
// for every arm count in k_counts. Throws ConfigError naming the violation.
void validate_schedule(const HyperSchedule& schedule, std::int64_t horizon, std::span<const std::size_t> k_counts);

double eta_schedule(std::int64_t t, std::size_t k_count);
double gamma_schedule(std::int64_t t, std::size_t k_count);

struct DemandWeight {
    double value = 1.0;
    bool clamped = false;
};

// delta = 1 + (q - q_min) / (q_max - q_min), with q clamped into [q_min, q_max].
DemandWeight demand_weight(double task_size, double q_min, double q_max);

enum class SupplyMode { proposed, partial_reset, full_reset };

struct SupplyPatch {
    std::map<ArmId, double> beta;     // per candidate
    std::map<ArmId, double> carried;  // score carried into the weight, per candidate
    std::vector<ArmId> appearing;     // new or re-appearing candidates
    bool candidate_set_changed = false;
};

// Score patch for appearing arms. An arm is existing when it was in the
// previous round's candidate set, new when it has never been seen, and
// re-appearing otherwise.
//   existing:     beta = 0, carried = own score
//   new:          beta = min(existing scores), carried = 0
//   re-appearing: beta = max(min(existing scores), own score), carried = 0
// With no existing arm left every beta is 0.
SupplyPatch supply_patch(std::span<const ArmId> candidates, const std::map<ArmId, double>& known_scores,
                         const std::set<ArmId>& previously_seen, std::span<const ArmId> previous_candidates);

// Reset variants used by the Exp3IX baselines: beta is always 0; appearing
// arms (partial) or every arm on any set change (full) carry a zero score.
SupplyPatch supply_patch(SupplyMode mode, std::span<const ArmId> candidates,
                         const std::map<ArmId, double>& known_scores, const std::set<ArmId>& previously_seen,
                         std::span<const ArmId> previous_candidates);

// p_k = exp(-delta (carried_k + beta_k)) / sum_m exp(-delta (carried_m + beta_m)),
// evaluated after subtracting the minimum weighted score.
std::vector<double> selection_distribution(std::span<const double> scores, std::span<const double> beta, double delta);

// Plain softmax of -weighted_scores with the same stabilization.
std::vector<double> softmin(std::span<const double> weighted_scores);

// Inverse CDF over the given ordering; draw in [0, 1).
std::size_t sample_index(std::span<const double> distribution, double draw);

// Implicit-exploration estimate: l / (p + gamma) for the chosen arm, 0 otherwise.
double ix_estimate(double realized_loss, double p_chosen, double gamma, bool is_chosen);

// scores[k] += eta * estimates[k] for every k in estimates.
void update_scores(std::map<ArmId, double>& scores, const std::map<ArmId, double>& estimates, double eta);

struct MixOptions {
    bool demand_weighting = true;
    SupplyMode supply = SupplyMode::proposed;
};

// One round of MIX-AALTO: demand weight, supply patch, selection, sampling,
// IX estimation, score update. The loss oracle is called for the chosen arm only.
StepOutcome mix_aalto_step(PolicyState& state, const RoundContext& ctx, const LossFn& loss,
                           const MixOptions& options, const HyperSchedule& schedule, double draw);

StepOutcome mix_aalto_step(PolicyState& state, const RoundContext& ctx, const LossFn& loss,
                           const MixOptions& options = {}, const HyperSchedule& schedule = {});

} // namespace fogbandit
