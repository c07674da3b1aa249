#include <fogbandit/bandit.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fogbandit {

void RoundContext::validate() const
{
    require(!candidates.empty(), "round context: candidate set is empty");
    std::set<ArmId> unique(candidates.begin(), candidates.end());
    require(unique.size() == candidates.size(), "round context: duplicate candidate");
    require(q_min < q_max, "round context: q_min must be below q_max");
    require(round >= 1, "round context: round index starts at 1");
}

void PolicyState::begin_round(const RoundContext& ctx)
{
    ctx.validate();
    if (ctx.round != round + 1) {
        std::ostringstream os;
        os << "policy state: expected round " << round + 1 << ", got " << ctx.round;
        throw ContractError(os.str());
    }
    round = ctx.round;
}

double HyperSchedule::eta(std::int64_t t, std::size_t k_count) const
{
    require(t >= 1, "schedule: t must be >= 1");
    require(k_count >= 2, "schedule: at least two arms are needed for ln K > 0");
    const double k = static_cast<double>(k_count);
    return std::min(1.0, eta_scale * std::sqrt(std::log(k) / (k * static_cast<double>(t))));
}

double HyperSchedule::gamma(std::int64_t t, std::size_t k_count) const
{
    if (gamma_rule == GammaRule::constant) {
        require(t >= 1 && k_count >= 2, "schedule: invalid (t, K)");
        return gamma_constant;
    }
    return std::min(1.0, phi * eta(t, k_count));
}

void validate_schedule(const HyperSchedule& schedule, std::int64_t horizon, std::span<const std::size_t> k_counts)
{
    if (!(schedule.eta_scale > 0.0))
        throw ConfigError("schedule: eta_scale must be positive");
    if (schedule.gamma_rule != HyperSchedule::GammaRule::ratio)
        throw ConfigError("schedule: gamma_rule must be \"ratio\" (gamma_t = phi * eta_t); a constant gamma "
                          "breaks the fixed gamma/eta ratio the regret bound needs");
    if (!(schedule.phi > 0.0))
        throw ConfigError("schedule: phi must be positive");
    for (std::size_t k : k_counts) {
        const std::size_t kk = std::max<std::size_t>(k, 2);
        double ratio0 = 0.0;
        for (std::int64_t t = 1; t <= horizon; ++t) {
            const double eta = schedule.eta(t, kk);
            const double gamma = schedule.gamma(t, kk);
            if (!(gamma > 0.0) || gamma > 1.0 || !(eta > 0.0))
                throw ConfigError("schedule: eta_t and gamma_t must lie in (0, 1]");
            if (eta > 2.0 * gamma * (1.0 + 1e-12)) {
                std::ostringstream os;
                os << "schedule: eta_t <= 2 gamma_t violated at t=" << t << ", K=" << kk;
                throw ConfigError(os.str());
            }
            const double ratio = gamma / eta;
            if (t == 1)
                ratio0 = ratio;
            else if (std::abs(ratio - ratio0) > 1e-12 * ratio0) {
                std::ostringstream os;
                os << "schedule: gamma_t / eta_t must be constant (t=1: " << ratio0 << ", t=" << t << ": "
                   << ratio << ", K=" << kk << ")";
                throw ConfigError(os.str());
            }
        }
    }
}

double eta_schedule(std::int64_t t, std::size_t k_count)
{
    return HyperSchedule{}.eta(t, k_count);
}

double gamma_schedule(std::int64_t t, std::size_t k_count)
{
    return HyperSchedule{}.gamma(t, k_count);
}

DemandWeight demand_weight(double task_size, double q_min, double q_max)
{
    require(q_min < q_max, "demand weight: q_min must be below q_max");
    DemandWeight out;
    double q = task_size;
    if (q < q_min || q > q_max) {
        q = std::clamp(q, q_min, q_max);
        out.clamped = true;
    }
    out.value = 1.0 + (q - q_min) / (q_max - q_min);
    return out;
}

namespace {

bool contains(std::span<const ArmId> arms, ArmId id)
{
    return std::find(arms.begin(), arms.end(), id) != arms.end();
}

double score_of(const std::map<ArmId, double>& scores, ArmId id)
{
    auto it = scores.find(id);
    return it == scores.end() ? 0.0 : it->second;
}

bool same_set(std::span<const ArmId> a, std::span<const ArmId> b)
{
    std::set<ArmId> sa(a.begin(), a.end());
    std::set<ArmId> sb(b.begin(), b.end());
    return sa == sb;
}

} // namespace

SupplyPatch supply_patch(std::span<const ArmId> candidates, const std::map<ArmId, double>& known_scores,
                         const std::set<ArmId>& previously_seen, std::span<const ArmId> previous_candidates)
{
    return supply_patch(SupplyMode::proposed, candidates, known_scores, previously_seen, previous_candidates);
}

SupplyPatch supply_patch(SupplyMode mode, std::span<const ArmId> candidates,
                         const std::map<ArmId, double>& known_scores, const std::set<ArmId>& previously_seen,
                         std::span<const ArmId> previous_candidates)
{
    require(!candidates.empty(), "supply patch: candidate set is empty");
    for (ArmId id : previously_seen)
        require(known_scores.count(id) == 1, "supply patch: missing score for a previously seen arm");

    SupplyPatch patch;
    patch.candidate_set_changed = !same_set(candidates, previous_candidates);

    double min_existing = std::numeric_limits<double>::infinity();
    for (ArmId id : candidates)
        if (contains(previous_candidates, id))
            min_existing = std::min(min_existing, score_of(known_scores, id));
    const bool cold = !std::isfinite(min_existing);

    for (ArmId id : candidates) {
        const bool existing = contains(previous_candidates, id);
        const bool seen = previously_seen.count(id) != 0;
        double beta = 0.0;
        double carried = existing ? score_of(known_scores, id) : 0.0;
        if (!existing)
            patch.appearing.push_back(id);

        switch (mode) {
        case SupplyMode::proposed:
            if (!existing && !cold)
                beta = seen ? std::max(min_existing, score_of(known_scores, id)) : min_existing;
            break;
        case SupplyMode::partial_reset:
            break;
        case SupplyMode::full_reset:
            if (patch.candidate_set_changed)
                carried = 0.0;
            break;
        }
        patch.beta[id] = beta;
        patch.carried[id] = carried;
    }
    return patch;
}

std::vector<double> softmin(std::span<const double> weighted)
{
    require(!weighted.empty(), "selection: candidate set is empty");
    const double lo = *std::min_element(weighted.begin(), weighted.end());
    require(std::isfinite(lo), "selection: scores must be finite");
    std::vector<double> p(weighted.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weighted.size(); ++i) {
        require(std::isfinite(weighted[i]), "selection: scores must be finite");
        // Floor keeps every candidate strictly positive once the gap exceeds ~708.
        p[i] = std::max(std::exp(-(weighted[i] - lo)), std::numeric_limits<double>::min());
        total += p[i];
    }
    for (double& v : p)
        v /= total;
    return p;
}

std::vector<double> selection_distribution(std::span<const double> scores, std::span<const double> beta, double delta)
{
    require(scores.size() == beta.size(), "selection: scores and beta differ in size");
    require(delta >= 0.0 && std::isfinite(delta), "selection: delta must be finite and non-negative");
    std::vector<double> weighted(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        weighted[i] = delta * (scores[i] + beta[i]);
    return softmin(weighted);
}

std::size_t sample_index(std::span<const double> distribution, double draw)
{
    require(!distribution.empty(), "sample: empty distribution");
    double cumulative = 0.0;
    for (std::size_t i = 0; i < distribution.size(); ++i) {
        cumulative += distribution[i];
        if (draw < cumulative)
            return i;
    }
    // Rounding left the total just below draw; take the last positive entry.
    for (std::size_t i = distribution.size(); i-- > 0;)
        if (distribution[i] > 0.0)
            return i;
    return distribution.size() - 1;
}

double ix_estimate(double realized_loss, double p_chosen, double gamma, bool is_chosen)
{
    if (!is_chosen)
        return 0.0;
    return realized_loss / (p_chosen + gamma);
}

void update_scores(std::map<ArmId, double>& scores, const std::map<ArmId, double>& estimates, double eta)
{
    require(eta > 0.0 && eta <= 1.0, "update: eta must be in (0, 1]");
    for (const auto& [id, est] : estimates)
        scores[id] += eta * est;
}

StepOutcome mix_aalto_step(PolicyState& state, const RoundContext& ctx, const LossFn& loss,
                           const MixOptions& options, const HyperSchedule& schedule, double draw)
{
    state.begin_round(ctx);
    const auto& cands = ctx.candidates;
    const std::size_t k_eff = std::max<std::size_t>(cands.size(), 2);

    StepOutcome out;
    out.eta = schedule.eta(ctx.round, k_eff);
    out.gamma = schedule.gamma(ctx.round, k_eff);

    const DemandWeight dw = demand_weight(ctx.task_size, ctx.q_min, ctx.q_max);
    out.task_clamped = dw.clamped;
    const double delta = options.demand_weighting ? dw.value : 1.0;

    SupplyPatch patch = supply_patch(options.supply, cands, state.scores, state.known_arms, state.previous_candidates);

    // The patched value becomes the arm's score from here on.
    if (options.supply == SupplyMode::full_reset && patch.candidate_set_changed) {
        for (auto& [id, s] : state.scores)
            s = 0.0;
    }
    for (ArmId id : cands) {
        state.known_arms.insert(id);
        state.scores[id] = patch.carried[id] + patch.beta[id];
    }

    std::vector<double> carried(cands.size()), beta(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        carried[i] = patch.carried[cands[i]];
        beta[i] = patch.beta[cands[i]];
    }

    Decision& d = out.decision;
    d.candidates = cands;
    d.distribution = selection_distribution(carried, beta, delta);
    d.delta_used = delta;
    d.beta_used = patch.beta;
    d.chosen_index = sample_index(d.distribution, draw);
    d.chosen = cands[d.chosen_index];

    out.feedback.chosen = d.chosen;
    out.feedback.realized_loss = loss(d.chosen);
    require(out.feedback.realized_loss >= 0.0 && out.feedback.realized_loss <= 1.0,
            "feedback: realized loss must lie in [0, 1]");

    out.estimates.assign(cands.size(), 0.0);
    std::map<ArmId, double> est;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const bool chosen = i == d.chosen_index;
        out.estimates[i] = ix_estimate(out.feedback.realized_loss, d.distribution[i], out.gamma, chosen);
        est[cands[i]] = out.estimates[i];
    }
    update_scores(state.scores, est, out.eta);
    state.previous_candidates = cands;
    return out;
}

StepOutcome mix_aalto_step(PolicyState& state, const RoundContext& ctx, const LossFn& loss,
                           const MixOptions& options, const HyperSchedule& schedule)
{
    const double draw = state.rng.uniform();
    return mix_aalto_step(state, ctx, loss, options, schedule, draw);
}

} // namespace fogbandit
