#include <fogbandit/policy.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fogbandit {

std::string_view kind_name(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::mix_aalto: return "mix-aalto";
    case PolicyKind::exp3ix_partial: return "exp3ix-partial";
    case PolicyKind::exp3ix_full: return "exp3ix-full";
    case PolicyKind::hedge_full: return "hedge-full";
    case PolicyKind::ucb1: return "ucb1";
    case PolicyKind::eps_greedy: return "eps-greedy";
    case PolicyKind::exp3: return "exp3";
    case PolicyKind::exp3p: return "exp3p";
    }
    return "unknown";
}

std::string PolicySpec::name() const
{
    std::string n(kind_name(kind));
    if (kind == PolicyKind::mix_aalto) {
        if (!mix.demand_weighting)
            n += "+nodelta";
        if (mix.supply == SupplyMode::partial_reset)
            n += "+partial";
        else if (mix.supply == SupplyMode::full_reset)
            n += "+full";
    }
    return n;
}

PolicySpec parse_policy(std::string_view token)
{
    PolicySpec spec;
    std::string_view base = token;
    std::string_view arg;
    if (auto colon = token.find(':'); colon != std::string_view::npos) {
        base = token.substr(0, colon);
        arg = token.substr(colon + 1);
    }
    const std::string t(token);
    if (base == "mix-aalto") {
        spec.kind = PolicyKind::mix_aalto;
    } else if (base == "exp3ix-partial") {
        spec.kind = PolicyKind::exp3ix_partial;
        spec.mix = {false, SupplyMode::partial_reset};
    } else if (base == "exp3ix-full") {
        spec.kind = PolicyKind::exp3ix_full;
        spec.mix = {false, SupplyMode::full_reset};
    } else if (base == "hedge-full") {
        spec.kind = PolicyKind::hedge_full;
    } else if (base == "ucb1") {
        spec.kind = PolicyKind::ucb1;
    } else if (base == "eps-greedy") {
        spec.kind = PolicyKind::eps_greedy;
        if (!arg.empty()) {
            try {
                std::size_t used = 0;
                spec.epsilon = std::stod(std::string(arg), &used);
                if (used != arg.size())
                    throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ConfigError("unknown policy: " + t);
            }
            if (!(spec.epsilon >= 0.0 && spec.epsilon <= 1.0))
                throw ConfigError("policy " + t + ": epsilon must be in [0, 1]");
        }
        return spec;
    } else if (base == "exp3") {
        spec.kind = PolicyKind::exp3;
    } else if (base == "exp3p") {
        spec.kind = PolicyKind::exp3p;
    } else {
        throw ConfigError("unknown policy: " + t);
    }
    if (!arg.empty())
        throw ConfigError("unknown policy: " + t);
    return spec;
}

namespace {

std::map<ArmId, double> to_map(const std::vector<ArmId>& ids, const std::vector<double>& values)
{
    std::map<ArmId, double> m;
    for (std::size_t i = 0; i < ids.size(); ++i)
        m[ids[i]] = values[i];
    return m;
}

// MIX-AALTO and the Exp3IX reset variants differ only in MixOptions.
class MixAaltoPolicy final : public Policy {
public:
    using Policy::Policy;

    StepOutcome step(const RoundContext& ctx, const LossFn& loss) override
    {
        return mix_aalto_step(state_, ctx, loss, spec_.mix, schedule_);
    }
};

// Exponential weights on true losses of every candidate, with the same
// demand weight and supply patch as MIX-AALTO.
class HedgePolicy final : public Policy {
public:
    using Policy::Policy;

    StepOutcome step(const RoundContext& ctx, const LossFn& loss) override
    {
        const double draw = state_.rng.uniform();
        state_.begin_round(ctx);
        const auto& cands = ctx.candidates;
        const std::size_t k_eff = std::max<std::size_t>(cands.size(), 2);

        StepOutcome out;
        out.eta = schedule_.eta(ctx.round, k_eff);
        out.gamma = 0.0;
        const DemandWeight dw = demand_weight(ctx.task_size, ctx.q_min, ctx.q_max);
        out.task_clamped = dw.clamped;
        const double delta = spec_.mix.demand_weighting ? dw.value : 1.0;

        SupplyPatch patch = supply_patch(spec_.mix.supply, cands, state_.scores, state_.known_arms,
                                         state_.previous_candidates);
        if (spec_.mix.supply == SupplyMode::full_reset && patch.candidate_set_changed)
            for (auto& [id, s] : state_.scores)
                s = 0.0;
        std::vector<double> carried(cands.size()), beta(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) {
            state_.known_arms.insert(cands[i]);
            carried[i] = patch.carried[cands[i]];
            beta[i] = patch.beta[cands[i]];
            state_.scores[cands[i]] = carried[i] + beta[i];
        }

        Decision& d = out.decision;
        d.candidates = cands;
        d.distribution = selection_distribution(carried, beta, delta);
        d.delta_used = delta;
        d.beta_used = patch.beta;
        d.chosen_index = sample_index(d.distribution, draw);
        d.chosen = cands[d.chosen_index];

        out.estimates.resize(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i)
            out.estimates[i] = loss(cands[i]);
        out.feedback = {d.chosen, out.estimates[d.chosen_index]};
        update_scores(state_.scores, to_map(cands, out.estimates), out.eta);
        state_.previous_candidates = cands;
        return out;
    }
};

// Shared bookkeeping for the empirical-mean policies; scores hold empirical means.
class EmpiricalPolicy : public Policy {
public:
    using Policy::Policy;

protected:
    void observe(ArmId id, double l)
    {
        auto& n = pulls_[id];
        ++n;
        double& mean = state_.scores[id];
        mean += (l - mean) / static_cast<double>(n);
    }

    std::int64_t pulls(ArmId id) const
    {
        auto it = pulls_.find(id);
        return it == pulls_.end() ? 0 : it->second;
    }

    void register_candidates(const RoundContext& ctx)
    {
        for (ArmId id : ctx.candidates) {
            state_.known_arms.insert(id);
            state_.scores.try_emplace(id, 0.0);
        }
    }

    StepOutcome finish(const RoundContext& ctx, const LossFn& loss, std::vector<double> dist, double draw)
    {
        StepOutcome out;
        Decision& d = out.decision;
        d.candidates = ctx.candidates;
        d.distribution = std::move(dist);
        d.delta_used = 1.0;
        for (ArmId id : ctx.candidates)
            d.beta_used[id] = 0.0;
        d.chosen_index = sample_index(d.distribution, draw);
        d.chosen = ctx.candidates[d.chosen_index];
        out.feedback = {d.chosen, loss(d.chosen)};
        out.estimates.assign(ctx.candidates.size(), 0.0);
        out.estimates[d.chosen_index] = out.feedback.realized_loss / d.distribution[d.chosen_index];
        observe(d.chosen, out.feedback.realized_loss);
        state_.previous_candidates = ctx.candidates;
        return out;
    }

private:
    std::map<ArmId, std::int64_t> pulls_;
};

// UCB1 on losses: unplayed candidates first (candidate order), then
// argmin of mean - sqrt(2 ln t / n).
class Ucb1Policy final : public EmpiricalPolicy {
public:
    using EmpiricalPolicy::EmpiricalPolicy;

    StepOutcome step(const RoundContext& ctx, const LossFn& loss) override
    {
        const double draw = state_.rng.uniform();
        state_.begin_round(ctx);
        register_candidates(ctx);
        const auto& cands = ctx.candidates;
        std::size_t pick = cands.size();
        for (std::size_t i = 0; i < cands.size() && pick == cands.size(); ++i)
            if (pulls(cands[i]) == 0)
                pick = i;
        if (pick == cands.size()) {
            const double log_t = std::log(static_cast<double>(ctx.round));
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < cands.size(); ++i) {
                const double index = state_.scores[cands[i]] -
                                     std::sqrt(2.0 * log_t / static_cast<double>(pulls(cands[i])));
                if (index < best) {
                    best = index;
                    pick = i;
                }
            }
        }
        std::vector<double> dist(cands.size(), 0.0);
        dist[pick] = 1.0;
        return finish(ctx, loss, std::move(dist), draw);
    }
};

// Greedy on the lowest empirical mean (unplayed arms count as mean 0) with
// probability 1 - eps, uniform otherwise.
class EpsGreedyPolicy final : public EmpiricalPolicy {
public:
    using EmpiricalPolicy::EmpiricalPolicy;

    StepOutcome step(const RoundContext& ctx, const LossFn& loss) override
    {
        const double draw = state_.rng.uniform();
        state_.begin_round(ctx);
        register_candidates(ctx);
        const auto& cands = ctx.candidates;
        std::size_t greedy = 0;
        for (std::size_t i = 1; i < cands.size(); ++i)
            if (state_.scores[cands[i]] < state_.scores[cands[greedy]])
                greedy = i;
        const double eps = spec_.epsilon;
        std::vector<double> dist(cands.size(), eps / static_cast<double>(cands.size()));
        dist[greedy] += 1.0 - eps;
        return finish(ctx, loss, std::move(dist), draw);
    }
};

// Exp3 with explicit uniform mixing of weight gamma_t over the exponential-weights
// distribution and unbiased importance-weighted estimates.
class Exp3Policy final : public Policy {
public:
    using Policy::Policy;

    StepOutcome step(const RoundContext& ctx, const LossFn& loss) override
    {
        const double draw = state_.rng.uniform();
        state_.begin_round(ctx);
        const auto& cands = ctx.candidates;
        const std::size_t k_eff = std::max<std::size_t>(cands.size(), 2);
        const double k = static_cast<double>(cands.size());

        StepOutcome out;
        out.eta = schedule_.eta(ctx.round, k_eff);
        out.gamma = schedule_.gamma(ctx.round, k_eff);

        std::vector<double> scores(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) {
            state_.known_arms.insert(cands[i]);
            scores[i] = state_.scores.try_emplace(cands[i], 0.0).first->second;
        }
        std::vector<double> p = softmin(scores);
        for (double& v : p)
            v = (1.0 - out.gamma) * v + out.gamma / k;

        Decision& d = out.decision;
        d.candidates = cands;
        d.distribution = std::move(p);
        for (ArmId id : cands)
            d.beta_used[id] = 0.0;
        d.chosen_index = sample_index(d.distribution, draw);
        d.chosen = cands[d.chosen_index];
        out.feedback = {d.chosen, loss(d.chosen)};
        out.estimates.assign(cands.size(), 0.0);
        out.estimates[d.chosen_index] = out.feedback.realized_loss / d.distribution[d.chosen_index];
        update_scores(state_.scores, to_map(cands, out.estimates), out.eta);
        state_.previous_candidates = cands;
        return out;
    }
};

// Exp3.P on gains g = 1 - l with optimistic bias beta_t / p_k for every arm.
// scores hold the cumulative gain estimates.
class Exp3PPolicy final : public Policy {
public:
    using Policy::Policy;

    StepOutcome step(const RoundContext& ctx, const LossFn& loss) override
    {
        const double draw = state_.rng.uniform();
        state_.begin_round(ctx);
        const auto& cands = ctx.candidates;
        const double k = static_cast<double>(std::max<std::size_t>(cands.size(), 2));
        const double t = static_cast<double>(ctx.round);
        const auto& c = spec_.exp3p;

        StepOutcome out;
        out.eta = std::min(1.0, c.eta_coef * std::sqrt(std::log(k) / (t * k)));
        out.gamma = std::min(1.0, c.gamma_coef * std::sqrt(k * std::log(k) / t));
        const double bias = std::sqrt(std::log(k / c.nu) / (t * k));

        std::vector<double> neg(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) {
            state_.known_arms.insert(cands[i]);
            neg[i] = -out.eta * state_.scores.try_emplace(cands[i], 0.0).first->second;
        }
        std::vector<double> p = softmin(neg);
        const double kc = static_cast<double>(cands.size());
        for (double& v : p)
            v = (1.0 - out.gamma) * v + out.gamma / kc;

        Decision& d = out.decision;
        d.candidates = cands;
        d.distribution = std::move(p);
        for (ArmId id : cands)
            d.beta_used[id] = 0.0;
        d.chosen_index = sample_index(d.distribution, draw);
        d.chosen = cands[d.chosen_index];
        out.feedback = {d.chosen, loss(d.chosen)};

        out.estimates.assign(cands.size(), 0.0);
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const bool chosen = i == d.chosen_index;
            const double gain = chosen ? 1.0 - out.feedback.realized_loss : 0.0;
            state_.scores[cands[i]] += (gain + bias) / d.distribution[i];
            if (chosen)
                out.estimates[i] = out.feedback.realized_loss / d.distribution[i];
        }
        state_.previous_candidates = cands;
        return out;
    }
};

} // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const HyperSchedule& schedule, std::uint64_t seed)
{
    switch (spec.kind) {
    case PolicyKind::mix_aalto:
    case PolicyKind::exp3ix_partial:
    case PolicyKind::exp3ix_full: return std::make_unique<MixAaltoPolicy>(spec, schedule, seed);
    case PolicyKind::hedge_full: return std::make_unique<HedgePolicy>(spec, schedule, seed);
    case PolicyKind::ucb1: return std::make_unique<Ucb1Policy>(spec, schedule, seed);
    case PolicyKind::eps_greedy: return std::make_unique<EpsGreedyPolicy>(spec, schedule, seed);
    case PolicyKind::exp3: return std::make_unique<Exp3Policy>(spec, schedule, seed);
    case PolicyKind::exp3p: return std::make_unique<Exp3PPolicy>(spec, schedule, seed);
    }
    throw ContractError("make_policy: unknown policy kind");
}

} // namespace fogbandit
