#include <fogbandit/harness.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace fogbandit {

std::uint64_t policy_seed(std::uint64_t run_seed)
{
    return hash_keys({run_seed, 0x901cULL});
}

RunRecord run_single(const Scenario& scenario, const PolicySpec& spec, std::uint64_t seed)
{
    Environment env(scenario, seed);
    TaskStream tasks(scenario.task_stream, hash_keys({scenario.seed, seed, 0x7a5cULL}));
    auto policy = make_policy(spec, scenario.schedule, policy_seed(seed));
    const bool randomized = spec.kind != PolicyKind::ucb1;

    RunRecord rec;
    rec.policy = spec.name();
    rec.seed = seed;
    rec.rounds.reserve(static_cast<std::size_t>(scenario.horizon));

    for (std::int64_t t = 1; t <= scenario.horizon; ++t) {
        RoundContext ctx;
        ctx.candidates = scenario.candidates(t);
        ctx.round = t;
        ctx.q_min = scenario.q_min;
        ctx.q_max = scenario.q_max;
        const Task task = tasks.at(t);
        ctx.task_size = task.size_bits;

        const auto costs = env.env_round(ctx.candidates, task, t);
        const LossFn loss = [&costs](ArmId id) { return costs.at(id).cost.unit_cost_norm; };
        StepOutcome out = policy->step(ctx, loss);

        RoundRecord r;
        r.round = t;
        r.candidates = ctx.candidates;
        r.distribution = std::move(out.decision.distribution);
        r.estimates = std::move(out.estimates);
        r.chosen_index = out.decision.chosen_index;
        r.chosen = out.decision.chosen;
        r.realized_loss = out.feedback.realized_loss;
        r.delta = out.decision.delta_used;
        r.eta = out.eta;
        r.gamma = out.gamma;
        r.task_bits = task.size_bits;
        r.losses.reserve(ctx.candidates.size());
        for (ArmId id : ctx.candidates) {
            const auto& c = costs.at(id).cost;
            r.losses.push_back(c.unit_cost_norm);
            rec.clamped_losses += c.clamped ? 1 : 0;
            ++rec.total_losses;
        }
        const auto& chosen = costs.at(r.chosen).cost;
        r.latency_per_bit = chosen.latency_s / task.size_bits;
        r.energy_per_bit = chosen.energy_j / task.size_bits;
        r.unit_cost_raw = chosen.unit_cost_raw;
        rec.clamped_tasks += out.task_clamped ? 1 : 0;

        const double total = std::accumulate(r.distribution.begin(), r.distribution.end(), 0.0);
        require(std::abs(total - 1.0) <= 1e-9, "run: distribution does not sum to 1");
        if (randomized)
            for (double p : r.distribution)
                require(p > 0.0, "run: randomized policy emitted a zero probability");
        rec.rounds.push_back(std::move(r));
    }
    return rec;
}

namespace {

std::vector<ArmId> sorted(std::vector<ArmId> v)
{
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<Interval> intervals_from(const std::vector<std::vector<ArmId>>& per_round)
{
    std::vector<Interval> out;
    for (auto [first, last] : intervals_of(per_round))
        out.push_back({first, last, sorted(per_round[static_cast<std::size_t>(first - 1)])});
    return out;
}

std::size_t index_in(const RoundRecord& r, ArmId id)
{
    auto it = std::find(r.candidates.begin(), r.candidates.end(), id);
    require(it != r.candidates.end(), "oracle arm is not a candidate");
    return static_cast<std::size_t>(std::distance(r.candidates.begin(), it));
}

// Oracle arm for every round.
std::vector<std::size_t> oracle_indices(const RunRecord& record, const std::vector<Interval>& intervals,
                                        const std::vector<ArmId>& oracle)
{
    require(intervals.size() == oracle.size(), "oracle/interval size mismatch");
    std::vector<std::size_t> idx(record.rounds.size());
    for (std::size_t i = 0; i < intervals.size(); ++i)
        for (std::int64_t t = intervals[i].first; t <= intervals[i].last; ++t) {
            const auto& r = record.rounds[static_cast<std::size_t>(t - 1)];
            idx[static_cast<std::size_t>(t - 1)] = index_in(r, oracle[i]);
        }
    return idx;
}

} // namespace

std::vector<Interval> record_intervals(const RunRecord& record)
{
    std::vector<std::vector<ArmId>> per_round;
    per_round.reserve(record.rounds.size());
    for (const auto& r : record.rounds)
        per_round.push_back(r.candidates);
    return intervals_from(per_round);
}

std::vector<Interval> scenario_intervals(const Scenario& scenario)
{
    std::vector<std::vector<ArmId>> per_round;
    per_round.reserve(static_cast<std::size_t>(scenario.horizon));
    for (std::int64_t t = 1; t <= scenario.horizon; ++t)
        per_round.push_back(scenario.candidates(t));
    return intervals_from(per_round);
}

std::vector<ArmId> interval_oracle(const RunRecord& record, const std::vector<Interval>& intervals)
{
    std::vector<ArmId> out;
    for (const auto& iv : intervals) {
        std::map<ArmId, double> sum;
        for (std::int64_t t = iv.first; t <= iv.last; ++t) {
            const auto& r = record.rounds.at(static_cast<std::size_t>(t - 1));
            require(r.losses.size() == r.candidates.size(), "oracle: full loss vector missing");
            for (std::size_t k = 0; k < r.candidates.size(); ++k)
                sum[r.candidates[k]] += r.losses[k];
        }
        const double n = static_cast<double>(iv.last - iv.first + 1);
        ArmId best = 0;
        double best_mean = std::numeric_limits<double>::infinity();
        for (const auto& [id, s] : sum) {  // ascending id, strict < keeps the lowest on ties
            const double mean = s / n;
            if (mean < best_mean) {
                best_mean = mean;
                best = id;
            }
        }
        out.push_back(best);
    }
    return out;
}

std::vector<double> cumulative_regret(const RunRecord& record, const std::vector<Interval>& intervals,
                                      const std::vector<ArmId>& oracle)
{
    const auto star = oracle_indices(record, intervals, oracle);
    std::vector<double> out(record.rounds.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < record.rounds.size(); ++t) {
        const auto& r = record.rounds[t];
        acc += r.realized_loss - r.losses[star[t]];
        out[t] = acc;
    }
    return out;
}

Decomposition decompose_regret(const RunRecord& record, const std::vector<Interval>& intervals,
                               const std::vector<ArmId>& oracle, const std::vector<double>& regret)
{
    const auto star = oracle_indices(record, intervals, oracle);
    const std::size_t n = record.rounds.size();
    require(regret.size() == n, "decomposition: regret series length mismatch");
    Decomposition d;
    d.var.resize(n);
    d.bias.resize(n);
    d.exp3.resize(n);
    double chosen = 0.0, mixed = 0.0, est_star = 0.0, true_star = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const auto& r = record.rounds[t];
        require(r.estimates.size() == r.candidates.size(), "decomposition: estimates missing");
        chosen += r.realized_loss;
        for (std::size_t k = 0; k < r.candidates.size(); ++k)
            mixed += r.distribution[k] * r.estimates[k];
        est_star += r.estimates[star[t]];
        true_star += r.losses[star[t]];
        d.var[t] = est_star - true_star;
        d.bias[t] = chosen - mixed;
        d.exp3[t] = mixed - est_star;
        const double sum = d.var[t] + d.bias[t] + d.exp3[t];
        require(std::abs(sum - regret[t]) <= 1e-9, "decomposition: parts do not sum to the regret");
    }
    return d;
}

std::vector<double> theoretical_bound(const HyperSchedule& schedule, const std::vector<Interval>& intervals,
                                      double nu)
{
    require(nu > 0.0 && nu < 1.0, "bound: nu must be in (0, 1)");
    std::vector<double> out;
    double closed = 0.0;  // contribution of finished intervals
    for (const auto& iv : intervals) {
        const std::size_t k_count = std::max<std::size_t>(iv.arms.size(), 2);
        const double k = static_cast<double>(k_count);
        double running = 0.0;
        double current = 0.0;
        for (std::int64_t t = iv.first; t <= iv.last; ++t) {
            const double eta = schedule.eta(t, k_count);
            const double gamma = schedule.gamma(t, k_count);
            require(eta <= 2.0 * gamma * (1.0 + 1e-12), "bound: schedule violates eta_t <= 2 gamma_t");
            running += (gamma + eta / 2.0) * k;
            current = std::log(k) / eta + (1.0 / (2.0 * gamma) + 1.0) * std::log(k / nu) + running;
            out.push_back(closed + current);
        }
        closed += current;
    }
    return out;
}

SeriesStats aggregate(const std::vector<std::vector<double>>& series)
{
    SeriesStats s;
    if (series.empty())
        return s;
    const std::size_t n = series.front().size();
    const double m = static_cast<double>(series.size());
    s.mean.assign(n, 0.0);
    s.std.assign(n, 0.0);
    for (const auto& v : series) {
        require(v.size() == n, "aggregate: series lengths differ");
        for (std::size_t i = 0; i < n; ++i)
            s.mean[i] += v[i];
    }
    for (double& x : s.mean)
        x /= m;
    if (series.size() > 1) {
        for (const auto& v : series)
            for (std::size_t i = 0; i < n; ++i)
                s.std[i] += (v[i] - s.mean[i]) * (v[i] - s.mean[i]);
        for (double& x : s.std)
            x = std::sqrt(x / (m - 1.0));
    }
    return s;
}

SeedResult analyze(const RunRecord& record, const Scenario& scenario)
{
    SeedResult out;
    out.seed = record.seed;
    const auto intervals = record_intervals(record);
    const auto oracle = interval_oracle(record, intervals);
    out.regret = cumulative_regret(record, intervals, oracle);
    out.decomposition = decompose_regret(record, intervals, oracle, out.regret);
    out.bound = theoretical_bound(scenario.schedule, intervals, scenario.nu);
    const std::size_t n = record.rounds.size();
    out.avg_latency_per_bit.resize(n);
    out.avg_energy_per_bit.resize(n);
    out.avg_unit_cost_raw.resize(n);
    double lat = 0.0, en = 0.0, raw = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const auto& r = record.rounds[t];
        lat += r.latency_per_bit;
        en += r.energy_per_bit;
        raw += r.unit_cost_raw;
        const double k = static_cast<double>(t + 1);
        out.avg_latency_per_bit[t] = lat / k;
        out.avg_energy_per_bit[t] = en / k;
        out.avg_unit_cost_raw[t] = raw / k;
    }
    out.clamped_losses = record.clamped_losses;
    out.total_losses = record.total_losses;
    out.clamped_tasks = record.clamped_tasks;
    return out;
}

double ExperimentResult::bound_coverage() const
{
    if (per_seed.empty())
        return 0.0;
    std::size_t ok = 0;
    for (const auto& s : per_seed)
        if (!s.regret.empty() && s.regret.back() <= s.bound.back())
            ++ok;
    return static_cast<double>(ok) / static_cast<double>(per_seed.size());
}

ExperimentResult run_experiment(const Scenario& scenario, const PolicySpec& policy,
                                const std::vector<std::uint64_t>& seeds, const RunOptions& options)
{
    require(!seeds.empty(), "experiment: at least one seed is required");
    std::vector<std::uint64_t> order = seeds;
    std::sort(order.begin(), order.end());

    ExperimentResult res;
    res.policy = policy.name();
    res.per_seed.resize(order.size());
    if (options.keep_records)
        res.records.resize(order.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= order.size())
                return;
            try {
                RunRecord rec = run_single(scenario, policy, order[i]);
                res.per_seed[i] = analyze(rec, scenario);
                if (options.keep_records)
                    res.records[i] = std::move(rec);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure)
                    failure = std::current_exception();
                next = order.size();
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(order.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<std::vector<double>> regret, per_round, var, bias, exp3, lat, en, raw;
    std::size_t clamped = 0, total = 0;
    for (const auto& s : res.per_seed) {
        regret.push_back(s.regret);
        std::vector<double> pr(s.regret.size());
        for (std::size_t t = 0; t < pr.size(); ++t)
            pr[t] = s.regret[t] / static_cast<double>(t + 1);
        per_round.push_back(std::move(pr));
        var.push_back(s.decomposition.var);
        bias.push_back(s.decomposition.bias);
        exp3.push_back(s.decomposition.exp3);
        lat.push_back(s.avg_latency_per_bit);
        en.push_back(s.avg_energy_per_bit);
        raw.push_back(s.avg_unit_cost_raw);
        clamped += s.clamped_losses;
        total += s.total_losses;
    }
    res.regret = aggregate(regret);
    res.per_round_regret = aggregate(per_round);
    res.var = aggregate(var);
    res.bias = aggregate(bias);
    res.exp3 = aggregate(exp3);
    res.latency_per_bit = aggregate(lat);
    res.energy_per_bit = aggregate(en);
    res.unit_cost_raw = aggregate(raw);
    res.bound = res.per_seed.front().bound;
    res.clamp_rate = total ? static_cast<double>(clamped) / static_cast<double>(total) : 0.0;
    return res;
}

} // namespace fogbandit
