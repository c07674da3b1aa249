#include <fogbandit/environment.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fogbandit {

namespace {
constexpr std::uint64_t kPhaseTag = 0x9a5eULL;
constexpr std::uint64_t kMeanTag = 0x3ea7ULL;
constexpr std::uint64_t kJitterTag = 0x717eULL;
constexpr std::uint64_t kFadingTag = 0xfad1ULL;
} // namespace

Adversary::Adversary(const AdversaryConfig& config, std::uint64_t run_seed, std::int64_t horizon)
    : config_(config), key_(hash_keys({config.seed, run_seed}))
{
    require(config.phase_length_mean >= 1.0, "adversary: phase_length_mean must be >= 1");
    // Geometric phase lengths on {1, 2, ...} with the configured mean.
    KeyedStream lengths({key_, kPhaseTag});
    const double stay = 1.0 - 1.0 / config.phase_length_mean;
    std::int64_t start = 1;
    while (start <= std::max<std::int64_t>(horizon, 1)) {
        phase_starts_.push_back(start);
        std::int64_t len = 1;
        if (stay > 0.0) {
            const double u = 1.0 - lengths.uniform();  // (0, 1]
            len += static_cast<std::int64_t>(std::floor(std::log(u) / std::log(stay)));
        }
        start += len;
    }
}

std::size_t Adversary::phase_of(std::int64_t round) const
{
    auto it = std::upper_bound(phase_starts_.begin(), phase_starts_.end(), round);
    if (it == phase_starts_.begin())
        return 0;
    return static_cast<std::size_t>(std::distance(phase_starts_.begin(), it) - 1);
}

double Adversary::phase_mean(const VfnSpec& vfn, std::int64_t round) const
{
    KeyedStream u({key_, kMeanTag, static_cast<std::uint64_t>(phase_of(round)), static_cast<std::uint64_t>(vfn.id)});
    return u.uniform(vfn.fraction_lo, vfn.fraction_hi);
}

double Adversary::fraction(const VfnSpec& vfn, std::int64_t round) const
{
    KeyedStream u({key_, kJitterTag, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(vfn.id)});
    const double jitter = config_.jitter_width * (u.uniform() - 0.5);
    return std::clamp(phase_mean(vfn, round) + jitter, vfn.fraction_lo, vfn.fraction_hi);
}

double allocated_frequency(const VfnSpec& vfn, const Adversary& adversary, std::int64_t round)
{
    return adversary.fraction(vfn, round) * vfn.max_cpu_hz;
}

double normalization_scale(const Scenario& s)
{
    require(!s.vfns.empty(), "normalization: scenario has no nodes");
    double f_lo = std::numeric_limits<double>::infinity();
    double f_hi = 0.0;
    for (const auto& v : s.vfns) {
        f_lo = std::min(f_lo, v.fraction_lo * v.max_cpu_hz);
        f_hi = std::max(f_hi, v.fraction_hi * v.max_cpu_hz);
    }
    const double fading = -std::log1p(-kFadingFloorQuantile);
    const double rate = link_rate(s.channel, channel_gain(pathloss_db(s.comm_range_km), fading));
    const double p_tx = dbm_to_watts(s.channel.tx_power_dbm);
    Task unit{1.0, s.task_stream.intensity};
    double worst = 0.0;
    for (double f : {f_lo, f_hi}) {
        const double d = latency(unit, rate, f);
        const double e = energy(unit, rate, f, p_tx, s.rho);
        worst = std::max(worst, s.xi * d + (1.0 - s.xi) * e);
    }
    return worst;
}

Environment::Environment(const Scenario& scenario, std::uint64_t run_seed)
    : scenario_(scenario),
      key_(hash_keys({scenario.seed, run_seed})),
      adversary_(scenario.adversary, hash_keys({scenario.seed, run_seed}), scenario.horizon),
      l_scale_(normalization_scale(scenario)),
      tx_power_w_(dbm_to_watts(scenario.channel.tx_power_dbm))
{
}

double Environment::fading_power(ArmId id, std::int64_t round) const
{
    KeyedStream u({key_, kFadingTag, static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(id)});
    return u.exponential();
}

std::map<ArmId, ArmCost> Environment::env_round(std::span<const ArmId> candidates, const Task& task,
                                                 std::int64_t round) const
{
    std::map<ArmId, ArmCost> out;
    for (ArmId id : candidates) {
        const VfnSpec& v = scenario_.vfn(id);
        ArmCost c;
        c.fading = fading_power(id, round);
        const double gain = channel_gain(pathloss_db(scenario_.distance_km(id, round)), c.fading);
        c.rate_bps = link_rate(scenario_.channel, gain);
        c.freq_hz = allocated_frequency(v, adversary_, round);
        double d = std::numeric_limits<double>::infinity();
        double e = std::numeric_limits<double>::infinity();
        if (c.rate_bps > 0.0) {
            d = latency(task, c.rate_bps, c.freq_hz);
            e = energy(task, c.rate_bps, c.freq_hz, tx_power_w_, scenario_.rho);
        }
        c.cost = unit_cost(scenario_.xi, d, e, task.size_bits, l_scale_);
        out.emplace(id, c);
    }
    return out;
}

} // namespace fogbandit
