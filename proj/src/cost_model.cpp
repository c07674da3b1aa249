#include <fogbandit/cost_model.hpp>

#include <cmath>
#include <limits>

namespace fogbandit {

void ChannelParams::validate() const
{
    if (!(bandwidth_hz > 0.0))
        throw ConfigError("channel: bandwidth_hz must be positive");
    if (interference_w != 0.0)
        throw ConfigError("channel: interference must be 0 (orthogonal allocation)");
    if (!std::isfinite(tx_power_dbm) || !std::isfinite(noise_dbm_per_hz))
        throw ConfigError("channel: powers must be finite");
}

void VfnSpec::validate() const
{
    const std::string who = "vfn " + std::to_string(id) + ": ";
    if (!(max_cpu_hz > 0.0))
        throw ConfigError(who + "max_cpu_hz must be positive");
    if (!(distance_km > 0.0))
        throw ConfigError(who + "distance_km must be positive");
    if (!(fraction_lo > 0.0 && fraction_lo <= fraction_hi && fraction_hi <= 1.0))
        throw ConfigError(who + "fraction range must satisfy 0 < lo <= hi <= 1");
}

double dbm_to_watts(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double pathloss_db(double distance_km)
{
    require(distance_km > 0.0, "pathloss: distance must be positive");
    return 128.1 + 37.6 * std::log10(distance_km);
}

double channel_gain(double pl_db, double fading_power)
{
    require(fading_power >= 0.0, "channel gain: fading power must be non-negative");
    return std::pow(10.0, -pl_db / 10.0) * fading_power;
}

double link_rate(const ChannelParams& channel, double gain)
{
    require(gain >= 0.0, "link rate: gain must be non-negative");
    const double p = dbm_to_watts(channel.tx_power_dbm);
    const double n = dbm_to_watts(channel.noise_dbm_per_hz) * channel.bandwidth_hz;
    return channel.bandwidth_hz * std::log2(1.0 + p * gain / (n + channel.interference_w));
}

double latency(const Task& task, double rate, double freq)
{
    return task.size_bits / rate + task.size_bits * task.intensity / freq;
}

double energy(const Task& task, double rate, double freq, double tx_power_w, double rho)
{
    return tx_power_w * task.size_bits / rate + rho * freq * freq * task.size_bits * task.intensity;
}

CostBreakdown unit_cost(double xi, double latency_s, double energy_j, double size_bits, double l_scale)
{
    require(xi >= 0.0 && xi <= 1.0, "unit cost: xi must be in [0, 1]");
    require(size_bits > 0.0, "unit cost: task size must be positive");
    require(l_scale > 0.0, "unit cost: normalization scale must be positive");
    CostBreakdown c;
    c.latency_s = latency_s;
    c.energy_j = energy_j;
    // Skip a zero-weighted term so that 0 * inf does not poison the sum.
    double u = 0.0;
    if (xi > 0.0)
        u += xi * latency_s;
    if (xi < 1.0)
        u += (1.0 - xi) * energy_j;
    c.unit_cost_raw = u / size_bits;
    const double ratio = c.unit_cost_raw / l_scale;
    if (!(ratio <= 1.0)) {
        c.unit_cost_norm = 1.0;
        c.clamped = true;
    } else {
        c.unit_cost_norm = ratio;
    }
    return c;
}

} // namespace fogbandit
