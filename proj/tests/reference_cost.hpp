#pragma once

// Straight-line evaluation of the offloading cost, written independently of
// the library: SNR is formed in the dB domain and the rate uses natural logs.

#include <cmath>

namespace reference {

struct Inputs {
    double distance_km, fading, tx_dbm, bandwidth_hz, noise_dbm_hz;
    double size_bits, intensity, freq_hz, rho, xi;
};

struct Outputs {
    double rate, latency, energy, per_bit;
};

inline Outputs evaluate(const Inputs& in)
{
    const double pl_db = 128.1 + 37.6 * std::log10(in.distance_km);
    const double noise_db = in.noise_dbm_hz + 10.0 * std::log10(in.bandwidth_hz);
    const double snr = std::pow(10.0, (in.tx_dbm - pl_db - noise_db) / 10.0) * in.fading;
    Outputs o;
    o.rate = in.bandwidth_hz * std::log1p(snr) / std::log(2.0);
    const double t_tx = in.size_bits / o.rate;
    const double cycles = in.size_bits * in.intensity;
    o.latency = t_tx + cycles / in.freq_hz;
    const double p_w = std::pow(10.0, in.tx_dbm / 10.0) / 1000.0;
    o.energy = p_w * t_tx + in.rho * std::pow(in.freq_hz, 3) * (cycles / in.freq_hz);
    o.per_bit = (in.xi * o.latency + (1.0 - in.xi) * o.energy) / in.size_bits;
    return o;
}

inline double rel_err(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

} // namespace reference
