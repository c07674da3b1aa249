#pragma once

#include <fogbandit/common.hpp>

namespace fogbandit {

struct ChannelParams {
    double tx_power_dbm = 24.0;
    double bandwidth_hz = 10e6;
    double noise_dbm_per_hz = -174.0;
    double interference_w = 0.0;  // orthogonal allocation: always 0

    void validate() const;
};

struct VfnSpec {
    ArmId id = 0;
    double max_cpu_hz = 1e9;
    double distance_km = 0.1;
    double fraction_lo = 0.2;
    double fraction_hi = 0.5;

    void validate() const;
};

struct Task {
    double size_bits = 0.6e6;
    double intensity = 1000.0;  // cycles/bit
};

struct CostBreakdown {
    double latency_s = 0.0;
    double energy_j = 0.0;
    double unit_cost_raw = 0.0;   // weighted cost per bit
    double unit_cost_norm = 0.0;  // in [0, 1]
    bool clamped = false;         // unit_cost_raw exceeded the normalization scale
};

inline constexpr double kDefaultRho = 1e-27;  // effective switched capacitance

double dbm_to_watts(double dbm);

// 3GPP macro pathloss 128.1 + 37.6 log10(d), d in km.
double pathloss_db(double distance_km);

// 10^(-PL/10) * fading power.
double channel_gain(double pathloss_db, double fading_power);

// Shannon rate B log2(1 + P g / (N0 B + I)) in bits/s.
double link_rate(const ChannelParams& channel, double gain);

// q/r + q w/f.
double latency(const Task& task, double rate, double freq);

// P q/r + rho f^2 q w (computing power rho f^3 over execution time q w/f).
double energy(const Task& task, double rate, double freq, double tx_power_w, double rho);

// U = xi D + (1 - xi) E; raw = U / q; norm = min(raw / l_scale, 1).
// A non-finite latency or energy (zero link rate) saturates at 1.
CostBreakdown unit_cost(double xi, double latency_s, double energy_j, double size_bits, double l_scale);

} // namespace fogbandit
