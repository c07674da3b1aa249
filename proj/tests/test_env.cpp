#include <doctest.h>

#include "reference_cost.hpp"

#include <fogbandit/environment.hpp>

#include <cmath>

using namespace fogbandit;

TEST_CASE("pathloss and gain")
{
    CHECK(pathloss_db(1.0) == doctest::Approx(128.1));
    CHECK(pathloss_db(0.1) == doctest::Approx(90.5));
    CHECK(pathloss_db(0.4) == doctest::Approx(113.14).epsilon(1e-4));
    CHECK_THROWS_AS(pathloss_db(0.0), ContractError);
    CHECK(channel_gain(0.0, 1.0) == 1.0);
    CHECK(channel_gain(90.5, 1.0) == doctest::Approx(8.913e-10).epsilon(1e-3));
}

TEST_CASE("fading power has unit mean")
{
    Scenario s = build_synthetic();
    Environment env(s, 3);
    double total = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        total += env.fading_power(1, i + 1);
    CHECK(total / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("link rate")
{
    ChannelParams ch;
    CHECK(link_rate(ch, 0.0) == 0.0);
    const double r = link_rate(ch, channel_gain(90.5, 1.0));
    CHECK(r == doctest::Approx(1.246e8).epsilon(0.01));
    ChannelParams wide = ch;
    wide.bandwidth_hz *= 2.0;
    wide.noise_dbm_per_hz -= 10.0 * std::log10(2.0);  // same SNR
    CHECK(link_rate(wide, channel_gain(90.5, 1.0)) == doctest::Approx(2.0 * r).epsilon(1e-12));
}

TEST_CASE("latency and energy")
{
    const Task t{0.6e6, 1000.0};
    CHECK(latency(t, 1.25e8, 2e9) == doctest::Approx(0.3048).epsilon(1e-4));
    CHECK(latency(Task{0.6e6, 0.0}, 1.25e8, 2e9) == doctest::Approx(0.6e6 / 1.25e8));
    CHECK(latency(Task{1.2e6, 1000.0}, 1.25e8, 2e9) == doctest::Approx(2.0 * latency(t, 1.25e8, 2e9)));

    const double p = dbm_to_watts(24.0);
    CHECK(p == doctest::Approx(0.2512).epsilon(1e-3));
    CHECK(energy(t, 1.25e8, 2e9, p, 1e-27) == doctest::Approx(2.4012).epsilon(1e-3));
    CHECK(energy(t, 1.25e8, 2e9, p, 0.0) == doctest::Approx(p * 0.6e6 / 1.25e8));
    CHECK(energy(t, 1.25e8, 3e9, p, 1e-27) > energy(t, 1.25e8, 2e9, p, 1e-27));
}

TEST_CASE("unit cost")
{
    auto c = unit_cost(0.5, 0.3048, 2.4012, 0.6e6, 1.0);
    CHECK(c.unit_cost_raw == doctest::Approx(2.255e-6).epsilon(1e-3));
    CHECK(std::abs(c.unit_cost_raw - 2.255e-6) < 1e-9);
    CHECK(unit_cost(1.0, 0.3, 2.4, 0.6e6, 1.0).unit_cost_raw == doctest::Approx(0.3 / 0.6e6));
    CHECK(unit_cost(0.0, 0.3, 2.4, 0.6e6, 1.0).unit_cost_raw == doctest::Approx(2.4 / 0.6e6));

    auto sat = unit_cost(1.0, 10.0, 1.0, 1.0, 1.0);
    CHECK(sat.unit_cost_norm == 1.0);
    CHECK(sat.clamped);
    auto inf = unit_cost(1.0, INFINITY, INFINITY, 1e6, 1.0);
    CHECK(inf.unit_cost_norm == 1.0);
    CHECK(inf.clamped);
    // Monotone normalization.
    CHECK(unit_cost(1.0, 0.1, 0, 1e6, 1e-6).unit_cost_norm < unit_cost(1.0, 0.2, 0, 1e6, 1e-6).unit_cost_norm);
}

TEST_CASE("xi endpoints: latency-only cost ignores rho, energy-only cost ignores latency")
{
    const Task t{0.5e6, 1000.0};
    const double r = 1e8, f = 2e9, p = dbm_to_watts(24.0);
    const double d = latency(t, r, f);
    auto a = unit_cost(1.0, d, energy(t, r, f, p, 1e-27), t.size_bits, 1.0);
    auto b = unit_cost(1.0, d, energy(t, r, f, p, 5e-27), t.size_bits, 1.0);
    CHECK(a.unit_cost_raw == b.unit_cost_raw);
    const double e = energy(t, r, f, p, 1e-27);
    CHECK(unit_cost(0.0, d, e, t.size_bits, 1.0).unit_cost_raw == unit_cost(0.0, 3.0 * d, e, t.size_bits, 1.0).unit_cost_raw);
}

TEST_CASE("composed pipeline equals a straight-line evaluation")
{
    KeyedStream g({2024, 11});
    for (int i = 0; i < 100; ++i) {
        reference::Inputs in{g.uniform(0.01, 0.4), g.uniform(0.01, 4.0), g.uniform(10.0, 30.0),
                             g.uniform(1e6, 40e6), g.uniform(-180.0, -160.0), g.uniform(0.2e6, 1e6),
                             g.uniform(100.0, 3000.0), g.uniform(0.3e9, 3e9), g.uniform(1e-28, 1e-26),
                             g.uniform(0.0, 1.0)};
        const auto ref = reference::evaluate(in);
        ChannelParams ch{in.tx_dbm, in.bandwidth_hz, in.noise_dbm_hz, 0.0};
        const double rate = link_rate(ch, channel_gain(pathloss_db(in.distance_km), in.fading));
        const Task t{in.size_bits, in.intensity};
        const double d = latency(t, rate, in.freq_hz);
        const double e = energy(t, rate, in.freq_hz, dbm_to_watts(in.tx_dbm), in.rho);
        const auto c = unit_cost(in.xi, d, e, in.size_bits, 1.0);
        REQUIRE(reference::rel_err(rate, ref.rate) <= 1e-12);
        REQUIRE(reference::rel_err(d, ref.latency) <= 1e-12);
        REQUIRE(reference::rel_err(e, ref.energy) <= 1e-12);
        REQUIRE(reference::rel_err(c.unit_cost_raw, ref.per_bit) <= 1e-12);
    }
}

TEST_CASE("allocated frequency stays in the fraction range")
{
    AdversaryConfig cfg;
    Adversary adv(cfg, 5, 10000);
    VfnSpec v{1, 6e9, 0.2, 0.2, 0.5};
    for (std::int64_t t = 1; t <= 10000; ++t) {
        const double f = allocated_frequency(v, adv, t);
        REQUIRE(f >= 0.2 * 6e9);
        REQUIRE(f <= 0.5 * 6e9);
    }
    VfnSpec fixed{2, 2e9, 0.2, 0.5, 0.5};
    CHECK(allocated_frequency(fixed, adv, 17) == doctest::Approx(1e9));

    AdversaryConfig still = cfg;
    still.jitter_width = 0.0;
    Adversary calm(still, 5, 10000);
    CHECK(allocated_frequency(v, calm, 33) == doctest::Approx(calm.phase_mean(v, 33) * 6e9));
}

TEST_CASE("adversary phases: geometric lengths with the configured mean, shared across arms")
{
    AdversaryConfig cfg;
    cfg.phase_length_mean = 50.0;
    Adversary adv(cfg, 9, 200000);
    const double mean_len = 200000.0 / static_cast<double>(adv.phase_count());
    CHECK(mean_len == doctest::Approx(50.0).epsilon(0.05));
    VfnSpec a{1, 6e9, 0.2, 0.2, 0.5};
    // Means are constant within a phase.
    for (std::int64_t t = 2; t <= 1000; ++t)
        if (adv.phase_of(t) == adv.phase_of(t - 1))
            REQUIRE(adv.phase_mean(a, t) == adv.phase_mean(a, t - 1));
    CHECK_THROWS_AS(Adversary({0.5, 0.05, 1}, 1, 10), ContractError);
}

TEST_CASE("environment round: deterministic, keyed by candidates, losses in [0, 1]")
{
    Scenario s = build_synthetic();
    Environment env(s, 4);
    const Task t{0.6e6, 1000.0};
    const auto& c1000 = s.candidates(1000);
    const auto& c1001 = s.candidates(1001);
    auto a = env.env_round(c1000, t, 1000);
    auto b = env.env_round(c1000, t, 1000);
    CHECK(a.size() == 5);
    CHECK(a.count(5) == 1);
    for (const auto& [id, c] : a)
        CHECK(c.cost.unit_cost_norm == b.at(id).cost.unit_cost_norm);
    auto n = env.env_round(c1001, t, 1001);
    CHECK(n.size() == 6);
    CHECK(n.count(5) == 0);
    CHECK(n.count(6) == 1);
    CHECK(n.count(7) == 1);

    const std::vector<ArmId> one{3};
    CHECK(env.env_round(one, t, 5).size() == 1);
}

TEST_CASE("clamp rate of the default synthetic scenario stays below 1%")
{
    Scenario s = build_synthetic();
    Environment env(s, 1);
    TaskStream tasks(s.task_stream, 1);
    std::size_t clamped = 0, total = 0;
    for (std::int64_t t = 1; t <= s.horizon; ++t)
        for (const auto& [id, c] : env.env_round(s.candidates(t), tasks.at(t), t)) {
            REQUIRE(c.cost.unit_cost_norm >= 0.0);
            REQUIRE(c.cost.unit_cost_norm <= 1.0);
            clamped += c.cost.clamped;
            ++total;
        }
    CHECK(static_cast<double>(clamped) / static_cast<double>(total) < 0.01);
}

TEST_CASE("environment values are pure functions of scenario, seed, round and arm")
{
    Scenario s = build_synthetic();
    Environment e1(s, 8), e2(s, 8), e3(s, 9);
    const Task t{0.4e6, 1000.0};
    const std::vector<ArmId> c{1, 2};
    // Query order must not matter.
    auto late = e1.env_round(c, t, 2500);
    e2.env_round(c, t, 10);
    CHECK(e2.env_round(c, t, 2500).at(1).cost.unit_cost_norm == late.at(1).cost.unit_cost_norm);
    CHECK(e3.env_round(c, t, 2500).at(1).cost.unit_cost_norm != late.at(1).cost.unit_cost_norm);
}
