#include <doctest.h>

#include <fogbandit/policy.hpp>

#include <cmath>
#include <numeric>
#include <thread>

using namespace fogbandit;

namespace {

RoundContext ctx_for(std::vector<ArmId> cands, std::int64_t round, double q = 0.2e6)
{
    return RoundContext{std::move(cands), q, 0.2e6, 1e6, round};
}

const char* kAll[] = {"mix-aalto", "exp3ix-partial", "exp3ix-full", "hedge-full",
                      "ucb1",      "eps-greedy",     "exp3",        "exp3p"};

} // namespace

TEST_CASE("policy tokens")
{
    for (const char* tok : kAll)
        CHECK(std::string(kind_name(parse_policy(tok).kind)) == tok);
    CHECK(parse_policy("eps-greedy:0.25").epsilon == 0.25);
    CHECK(parse_policy("eps-greedy").epsilon == 0.1);
    CHECK_FALSE(parse_policy("exp3ix-full").mix.demand_weighting);
    CHECK(parse_policy("exp3ix-partial").mix.supply == SupplyMode::partial_reset);

    try {
        parse_policy("thompson");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("thompson") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_policy("eps-greedy:x"), ConfigError);
    CHECK_THROWS_AS(parse_policy("eps-greedy:1.5"), ConfigError);
    CHECK_THROWS_AS(parse_policy("ucb1:3"), ConfigError);
}

TEST_CASE("UCB1 plays every arm once in candidate order")
{
    auto p = make_policy(parse_policy("ucb1"), {}, 1);
    const LossFn loss = [](ArmId a) { return 0.1 * static_cast<double>(a); };
    for (std::int64_t t = 1; t <= 3; ++t)
        CHECK(p->step(ctx_for({1, 2, 3}, t), loss).decision.chosen == t);
    // Afterwards the lowest mean wins once exploration bonuses are equal.
    CHECK(p->step(ctx_for({1, 2, 3}, 4), loss).decision.chosen == 1);
}

TEST_CASE("eps-greedy probability accounting")
{
    auto p = make_policy(parse_policy("eps-greedy"), {}, 2);
    const LossFn loss = [](ArmId a) { return a == 1 ? 0.2 : 0.5; };
    std::int64_t t = 1;
    while (p->state().scores.size() < 2 || p->state().scores.at(2) == 0.0)
        p->step(ctx_for({1, 2}, t++), loss);
    auto out = p->step(ctx_for({1, 2}, t), loss);
    CHECK(out.decision.distribution[0] == doctest::Approx(0.95));
    CHECK(out.decision.distribution[1] == doctest::Approx(0.05));
}

TEST_CASE("full-feedback Hedge concentrates on the better arm")
{
    auto p = make_policy(parse_policy("hedge-full"), {}, 3);
    const LossFn loss = [](ArmId a) { return a == 1 ? 0.1 : 0.9; };
    StepOutcome out;
    for (std::int64_t t = 1; t <= 200; ++t)
        out = p->step(ctx_for({1, 2}, t), loss);
    CHECK(out.decision.distribution[0] >= 0.99);
    CHECK(out.gamma == 0.0);
    CHECK(out.estimates[1] == 0.9);  // true loss of the unchosen arm is used
}

TEST_CASE("property: randomized policies emit valid positive distributions on volatile sets")
{
    KeyedStream g({99, 1});
    for (const char* tok : kAll) {
        if (std::string(tok) == "ucb1")
            continue;  // deterministic index policy: one-hot by construction
        auto p = make_policy(parse_policy(tok), {}, 7);
        std::vector<ArmId> cands{1, 2, 3};
        for (std::int64_t t = 1; t <= 400; ++t) {
            if (g.uniform() < 0.05) {
                cands.clear();
                for (ArmId a = 1; a <= 8; ++a)
                    if (g.uniform() < 0.5)
                        cands.push_back(a);
                if (cands.empty())
                    cands.push_back(1 + static_cast<ArmId>(g.uniform() * 8.0));
            }
            const double q = g.uniform(0.2e6, 1e6);
            auto out = p->step(ctx_for(cands, t, q), [&](ArmId a) { return std::fmod(0.37 * a + 0.01 * t, 1.0); });
            const auto& d = out.decision.distribution;
            REQUIRE(d.size() == cands.size());
            REQUIRE(std::abs(std::accumulate(d.begin(), d.end(), 0.0) - 1.0) <= 1e-9);
            for (double x : d)
                REQUIRE(x > 0.0);
            REQUIRE(std::find(cands.begin(), cands.end(), out.decision.chosen) != cands.end());
            for (const auto& [id, s] : p->state().scores)
                REQUIRE(std::isfinite(s));
        }
    }
}

TEST_CASE("UCB1 distribution is a valid one-hot vector")
{
    auto p = make_policy(parse_policy("ucb1"), {}, 1);
    for (std::int64_t t = 1; t <= 50; ++t) {
        auto out = p->step(ctx_for({4, 5, 6}, t), [](ArmId a) { return a == 5 ? 0.3 : 0.6; });
        const auto& d = out.decision.distribution;
        CHECK(std::accumulate(d.begin(), d.end(), 0.0) == 1.0);
        CHECK(d[out.decision.chosen_index] == 1.0);
    }
}

TEST_CASE("same seed, same decisions; policies move between threads")
{
    for (const char* tok : kAll) {
        auto a = make_policy(parse_policy(tok), {}, 11);
        std::vector<ArmId> chosen_a, chosen_b;
        const LossFn loss = [](ArmId id) { return 0.1 * static_cast<double>(id); };
        for (std::int64_t t = 1; t <= 100; ++t)
            chosen_a.push_back(a->step(ctx_for({1, 2, 3, 4}, t, 0.7e6), loss).decision.chosen);
        std::thread th([&] {
            auto b = make_policy(parse_policy(tok), {}, 11);
            for (std::int64_t t = 1; t <= 100; ++t)
                chosen_b.push_back(b->step(ctx_for({1, 2, 3, 4}, t, 0.7e6), loss).decision.chosen);
        });
        th.join();
        CHECK(chosen_a == chosen_b);
    }
}
