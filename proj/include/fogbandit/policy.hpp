#pragma once

#include <fogbandit/bandit.hpp>

#include <memory>
#include <string>
#include <string_view>

namespace fogbandit {

enum class PolicyKind { mix_aalto, exp3ix_partial, exp3ix_full, hedge_full, ucb1, eps_greedy, exp3, exp3p };

// Exp3.P constants in the anytime form (n replaced by t):
//   eta_t = eta_coef * sqrt(ln K / (t K)), gamma_t = min(1, gamma_coef * sqrt(K ln K / t)),
//   beta_t = sqrt(ln(K / nu) / (t K)).
struct Exp3PParams {
    double eta_coef = 0.95;
    double gamma_coef = 1.05;
    double nu = 0.05;
};

struct PolicySpec {
    PolicyKind kind = PolicyKind::mix_aalto;
    MixOptions mix;  // mix_aalto / hedge_full only
    double epsilon = 0.1;
    Exp3PParams exp3p;

    std::string name() const;
};

// Accepts mix-aalto, exp3ix-partial, exp3ix-full, hedge-full, ucb1,
// eps-greedy[:eps], exp3, exp3p. Throws ConfigError naming the token.
PolicySpec parse_policy(std::string_view token);

std::string_view kind_name(PolicyKind kind);

class Policy {
public:
    Policy(PolicySpec spec, HyperSchedule schedule, std::uint64_t seed)
        : spec_(std::move(spec)), schedule_(schedule), state_(seed) {}
    virtual ~Policy() = default;

    Policy(const Policy&) = delete;
    Policy& operator=(const Policy&) = delete;

    // Plays one round. Bandit-feedback policies query loss for the chosen arm only.
    virtual StepOutcome step(const RoundContext& ctx, const LossFn& loss) = 0;

    const PolicySpec& spec() const { return spec_; }
    const PolicyState& state() const { return state_; }

protected:
    PolicySpec spec_;
    HyperSchedule schedule_;
    PolicyState state_;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const HyperSchedule& schedule, std::uint64_t seed);

} // namespace fogbandit
