#pragma once

#include <cstdint>
#include <span>

#include "hilpareto/gp/likelihood.hpp"
#include "hilpareto/task/trial.hpp"

namespace hilpareto::moo {

/// Whoever plays the game and answers the challenge questions: a simulated
/// participant or a live human behind the service. Seeds fix the disturbance
/// of each attempt and, for simulated users, their internal randomness.
class UserPort {
public:
    virtual ~UserPort() = default;

    /// Three attempts at one assistance level.
    virtual task::BestOfThree play(double assist, std::span<const std::uint64_t, 3> attempt_seeds) = 0;
    /// Easy/moderate/hard rating of the trial just played.
    virtual gp::OrdinalLabel rate(double assist, std::uint64_t query_seed) = 0;
    /// Which of the last two trials felt harder.
    virtual gp::Preference compare(double prev_assist, double curr_assist, std::uint64_t query_seed) = 0;
    /// Simulated users skip the untimed warm-up.
    virtual bool simulated() const { return false; }
};

}  // namespace hilpareto::moo
