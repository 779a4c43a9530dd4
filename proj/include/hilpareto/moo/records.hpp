#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hilpareto/gp/likelihood.hpp"
#include "hilpareto/task/trial.hpp"

namespace hilpareto::moo {

enum class Phase { warmup, pre_eval, pre_hil, training, post_eval, post_hil };

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view s);
bool is_hil(Phase p);

/// One best-of-three trial with its feedback and the seeds that produced it.
struct TrialRecord {
    Phase phase = Phase::pre_hil;
    int iteration = 1;  // 1-based within the phase
    double assistance = 0.0;
    bool sobol = false;  // HiL only: space-filling pick rather than acquisition pick
    std::array<double, 3> attempts{};
    std::array<task::FailureReason, 3> reasons{};
    int best_index = 0;
    double best = 0.0;
    std::optional<gp::OrdinalLabel> label;
    std::optional<gp::Preference> preference;
    std::uint64_t trial_seed = 0;
    std::array<std::uint64_t, 3> attempt_seeds{};
    std::uint64_t ordinal_seed = 0;
    std::uint64_t pairwise_seed = 0;
    std::string started_at;  // wall clock, not part of replay equality
    std::string finished_at;
};

/// Equality over everything except wall-clock timestamps.
bool same_outcome(const TrialRecord& a, const TrialRecord& b);

/// Current UTC time as ISO 8601 with milliseconds.
std::string utc_timestamp();

}  // namespace hilpareto::moo
