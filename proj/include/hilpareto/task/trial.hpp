#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hilpareto/task/dynamics.hpp"
#include "hilpareto/task/params.hpp"

namespace hilpareto::task {

enum class FailureReason { survived, pole_fell, hit_monster, policy_error };

std::string_view to_string(FailureReason r);
std::optional<FailureReason> parse_failure_reason(std::string_view s);

/// One integration step of a trial, for debugging and UI streaming.
struct TraceRow {
    double t = 0.0;
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;
    double user_force = 0.0;
    double assist_force = 0.0;
    double disturbance = 0.0;
};

struct TrialResult {
    double survival_time = 0.0;
    double score = 0.0;  // min(survival, duration) / duration
    FailureReason reason = FailureReason::survived;
    std::string error;             // policy exception text, if any
    std::vector<TraceRow> trace;   // empty unless requested
};

/// Maps the user's current view of the state to a cart force (N).
using Policy = std::function<double(const TaskState&)>;
/// Builds a fresh policy for a trial seed (policies may keep per-trial state).
using PolicyFactory = std::function<Policy(std::uint64_t trial_seed)>;

double normalized_score(double survival_time, const PlantParams& p);

/// Step-at-a-time trial driver. Both run_trial and the live service use it,
/// so failure rules and scoring are shared.
class TrialRunner {
public:
    TrialRunner(double assist, std::uint64_t seed, const PlantParams& p, const DisturbanceConfig& dc,
                Vec4 gains, bool record_trace = false);

    bool done() const { return reason_.has_value(); }
    const TaskState& state() const { return state_; }
    double assist() const { return assist_; }
    long steps() const { return steps_; }

    /// Integrates one dt with the given user force. No-op once done.
    void advance(double user_force);
    /// Ends the trial early because the controlling policy failed.
    void abort_with_policy_error(std::string what);

    TrialResult result() const;

private:
    void check_failure();

    PlantParams p_;
    Vec4 gains_;
    double assist_;
    OuDisturbance disturbance_;
    TaskState state_;
    long steps_ = 0;
    long max_steps_;
    std::optional<FailureReason> reason_;
    std::string error_;
    bool record_;
    std::vector<TraceRow> trace_;
};

TrialResult run_trial(const Policy& policy, double assist, std::uint64_t seed, const PlantParams& p,
                      const DisturbanceConfig& dc, bool record_trace = false);

/// Three attempts; returns all of them plus the index of the best (first on ties).
struct BestOfThree {
    std::array<TrialResult, 3> attempts;
    std::size_t best_index = 0;

    const TrialResult& best() const { return attempts[best_index]; }
};

BestOfThree best_of_three(const PolicyFactory& make_policy, double assist, std::span<const std::uint64_t, 3> seeds,
                          const PlantParams& p, const DisturbanceConfig& dc);
BestOfThree best_of_three(const Policy& policy, double assist, std::span<const std::uint64_t, 3> seeds,
                          const PlantParams& p, const DisturbanceConfig& dc);

/// The three attempt seeds of one best-of-three trial.
std::array<std::uint64_t, 3> attempt_seeds(std::uint64_t trial_seed);

/// Index of the maximal score, first on ties.
std::size_t best_index(std::span<const double> scores);

/// Tabular trace export: t,x,x_dot,theta,theta_dot,user_force,assist_force,disturbance
void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace);

}  // namespace hilpareto::task
