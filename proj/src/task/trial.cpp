#include "hilpareto/task/trial.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <stdexcept>

#include "hilpareto/common/random.hpp"
#include "hilpareto/task/lqr.hpp"

namespace hilpareto::task {

std::string_view to_string(FailureReason r) {
    switch (r) {
        case FailureReason::survived: return "survived";
        case FailureReason::pole_fell: return "pole_fell";
        case FailureReason::hit_monster: return "hit_monster";
        case FailureReason::policy_error: return "policy_error";
    }
    return "unknown";
}

std::optional<FailureReason> parse_failure_reason(std::string_view s) {
    for (auto r : {FailureReason::survived, FailureReason::pole_fell, FailureReason::hit_monster,
                   FailureReason::policy_error})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

double normalized_score(double survival_time, const PlantParams& p) {
    return std::clamp(survival_time, 0.0, p.trial_duration) / p.trial_duration;
}

TrialRunner::TrialRunner(double assist, std::uint64_t seed, const PlantParams& p, const DisturbanceConfig& dc,
                         Vec4 gains, bool record_trace)
    : p_(p), gains_(std::move(gains)), assist_(assist), disturbance_(dc, p.dt, seed),
      max_steps_(p.steps_per_trial()), record_(record_trace) {
    p_.validate();
    if (!(std::isfinite(assist) && assist >= 0.0 && assist <= 1.0))
        throw std::invalid_argument("TrialRunner: assistance level must lie in [0, 1]");
}

void TrialRunner::advance(double user_force) {
    if (done()) return;
    const double dist = disturbance_.next();
    const double user = std::clamp(user_force, -p_.max_force, p_.max_force);
    const double assist_f = assistance_force(assist_, state_, gains_, p_);
    if (record_)
        trace_.push_back({state_.t, state_.x, state_.x_dot, state_.theta, state_.theta_dot, user, assist_f, dist});
    TaskState next = integrate_rk4(state_, user + assist_f + dist, p_.dt, p_);
    ++steps_;
    next.t = static_cast<double>(steps_) * p_.dt;
    state_ = next;
    check_failure();
}

void TrialRunner::check_failure() {
    if (std::abs(state_.theta) > p_.fail_angle_rad())
        reason_ = FailureReason::pole_fell;
    else if (std::abs(state_.x) >= p_.workspace_half_width)
        reason_ = FailureReason::hit_monster;
    else if (steps_ >= max_steps_)
        reason_ = FailureReason::survived;
}

void TrialRunner::abort_with_policy_error(std::string what) {
    if (done()) return;
    reason_ = FailureReason::policy_error;
    error_ = std::move(what);
}

TrialResult TrialRunner::result() const {
    TrialResult r;
    r.reason = reason_.value_or(FailureReason::survived);
    r.survival_time = r.reason == FailureReason::survived && steps_ >= max_steps_
                          ? p_.trial_duration
                          : std::min(state_.t, p_.trial_duration);
    r.score = r.reason == FailureReason::survived && steps_ >= max_steps_ ? 1.0
                                                                         : normalized_score(r.survival_time, p_);
    r.error = error_;
    r.trace = trace_;
    return r;
}

TrialResult run_trial(const Policy& policy, double assist, std::uint64_t seed, const PlantParams& p,
                      const DisturbanceConfig& dc, bool record_trace) {
    TrialRunner runner(assist, seed, p, dc, lqr_gains(p), record_trace);
    while (!runner.done()) {
        double force = 0.0;
        try {
            force = policy ? policy(runner.state()) : 0.0;
            if (!std::isfinite(force)) throw std::runtime_error("policy returned a non-finite force");
        } catch (const std::exception& e) {
            runner.abort_with_policy_error(e.what());
            break;
        }
        runner.advance(force);
    }
    return runner.result();
}

std::array<std::uint64_t, 3> attempt_seeds(std::uint64_t trial_seed) {
    constexpr std::uint64_t kAttemptStream = 0xA7;
    return {derive_seed(trial_seed, {kAttemptStream, 0}), derive_seed(trial_seed, {kAttemptStream, 1}),
            derive_seed(trial_seed, {kAttemptStream, 2})};
}

std::size_t best_index(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

BestOfThree best_of_three(const PolicyFactory& make_policy, double assist, std::span<const std::uint64_t, 3> seeds,
                          const PlantParams& p, const DisturbanceConfig& dc) {
    BestOfThree out;
    std::array<double, 3> scores{};
    for (std::size_t i = 0; i < 3; ++i) {
        out.attempts[i] = run_trial(make_policy(seeds[i]), assist, seeds[i], p, dc);
        scores[i] = out.attempts[i].score;
    }
    out.best_index = best_index(scores);
    return out;
}

BestOfThree best_of_three(const Policy& policy, double assist, std::span<const std::uint64_t, 3> seeds,
                          const PlantParams& p, const DisturbanceConfig& dc) {
    return best_of_three([&policy](std::uint64_t) { return policy; }, assist, seeds, p, dc);
}

void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace) {
    os << "t,x,x_dot,theta,theta_dot,user_force,assist_force,disturbance\n";
    os.precision(17);
    for (const auto& r : trace)
        os << r.t << ',' << r.x << ',' << r.x_dot << ',' << r.theta << ',' << r.theta_dot << ','
           << r.user_force << ',' << r.assist_force << ',' << r.disturbance << '\n';
}

}  // namespace hilpareto::task
