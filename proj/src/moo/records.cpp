#include "hilpareto/moo/records.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace hilpareto::moo {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::warmup: return "warmup";
        case Phase::pre_eval: return "pre_eval";
        case Phase::pre_hil: return "pre_hil";
        case Phase::training: return "training";
        case Phase::post_eval: return "post_eval";
        case Phase::post_hil: return "post_hil";
    }
    return "unknown";
}

std::optional<Phase> parse_phase(std::string_view s) {
    for (auto p : {Phase::warmup, Phase::pre_eval, Phase::pre_hil, Phase::training, Phase::post_eval,
                   Phase::post_hil})
        if (to_string(p) == s) return p;
    return std::nullopt;
}

bool is_hil(Phase p) { return p == Phase::pre_hil || p == Phase::post_hil; }

bool same_outcome(const TrialRecord& a, const TrialRecord& b) {
    return a.phase == b.phase && a.iteration == b.iteration && a.assistance == b.assistance && a.sobol == b.sobol &&
           a.attempts == b.attempts && a.reasons == b.reasons && a.best_index == b.best_index && a.best == b.best &&
           a.label == b.label && a.preference == b.preference && a.trial_seed == b.trial_seed &&
           a.attempt_seeds == b.attempt_seeds && a.ordinal_seed == b.ordinal_seed &&
           a.pairwise_seed == b.pairwise_seed;
}

std::string utc_timestamp() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const std::time_t secs = system_clock::to_time_t(now);
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

}  // namespace hilpareto::moo
