#include "hilpareto/session/protocol.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "hilpareto/common/errors.hpp"
#include "hilpareto/common/random.hpp"
#include "hilpareto/session/serialization.hpp"
#include "hilpareto/sim/staircase.hpp"

namespace hilpareto::session {

namespace {

constexpr std::uint64_t kPhaseStream = 0x5E55;
constexpr std::uint64_t kShuffleStream = 0x5F;

void fill_outcome(moo::TrialRecord& r, const task::BestOfThree& played) {
    for (std::size_t k = 0; k < 3; ++k) {
        r.attempts[k] = played.attempts[k].score;
        r.reasons[k] = played.attempts[k].reason;
    }
    r.best_index = static_cast<int>(played.best_index);
    r.best = played.best().score;
}

/// Thrown out of a phase so run_protocol can record where it stopped.
struct PhaseAbort {
    moo::Phase phase;
    int iteration;
    std::string message;
};

}  // namespace

std::uint64_t phase_seed(std::uint64_t master, moo::Phase phase) {
    return derive_seed(master, {kPhaseStream, static_cast<std::uint64_t>(phase)});
}

std::uint64_t trial_seed(std::uint64_t phase_seed, int iteration) {
    return derive_seed(phase_seed, {static_cast<std::uint64_t>(iteration)});
}

moo::CharacterizationConfig hil_config(const SessionConfig& cfg, moo::Phase phase) {
    moo::CharacterizationConfig c = cfg.characterization;
    c.seed = phase_seed(cfg.seed, phase);
    return c;
}

moo::TrialRecord play_trial(moo::UserPort& user, moo::Phase phase, int iteration, double assistance,
                            std::uint64_t seed) {
    moo::TrialRecord r;
    r.phase = phase;
    r.iteration = iteration;
    r.assistance = assistance;
    r.trial_seed = seed;
    r.attempt_seeds = task::attempt_seeds(seed);
    r.started_at = moo::utc_timestamp();
    fill_outcome(r, user.play(assistance, std::span<const std::uint64_t, 3>(r.attempt_seeds)));
    r.finished_at = moo::utc_timestamp();
    return r;
}

std::vector<double> pareto_schedule(std::span<const double> designs, int n_trials, std::uint64_t seed) {
    if (designs.empty()) throw std::invalid_argument("pareto_schedule: no designs to train on");
    Rng rng(derive_seed(seed, {kShuffleStream}));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(0, n_trials)));
    std::vector<double> deck;
    while (static_cast<int>(out.size()) < n_trials) {
        if (deck.empty()) {
            // Restart from the full subset, Fisher-Yates shuffled.
            deck.assign(designs.begin(), designs.end());
            for (std::size_t i = deck.size(); i > 1; --i) std::swap(deck[i - 1], deck[uniform_index(rng, i)]);
        }
        out.push_back(deck.back());
        deck.pop_back();
    }
    return out;
}

namespace {

template <typename NextLevel, typename AfterTrial>
std::vector<moo::TrialRecord> run_training(int n_trials, moo::UserPort& user, std::uint64_t seed,
                                           const ProtocolObserver& obs, NextLevel next, AfterTrial after) {
    std::vector<moo::TrialRecord> out;
    for (int n = 1; n <= n_trials; ++n) {
        if (obs.on_trial_start) obs.on_trial_start(moo::Phase::training, n, n_trials);
        out.push_back(play_trial(user, moo::Phase::training, n, next(n), trial_seed(seed, n)));
        after(out.back());
        if (obs.on_record) obs.on_record(out.back());
    }
    return out;
}

}  // namespace

std::vector<moo::TrialRecord> training_pareto(std::span<const double> designs, int n_trials, moo::UserPort& user,
                                              std::uint64_t seed, const ProtocolObserver& obs) {
    const std::vector<double> schedule = pareto_schedule(designs, n_trials, seed);
    return run_training(
        n_trials, user, seed, obs, [&](int n) { return schedule[static_cast<std::size_t>(n - 1)]; },
        [](const moo::TrialRecord&) {});
}

std::vector<moo::TrialRecord> training_staircase(int n_trials, moo::UserPort& user, std::uint64_t seed, double start,
                                                 double success_threshold, const ProtocolObserver& obs) {
    sim::StaircaseState st = sim::staircase_start(start);
    return run_training(
        n_trials, user, seed, obs, [&](int) { return st.level(); },
        [&](const moo::TrialRecord& r) { st = sim::staircase_update(st, r.best >= success_threshold); });
}

Prospective prospective_assistance(const pareto::ParetoFront& front, const pareto::SelectionWindow& window) {
    Prospective p;
    p.selection = pareto::select_designs(front, window);
    const auto& a = p.selection.assistance;
    double sum = 0.0;
    for (double x : a) sum += x;
    p.mean = sum / static_cast<double>(a.size());
    double ss = 0.0;
    for (double x : a) ss += (x - p.mean) * (x - p.mean);
    p.std = std::sqrt(ss / static_cast<double>(a.size()));
    return p;
}

Prospective prospective_assistance(const moo::FittedModels& pre_models, const pareto::SelectionWindow& window,
                                   const moo::CharacterizationConfig& cfg) {
    return prospective_assistance(
        moo::extract_front(pre_models, moo::CandidateGrid::uniform(cfg.grid_size), cfg.likelihood), window);
}

SessionLog run_protocol(moo::UserPort& user, const SessionConfig& cfg, const ProtocolObserver& obs) {
    cfg.validate();
    SessionLog log;
    log.config = cfg;

    auto record = [&](const moo::TrialRecord& r) {
        log.records.push_back(r);
        if (obs.on_record) obs.on_record(r);
    };
    auto begin = [&](moo::Phase p, int total) {
        if (!obs.before_phase) return;
        try {
            obs.before_phase(p, total);
        } catch (const std::exception& e) {
            throw PhaseAbort{p, 0, e.what()};
        }
    };
    auto fixed_phase = [&](moo::Phase phase, int n_trials, double assistance) {
        begin(phase, n_trials);
        const std::uint64_t seed = phase_seed(cfg.seed, phase);
        for (int n = 1; n <= n_trials; ++n) {
            if (obs.on_trial_start) obs.on_trial_start(phase, n, n_trials);
            try {
                record(play_trial(user, phase, n, assistance, trial_seed(seed, n)));
            } catch (const std::exception& e) {
                throw PhaseAbort{phase, n, e.what()};
            }
        }
    };
    auto hil_phase = [&](moo::Phase phase) {
        const moo::CharacterizationConfig hc = hil_config(cfg, phase);
        begin(phase, hc.iterations);
        moo::CharacterizationObserver co;
        co.on_iteration = [&](int n, int total) {
            if (obs.on_trial_start) obs.on_trial_start(phase, n, total);
        };
        co.on_record = record;
        co.on_model = [&](const moo::ModelSnapshot& s) {
            log.snapshots.push_back({phase, s});
            if (obs.on_model) obs.on_model(log.snapshots.back());
        };
        moo::CharacterizationResult res = moo::run_characterization(user, hc, phase, co);
        if (!res.completed) throw PhaseAbort{phase, static_cast<int>(res.records.size()) + 1, res.error};
        if (obs.on_front) obs.on_front(phase, *res.front);
        return res;
    };

    try {
        if (cfg.characterize_only) {
            log.pre_front = *hil_phase(moo::Phase::pre_hil).front;
            log.completed = true;
            return log;
        }
        if (!user.simulated()) fixed_phase(moo::Phase::warmup, cfg.warmup_trials, cfg.warmup_assistance);
        fixed_phase(moo::Phase::pre_eval, cfg.eval_trials, 0.0);

        moo::CharacterizationResult pre = hil_phase(moo::Phase::pre_hil);
        log.pre_front = *pre.front;
        // Both groups get the selection logged: it is the prospective assistance of a control participant.
        log.selection = pareto::select_designs(*log.pre_front, cfg.window);
        if (obs.on_selection) obs.on_selection(*log.selection);

        begin(moo::Phase::training, cfg.training_trials);
        const std::uint64_t tseed = phase_seed(cfg.seed, moo::Phase::training);
        ProtocolObserver tobs;
        tobs.on_trial_start = obs.on_trial_start;
        int training_done = 0;
        tobs.on_record = [&](const moo::TrialRecord& r) {
            ++training_done;
            log.records.push_back(r);
            if (obs.on_record) obs.on_record(r);
        };
        try {
            if (cfg.group == Group::pareto)
                training_pareto(log.selection->assistance, cfg.training_trials, user, tseed, tobs);
            else
                training_staircase(cfg.training_trials, user, tseed, cfg.staircase_start, cfg.success_threshold,
                                   tobs);
        } catch (const std::exception& e) {
            throw PhaseAbort{moo::Phase::training, training_done + 1, e.what()};
        }

        fixed_phase(moo::Phase::post_eval, cfg.eval_trials, 0.0);
        moo::CharacterizationResult post = hil_phase(moo::Phase::post_hil);
        log.post_front = *post.front;
        log.completed = true;
    } catch (const PhaseAbort& a) {
        log.failure = PhaseFailure{a.phase, a.iteration, a.message};
    }
    return log;
}

ProtocolObserver writer_observer(LogWriter& writer, const SessionConfig& cfg, ProtocolObserver chained) {
    ProtocolObserver o = chained;
    o.on_record = [&writer, f = chained.on_record](const moo::TrialRecord& r) {
        writer.write(trial_line(r));
        if (f) f(r);
    };
    o.on_model = [&writer, f = chained.on_model](const PhaseSnapshot& s) {
        writer.write(model_line(s));
        if (f) f(s);
    };
    o.on_front = [&writer, f = chained.on_front](moo::Phase p, const pareto::ParetoFront& front) {
        writer.write(front_line(p, front));
        if (f) f(p, front);
    };
    o.on_selection = [&writer, w = cfg.window, f = chained.on_selection](const pareto::Selection& s) {
        writer.write(selection_line(s, w));
        if (f) f(s);
    };
    return o;
}

namespace {

bool same_curves(const pareto::ModelCurves& a, const pareto::ModelCurves& b) {
    return a.grid == b.grid && a.score_mean == b.score_mean && a.score_std == b.score_std &&
           a.chall_mean == b.chall_mean && a.chall_std == b.chall_std;
}

bool same_points(const std::vector<pareto::ObjectivePoint>& a, const std::vector<pareto::ObjectivePoint>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].assistance != b[i].assistance || a[i].expected_score != b[i].expected_score ||
            a[i].expected_challenge != b[i].expected_challenge)
            return false;
    return true;
}

bool same_front(const std::optional<pareto::ParetoFront>& a, const std::optional<pareto::ParetoFront>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return same_points(a->front, b->front) && same_points(a->all_points, b->all_points) && a->t1 == b->t1 &&
           a->t2 == b->t2;
}

}  // namespace

ReplayReport replay(const SessionLog& log) {
    ReplayReport rep;
    auto mismatch = [&](std::string what) {
        rep.identical = false;
        rep.mismatches.push_back(std::move(what));
    };
    if (!log.config.sim_user) {
        mismatch("log has no simulated-user profile; only simulated sessions can be replayed");
        return rep;
    }
    sim::SimulatedUser user(*log.config.sim_user, log.config.plant, log.config.disturbance);
    const SessionLog again = run_protocol(user, log.config);

    if (again.records.size() != log.records.size())
        mismatch("record count " + std::to_string(log.records.size()) + " vs replayed " +
                 std::to_string(again.records.size()));
    const std::size_t n = std::min(again.records.size(), log.records.size());
    for (std::size_t i = 0; i < n; ++i)
        if (!moo::same_outcome(log.records[i], again.records[i]))
            mismatch("record " + std::to_string(i + 1) + " (" + std::string(moo::to_string(log.records[i].phase)) +
                     " #" + std::to_string(log.records[i].iteration) + ") differs");
    if (again.snapshots.size() != log.snapshots.size()) mismatch("model snapshot count differs");
    for (std::size_t i = 0; i < std::min(again.snapshots.size(), log.snapshots.size()); ++i) {
        const auto& a = log.snapshots[i];
        const auto& b = again.snapshots[i];
        if (a.phase != b.phase || a.snapshot.iteration != b.snapshot.iteration ||
            !same_curves(a.snapshot.curves, b.snapshot.curves) || !same_points(a.snapshot.front, b.snapshot.front) ||
            a.snapshot.score_mean != b.snapshot.score_mean || a.snapshot.score_std != b.snapshot.score_std)
            mismatch("model snapshot " + std::to_string(i + 1) + " differs");
    }
    if (!same_front(log.pre_front, again.pre_front)) mismatch("pre-training front differs");
    if (!same_front(log.post_front, again.post_front)) mismatch("post-training front differs");
    if (log.selection.has_value() != again.selection.has_value() ||
        (log.selection && (log.selection->assistance != again.selection->assistance ||
                           log.selection->fallback != again.selection->fallback)))
        mismatch("selected designs differ");
    if (log.completed != again.completed) mismatch("completion status differs");
    return rep;
}

ReplayReport verify_sampler(const SessionLog& log) {
    ReplayReport rep;
    for (moo::Phase phase : {moo::Phase::pre_hil, moo::Phase::post_hil}) {
        const auto records = log.phase_records(phase);
        const moo::CharacterizationConfig hc = hil_config(log.config, phase);
        for (std::size_t i = 0; i < records.size(); ++i) {
            const int n = records[i].iteration;
            const moo::SamplerDecision d = moo::next_assistance(std::span(records).first(i), n, hc);
            const bool ok = d.assistance == records[i].assistance && d.sobol == records[i].sobol;
            if (!ok) {
                rep.identical = false;
                rep.mismatches.push_back(std::string(moo::to_string(phase)) + " #" + std::to_string(n) +
                                         ": logged assistance " + std::to_string(records[i].assistance) +
                                         ", sampler picks " + std::to_string(d.assistance));
            }
        }
    }
    return rep;
}

}  // namespace hilpareto::session
