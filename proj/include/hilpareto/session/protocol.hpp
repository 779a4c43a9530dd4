#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hilpareto/moo/engine.hpp"
#include "hilpareto/moo/records.hpp"
#include "hilpareto/moo/user_port.hpp"
#include "hilpareto/pareto/analysis.hpp"
#include "hilpareto/session/session_log.hpp"

namespace hilpareto::session {

/// Seed of one phase of a session, derived from the master seed.
std::uint64_t phase_seed(std::uint64_t master, moo::Phase phase);
/// Trial seed for non-HiL phases (iteration is 1-based).
std::uint64_t trial_seed(std::uint64_t phase_seed, int iteration);

/// Characterization settings of one HiL phase of this session.
moo::CharacterizationConfig hil_config(const SessionConfig& cfg, moo::Phase phase);

/// Plays one best-of-three trial without feedback questions.
moo::TrialRecord play_trial(moo::UserPort& user, moo::Phase phase, int iteration, double assistance,
                            std::uint64_t trial_seed);

/// Training order for the Pareto group: the designs in shuffled order,
/// reshuffled from the full set each time it is used up.
std::vector<double> pareto_schedule(std::span<const double> designs, int n_trials, std::uint64_t seed);

struct ProtocolObserver {
    /// Called before a phase starts; may block (the service waits for "advance" here).
    std::function<void(moo::Phase phase, int total)> before_phase;
    std::function<void(moo::Phase phase, int iteration, int total)> on_trial_start;
    std::function<void(const moo::TrialRecord&)> on_record;
    std::function<void(const PhaseSnapshot&)> on_model;
    std::function<void(moo::Phase phase, const pareto::ParetoFront&)> on_front;
    std::function<void(const pareto::Selection&)> on_selection;
};

std::vector<moo::TrialRecord> training_pareto(std::span<const double> designs, int n_trials, moo::UserPort& user,
                                              std::uint64_t seed, const ProtocolObserver& obs = {});

/// Staircase training from `start`; success means a best score >= threshold.
std::vector<moo::TrialRecord> training_staircase(int n_trials, moo::UserPort& user, std::uint64_t seed,
                                                 double start = 0.5, double success_threshold = 0.99,
                                                 const ProtocolObserver& obs = {});

/// Assistance levels the Pareto method would prescribe from a front.
struct Prospective {
    pareto::Selection selection;
    double mean = 0.0;
    double std = 0.0;  // population std over the selected levels
};

Prospective prospective_assistance(const pareto::ParetoFront& front, const pareto::SelectionWindow& window);
Prospective prospective_assistance(const moo::FittedModels& pre_models, const pareto::SelectionWindow& window,
                                   const moo::CharacterizationConfig& cfg = {});

/// Six phases: warm-up (live users only), pre-evaluation, pre-training HiL,
/// training, post-evaluation, post-training HiL. A failure in any phase ends
/// the run; the returned log then holds everything up to that point.
SessionLog run_protocol(moo::UserPort& user, const SessionConfig& cfg, const ProtocolObserver& obs = {});

/// Observer that appends every event to an open log file.
ProtocolObserver writer_observer(LogWriter& writer, const SessionConfig& cfg, ProtocolObserver chained = {});

struct ReplayReport {
    bool identical = true;
    std::vector<std::string> mismatches;
};

/// Re-runs a simulated session from its embedded config and seeds and compares
/// every record, model snapshot, front and selection bit for bit.
ReplayReport replay(const SessionLog& log);

/// For every HiL phase, rebuilds the sampler's decision at each adaptive
/// iteration from the earlier records and compares it with the logged level.
ReplayReport verify_sampler(const SessionLog& log);

}  // namespace hilpareto::session
