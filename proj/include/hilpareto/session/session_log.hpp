#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hilpareto/moo/engine.hpp"
#include "hilpareto/moo/records.hpp"
#include "hilpareto/pareto/analysis.hpp"
#include "hilpareto/pareto/front.hpp"
#include "hilpareto/sim/sim_user.hpp"
#include "hilpareto/task/params.hpp"

namespace hilpareto::session {

enum class Group { pareto, staircase };

std::string_view to_string(Group g);
Group parse_group(std::string_view s);

struct SessionConfig {
    std::string participant_id = "P00";
    Group group = Group::pareto;
    moo::CharacterizationConfig characterization;  // its seed is replaced per HiL phase
    int training_trials = 20;
    int eval_trials = 3;           // best-of-three trials at assistance 0
    int warmup_trials = 2;         // live participants only
    double warmup_assistance = 0.5;
    pareto::SelectionWindow window;
    double staircase_start = 0.5;
    double success_threshold = 0.99;  // staircase success: best score at or above
    task::PlantParams plant;
    task::DisturbanceConfig disturbance;
    std::optional<sim::SimUserProfile> sim_user;  // present for simulated sessions
    bool characterize_only = false;  // run the pre-training HiL phase and stop
    std::uint64_t seed = 1;

    void validate() const;
};

void to_json(nlohmann::json& j, const SessionConfig& c);
void from_json(const nlohmann::json& j, SessionConfig& c);

struct PhaseSnapshot {
    moo::Phase phase = moo::Phase::pre_hil;
    moo::ModelSnapshot snapshot;
};

struct PhaseFailure {
    moo::Phase phase = moo::Phase::warmup;
    int iteration = 0;  // trial that was running, 0 if between trials
    std::string message;
};

inline constexpr int kLogVersion = 1;
inline constexpr std::string_view kLogFormat = "hilpareto-session";

/// Everything one participant produced. Written as line-delimited JSON: a
/// header with the config, then one line per trial, model update, front,
/// selection, and a final status line.
struct SessionLog {
    int version = kLogVersion;
    SessionConfig config;
    std::vector<moo::TrialRecord> records;
    std::vector<PhaseSnapshot> snapshots;
    std::optional<pareto::ParetoFront> pre_front;
    std::optional<pareto::ParetoFront> post_front;
    std::optional<pareto::Selection> selection;  // designs picked from the pre-training front
    bool completed = false;
    std::optional<PhaseFailure> failure;

    std::vector<moo::TrialRecord> phase_records(moo::Phase p) const;
};

/// Line builders shared by the whole-log writer and the incremental writer.
nlohmann::json header_line(const SessionConfig& cfg);
nlohmann::json trial_line(const moo::TrialRecord& r);
nlohmann::json model_line(const PhaseSnapshot& s);
nlohmann::json front_line(moo::Phase phase, const pareto::ParetoFront& f);
nlohmann::json selection_line(const pareto::Selection& s, const pareto::SelectionWindow& w);
nlohmann::json end_line(bool completed, const std::optional<PhaseFailure>& failure);

void persist(const SessionLog& log, const std::filesystem::path& path);
void write_log(const SessionLog& log, std::ostream& os);

/// Parses a whole log. Throws LogFormatError on unknown versions or any
/// malformed line; nothing is returned in that case.
SessionLog load(const std::filesystem::path& path);
SessionLog read_log(std::istream& is);

/// Appends lines as a live session progresses, flushing each one so a crash
/// loses at most the record being written.
class LogWriter {
public:
    LogWriter(const std::filesystem::path& path, const SessionConfig& cfg);
    void write(const nlohmann::json& line);

private:
    std::ofstream out_;
};

/// Structural checks: phase order, evaluation at assistance 0, feedback
/// present exactly where required. Returns human-readable problems.
std::vector<std::string> check_structure(const SessionLog& log);

}  // namespace hilpareto::session
