#include "hilpareto/session/session_log.hpp"

#include <sstream>

#include "hilpareto/common/errors.hpp"
#include "hilpareto/session/serialization.hpp"

using nlohmann::json;

namespace hilpareto::session {

std::string_view to_string(Group g) { return g == Group::pareto ? "pareto" : "staircase"; }

Group parse_group(std::string_view s) {
    if (s == "pareto") return Group::pareto;
    if (s == "staircase") return Group::staircase;
    throw ConfigError("unknown group: " + std::string(s));
}

void SessionConfig::validate() const {
    if (participant_id.empty()) throw ConfigError("session: participant id must not be empty");
    characterization.validate();
    if (training_trials < 0 || eval_trials < 0 || warmup_trials < 0)
        throw ConfigError("session: trial counts must be >= 0");
    if (!(warmup_assistance >= 0.0 && warmup_assistance <= 1.0))
        throw ConfigError("session: warm-up assistance must lie in [0, 1]");
    if (!(staircase_start >= 0.0 && staircase_start <= 1.0))
        throw ConfigError("session: staircase start must lie in [0, 1]");
    if (!(success_threshold > 0.0 && success_threshold <= 1.0))
        throw ConfigError("session: success threshold must lie in (0, 1]");
    window.validate();
    plant.validate();
    disturbance.validate();
    if (sim_user) sim_user->validate();
}

void to_json(json& j, const SessionConfig& c) {
    j = json{{"participant_id", c.participant_id},
             {"group", std::string(to_string(c.group))},
             {"characterization", c.characterization},
             {"training_trials", c.training_trials},
             {"eval_trials", c.eval_trials},
             {"warmup_trials", c.warmup_trials},
             {"warmup_assistance", c.warmup_assistance},
             {"window", c.window},
             {"staircase_start", c.staircase_start},
             {"success_threshold", c.success_threshold},
             {"plant", c.plant},
             {"disturbance", c.disturbance},
             {"seed", c.seed},
             {"characterize_only", c.characterize_only}};
    j["sim_user"] = c.sim_user ? json(*c.sim_user) : json(nullptr);
}

void from_json(const json& j, SessionConfig& c) {
    auto read = [&](const char* key, auto& out) {
        if (j.contains(key)) j.at(key).get_to(out);
    };
    read("participant_id", c.participant_id);
    if (j.contains("group")) c.group = parse_group(j.at("group").get<std::string>());
    read("characterization", c.characterization);
    read("training_trials", c.training_trials);
    read("eval_trials", c.eval_trials);
    read("warmup_trials", c.warmup_trials);
    read("warmup_assistance", c.warmup_assistance);
    read("window", c.window);
    read("staircase_start", c.staircase_start);
    read("success_threshold", c.success_threshold);
    read("plant", c.plant);
    read("disturbance", c.disturbance);
    read("seed", c.seed);
    read("characterize_only", c.characterize_only);
    c.sim_user.reset();
    if (j.contains("sim_user") && !j.at("sim_user").is_null()) c.sim_user = j.at("sim_user").get<sim::SimUserProfile>();
}

std::vector<moo::TrialRecord> SessionLog::phase_records(moo::Phase p) const {
    std::vector<moo::TrialRecord> out;
    for (const auto& r : records)
        if (r.phase == p) out.push_back(r);
    return out;
}

json header_line(const SessionConfig& cfg) {
    return json{{"type", "header"}, {"format", kLogFormat}, {"version", kLogVersion}, {"config", cfg}};
}

json trial_line(const moo::TrialRecord& r) { return json{{"type", "trial"}, {"record", r}}; }

json model_line(const PhaseSnapshot& s) {
    return json{{"type", "model"}, {"phase", std::string(moo::to_string(s.phase))}, {"snapshot", s.snapshot}};
}

json front_line(moo::Phase phase, const pareto::ParetoFront& f) {
    return json{{"type", "front"}, {"phase", std::string(moo::to_string(phase))}, {"front", f}};
}

json selection_line(const pareto::Selection& s, const pareto::SelectionWindow& w) {
    return json{{"type", "selection"}, {"assistance", s.assistance}, {"fallback", s.fallback}, {"window", w}};
}

json end_line(bool completed, const std::optional<PhaseFailure>& failure) {
    json j{{"type", "end"}, {"completed", completed}};
    if (failure)
        j["failure"] = json{{"phase", std::string(moo::to_string(failure->phase))},
                            {"iteration", failure->iteration},
                            {"message", failure->message}};
    else
        j["failure"] = nullptr;
    return j;
}

void write_log(const SessionLog& log, std::ostream& os) {
    os << header_line(log.config).dump() << '\n';
    for (const auto& r : log.records) os << trial_line(r).dump() << '\n';
    for (const auto& s : log.snapshots) os << model_line(s).dump() << '\n';
    if (log.pre_front) os << front_line(moo::Phase::pre_hil, *log.pre_front).dump() << '\n';
    if (log.selection) os << selection_line(*log.selection, log.config.window).dump() << '\n';
    if (log.post_front) os << front_line(moo::Phase::post_hil, *log.post_front).dump() << '\n';
    os << end_line(log.completed, log.failure).dump() << '\n';
}

void persist(const SessionLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw LogFormatError("cannot write session log: " + path.string());
    write_log(log, out);
    if (!out) throw LogFormatError("error while writing session log: " + path.string());
}

namespace {

moo::Phase phase_field(const json& j) {
    const auto p = moo::parse_phase(j.at("phase").get<std::string>());
    if (!p) throw LogFormatError("unknown phase: " + j.at("phase").get<std::string>());
    return *p;
}

}  // namespace

SessionLog read_log(std::istream& is) {
    SessionLog log;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    try {
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            const json j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (!have_header) {
                if (type != "header") throw LogFormatError("first line must be the header");
                if (j.value("format", std::string()) != kLogFormat) throw LogFormatError("not a session log");
                const int version = j.at("version").get<int>();
                if (version != kLogVersion)
                    throw LogFormatError("unsupported session log version " + std::to_string(version) +
                                         " (this build reads version " + std::to_string(kLogVersion) + ")");
                log.version = version;
                log.config = j.at("config").get<SessionConfig>();
                have_header = true;
            } else if (type == "trial") {
                log.records.push_back(j.at("record").get<moo::TrialRecord>());
            } else if (type == "model") {
                log.snapshots.push_back({phase_field(j), j.at("snapshot").get<moo::ModelSnapshot>()});
            } else if (type == "front") {
                const moo::Phase p = phase_field(j);
                auto f = j.at("front").get<pareto::ParetoFront>();
                if (p == moo::Phase::pre_hil)
                    log.pre_front = std::move(f);
                else if (p == moo::Phase::post_hil)
                    log.post_front = std::move(f);
                else
                    throw LogFormatError("front line for a non-HiL phase");
            } else if (type == "selection") {
                pareto::Selection s;
                j.at("assistance").get_to(s.assistance);
                j.at("fallback").get_to(s.fallback);
                log.selection = std::move(s);
            } else if (type == "end") {
                log.completed = j.at("completed").get<bool>();
                if (j.contains("failure") && !j.at("failure").is_null()) {
                    const json& f = j.at("failure");
                    log.failure = PhaseFailure{phase_field(f), f.at("iteration").get<int>(),
                                               f.at("message").get<std::string>()};
                }
            } else if (type == "header") {
                throw LogFormatError("duplicate header");
            } else {
                throw LogFormatError("unknown line type: " + type);
            }
        }
    } catch (const LogFormatError& e) {
        throw LogFormatError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const json::exception& e) {
        throw LogFormatError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
        throw LogFormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!have_header) throw LogFormatError("empty session log");
    return log;
}

SessionLog load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LogFormatError("cannot open session log: " + path.string());
    return read_log(in);
}

LogWriter::LogWriter(const std::filesystem::path& path, const SessionConfig& cfg) : out_(path, std::ios::trunc) {
    if (!out_) throw LogFormatError("cannot write session log: " + path.string());
    write(header_line(cfg));
}

void LogWriter::write(const json& line) {
    out_ << line.dump() << '\n';
    out_.flush();
}

std::vector<std::string> check_structure(const SessionLog& log) {
    std::vector<std::string> problems;
    const moo::Phase order[] = {moo::Phase::warmup,   moo::Phase::pre_eval,  moo::Phase::pre_hil,
                                moo::Phase::training, moo::Phase::post_eval, moo::Phase::post_hil};
    auto rank = [&](moo::Phase p) {
        for (int i = 0; i < 6; ++i)
            if (order[i] == p) return i;
        return -1;
    };
    int last_rank = -1;
    int expected_iter = 1;
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const auto& r = log.records[i];
        const std::string where = "record " + std::to_string(i + 1) + " (" + std::string(moo::to_string(r.phase)) +
                                  " #" + std::to_string(r.iteration) + ")";
        const int rk = rank(r.phase);
        if (rk < last_rank) problems.push_back(where + ": phase out of order");
        if (rk != last_rank) expected_iter = 1;
        last_rank = rk;
        if (r.iteration != expected_iter) problems.push_back(where + ": iteration out of sequence");
        ++expected_iter;
        if ((r.phase == moo::Phase::pre_eval || r.phase == moo::Phase::post_eval) && r.assistance != 0.0)
            problems.push_back(where + ": evaluation trial with non-zero assistance");
        if (!(r.assistance >= 0.0 && r.assistance <= 1.0)) problems.push_back(where + ": assistance outside [0, 1]");
        if (r.attempts[static_cast<std::size_t>(r.best_index)] != r.best)
            problems.push_back(where + ": best score does not match attempts");
        for (double a : r.attempts)
            if (a > r.best) problems.push_back(where + ": best score is not the maximum");
        const bool hil = moo::is_hil(r.phase);
        if (hil != r.label.has_value()) problems.push_back(where + ": ordinal label presence is wrong");
        if ((hil && r.iteration >= 2) != r.preference.has_value())
            problems.push_back(where + ": pairwise preference presence is wrong");
    }
    return problems;
}

}  // namespace hilpareto::session
