// Command-line front end: characterize, run-protocol, simulate-cohort,
// report, serve, replay.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hilpareto/common/errors.hpp"
#include "hilpareto/session/cohort.hpp"
#include "hilpareto/session/protocol.hpp"
#include "hilpareto/session/serialization.hpp"
#include "hilpareto/session/server.hpp"
#include "hilpareto/session/session_log.hpp"

namespace fs = std::filesystem;
using namespace hilpareto;
using namespace hilpareto::session;

namespace {

struct SessionArgs {
    std::string config_path;
    std::string profile_path;
    std::optional<std::uint64_t> seed;
    std::string group;
    std::string participant;
    std::string out;
};

void add_session_options(CLI::App* cmd, SessionArgs& a) {
    cmd->add_option("--config", a.config_path, "Session config JSON (missing fields take defaults)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--profile", a.profile_path, "Simulated user profile JSON (defaults to the standard profile)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", a.seed, "Master seed");
    cmd->add_option("--group", a.group, "pareto or staircase")->check(CLI::IsMember({"pareto", "staircase"}));
    cmd->add_option("--participant", a.participant, "Participant id");
    cmd->add_option("--out", a.out, "Write the session log here (.jsonl)");
}

SessionConfig read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    return nlohmann::json::parse(in).get<SessionConfig>();
}

sim::SimUserProfile read_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    return nlohmann::json::parse(in).get<sim::SimUserProfile>();
}

SessionConfig session_config(const SessionArgs& a, bool simulated) {
    SessionConfig c = a.config_path.empty() ? SessionConfig{} : read_config(a.config_path);
    if (a.seed) c.seed = *a.seed;
    if (!a.group.empty()) c.group = parse_group(a.group);
    if (!a.participant.empty()) c.participant_id = a.participant;
    if (!a.profile_path.empty()) c.sim_user = read_profile(a.profile_path);
    if (simulated && !c.sim_user) c.sim_user = sim::SimUserProfile{};
    c.validate();
    return c;
}

void print_front(const pareto::ParetoFront& f, const char* title) {
    std::printf("%s: %zu non-dominated of %zu candidates\n", title, f.front.size(), f.all_points.size());
    std::printf("  %-10s %-14s %-14s\n", "assist", "exp_score", "exp_challenge");
    for (const auto& p : f.front)
        std::printf("  %-10.3f %-14.4f %-14.4f\n", p.assistance, p.expected_score, p.expected_challenge);
}

void print_records(const SessionLog& log) {
    std::printf("%-10s %4s %7s %6s %6s %-9s %-9s\n", "phase", "n", "assist", "sobol", "best", "label", "harder");
    for (const auto& r : log.records)
        std::printf("%-10s %4d %7.3f %6s %6.3f %-9s %-9s\n", std::string(moo::to_string(r.phase)).c_str(),
                    r.iteration, r.assistance, r.sobol ? "yes" : "", r.best,
                    r.label ? std::string(gp::to_string(*r.label)).c_str() : "",
                    r.preference ? std::string(gp::to_string(*r.preference)).c_str() : "");
}

int finish(const SessionLog& log, const std::string& out) {
    if (!out.empty()) {
        if (const auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
        persist(log, out);
        std::printf("log written to %s\n", out.c_str());
    }
    if (log.failure) {
        std::fprintf(stderr, "session failed in %s at trial %d: %s\n",
                     std::string(moo::to_string(log.failure->phase)).c_str(), log.failure->iteration,
                     log.failure->message.c_str());
        return 1;
    }
    return 0;
}

// Hosts one session for a human participant and waits for it to end.
int serve_single(const SessionConfig& cfg, const ServiceOptions& opts, const std::string& out) {
    Service svc(opts);
    svc.start();
    const auto reply = svc.registry().route("POST", "/sessions", nlohmann::json{{"config", cfg}}.dump());
    if (reply.status != 201) throw ConfigError(reply.body.dump());
    const std::string id = reply.body.at("id");
    std::printf("session %s listening on http://%s:%u (participant socket /sessions/%s/ws)\n", id.c_str(),
                opts.address.c_str(), svc.port(), id.c_str());
    std::printf("POST /sessions/%s/advance to start each phase\n", id.c_str());
    std::fflush(stdout);
    const auto s = svc.registry().find(id);
    s->wait_finished();
    const SessionLog log = load(s->log_path());
    svc.stop();
    if (log.pre_front) print_front(*log.pre_front, "pre-training front");
    return finish(log, out.empty() ? s->log_path().string() : out);
}

struct ServeArgs {
    std::string address = "127.0.0.1";
    unsigned short port = 8080;
    std::string data_dir = "sessions";
    double time_scale = 1.0;
    double countdown = 3.0;
};

void add_serve_options(CLI::App* cmd, ServeArgs& a) {
    cmd->add_option("--address", a.address, "Listen address")->capture_default_str();
    cmd->add_option("--port", a.port, "Listen port (0 picks a free one)")->capture_default_str();
    cmd->add_option("--data-dir", a.data_dir, "Directory for session logs")->capture_default_str();
    cmd->add_option("--time-scale", a.time_scale, "Wall-clock seconds per simulated second (0 = unpaced)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--countdown", a.countdown, "Seconds before each attempt")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
}

ServiceOptions service_options(const ServeArgs& a) {
    ServiceOptions o;
    o.address = a.address;
    o.port = a.port;
    o.data_dir = a.data_dir;
    o.live.time_scale = a.time_scale;
    o.live.countdown = a.countdown;
    o.handle_signals = true;
    return o;
}

std::vector<SessionLog> load_logs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& e : fs::directory_iterator(in))
                if (e.path().extension() == ".jsonl") files.push_back(e.path());
        } else {
            files.emplace_back(in);
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<SessionLog> logs;
    for (const auto& f : files) {
        try {
            logs.push_back(load(f));
        } catch (const LogFormatError& e) {
            throw LogFormatError(f.string() + ": " + e.what());
        }
    }
    return logs;
}

void print_windows(const std::vector<SessionLog>& logs) {
    std::vector<pareto::ParetoFront> fronts;
    for (const auto& l : logs)
        if (l.pre_front) fronts.push_back(*l.pre_front);
    if (fronts.empty()) return;
    const auto windows = standard_windows();
    std::printf("threshold windows over %zu pre-training fronts\n", fronts.size());
    std::printf("  %-8s %-10s %-10s %-9s %-9s\n", "window", "mean", "std", "selected", "fallback");
    for (const auto& r : window_analysis(fronts, windows))
        std::printf("  %-8s %-10.4f %-10.4f %-9zu %-9zu\n", r.label.c_str(), r.summary.mean_assistance,
                    r.summary.std_assistance, r.summary.n_selected, r.summary.n_fallback);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-in-the-loop Pareto characterization of assistance levels"};
    app.require_subcommand(1);

    SessionArgs ch;
    bool live = false;
    ServeArgs ch_serve;
    auto* characterize = app.add_subcommand("characterize", "One HiL characterization phase");
    add_session_options(characterize, ch);
    characterize->add_flag("--live", live, "Serve the phase to a human participant instead of the simulated user");
    add_serve_options(characterize, ch_serve);

    SessionArgs rp;
    auto* run_protocol_cmd = app.add_subcommand("run-protocol", "All six phases against the simulated user");
    add_session_options(run_protocol_cmd, rp);
    bool quiet = false;
    run_protocol_cmd->add_flag("--quiet", quiet, "Do not print the trial table");

    int cohort_n = 17;
    std::uint64_t cohort_seed = 1;
    std::uint64_t cohort_base_seed = 1;
    int jobs = 1;
    std::string cohort_profiles, cohort_config, cohort_out;
    int cohort_b = 5000;
    bool characterize_only = false;
    auto* cohort = app.add_subcommand("simulate-cohort", "Simulated participants in both groups");
    cohort->add_option("-n,--participants", cohort_n, "Number of generated profiles")->capture_default_str();
    cohort->add_option("--cohort-seed", cohort_seed, "Seed for generating profiles")->capture_default_str();
    cohort->add_option("--seed", cohort_base_seed, "Master seed of the sessions")->capture_default_str();
    cohort->add_option("--profiles", cohort_profiles, "Profile list JSON instead of generated profiles")
        ->check(CLI::ExistingFile);
    cohort->add_option("--config", cohort_config, "Base session config JSON")->check(CLI::ExistingFile);
    cohort->add_option("-j,--jobs", jobs, "Worker threads")->capture_default_str();
    cohort->add_option("--out-dir", cohort_out, "Write logs and report tables here");
    cohort->add_option("-B,--replicates", cohort_b, "Bootstrap replicates")->capture_default_str();
    cohort->add_flag("--characterize-only", characterize_only, "Only the pre-training characterization");

    std::vector<std::string> report_inputs;
    std::string report_out = "report";
    int report_b = 5000;
    double report_conf = 0.95;
    std::uint64_t report_seed = 1;
    auto* report = app.add_subcommand("report", "Analysis tables from session logs");
    report->add_option("logs", report_inputs, "Log files or directories")->required();
    report->add_option("--out-dir", report_out, "Output directory")->capture_default_str();
    report->add_option("-B,--replicates", report_b, "Bootstrap replicates")->capture_default_str();
    report->add_option("--confidence", report_conf, "Interval level")->check(CLI::Range(0.5, 0.9999))->capture_default_str();
    report->add_option("--seed", report_seed, "Bootstrap seed")->capture_default_str();

    ServeArgs sv;
    auto* serve = app.add_subcommand("serve", "HTTP/WebSocket backend for the web UI");
    add_serve_options(serve, sv);

    std::vector<std::string> replay_inputs;
    auto* replay_cmd = app.add_subcommand("replay", "Verify session logs");
    replay_cmd->add_option("logs", replay_inputs, "Log files or directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;  // --help exits 0
    }

    try {
        if (*characterize) {
            SessionConfig c = session_config(ch, !live);
            c.characterize_only = true;
            if (live) {
                c.sim_user.reset();
                return serve_single(c, service_options(ch_serve), ch.out);
            }
            sim::SimulatedUser user(*c.sim_user, c.plant, c.disturbance);
            const SessionLog log = run_protocol(user, c);
            print_records(log);
            if (log.pre_front) print_front(*log.pre_front, "front");
            return finish(log, ch.out);
        }
        if (*run_protocol_cmd) {
            const SessionConfig c = session_config(rp, true);
            sim::SimulatedUser user(*c.sim_user, c.plant, c.disturbance);
            const SessionLog log = run_protocol(user, c);
            if (!quiet) print_records(log);
            if (log.selection) {
                std::printf("selected designs:");
                for (double a : log.selection->assistance) std::printf(" %.3f", a);
                std::printf("%s\n", log.selection->fallback ? " (fallback)" : "");
            }
            return finish(log, rp.out);
        }
        if (*cohort) {
            SessionConfig base = cohort_config.empty() ? SessionConfig{} : read_config(cohort_config);
            base.seed = cohort_base_seed;
            base.characterize_only = base.characterize_only || characterize_only;
            const auto profiles =
                cohort_profiles.empty() ? default_cohort(cohort_n, cohort_seed) : sim::load_profiles(cohort_profiles);
            const auto logs = simulate_cohort(profiles, base, jobs);
            int failed = 0;
            for (const auto& l : logs) failed += !l.completed;
            std::printf("%zu participants simulated, %d failed\n", logs.size(), failed);
            print_windows(logs);
            if (!characterize_only) {
                std::printf("  %-6s %-10s %-11s %-11s %-9s %-9s\n", "id", "group", "prospective", "trained",
                            "pre_eval", "post_eval");
                for (const auto& r : prospective_table(logs))
                    std::printf("  %-6s %-10s %-11.3f %-11.3f %-9.3f %-9.3f\n", r.participant.c_str(),
                                std::string(to_string(r.group)).c_str(), r.prospective_mean, r.trained_mean,
                                r.pre_eval, r.post_eval);
            }
            if (!cohort_out.empty()) {
                const fs::path dir(cohort_out);
                fs::create_directories(dir / "logs");
                for (const auto& l : logs) persist(l, dir / "logs" / (l.config.participant_id + ".jsonl"));
                write_report(logs, dir, cohort_b, 0.95, cohort_base_seed);
                std::printf("logs and tables written to %s\n", dir.c_str());
            }
            return failed ? 1 : 0;
        }
        if (*report) {
            const auto logs = load_logs(report_inputs);
            if (logs.empty()) throw ConfigError("no session logs found");
            write_report(logs, report_out, report_b, report_conf, report_seed);
            print_windows(logs);
            std::printf("%zu logs; tables written to %s\n", logs.size(), report_out.c_str());
            return 0;
        }
        if (*serve) {
            Service svc(service_options(sv));
            svc.start();
            std::printf("serving on http://%s:%u, logs in %s\n", sv.address.c_str(), svc.port(),
                        sv.data_dir.c_str());
            std::fflush(stdout);
            svc.wait();
            svc.stop();
            return 0;
        }
        if (*replay_cmd) {
            const auto logs = load_logs(replay_inputs);
            if (logs.empty()) throw ConfigError("no session logs found");
            int bad = 0;
            for (const auto& log : logs) {
                std::vector<std::string> problems = check_structure(log);
                const ReplayReport sampler = verify_sampler(log);
                problems.insert(problems.end(), sampler.mismatches.begin(), sampler.mismatches.end());
                const bool simulated = log.config.sim_user.has_value();
                if (simulated) {
                    const ReplayReport r = replay(log);
                    problems.insert(problems.end(), r.mismatches.begin(), r.mismatches.end());
                }
                std::printf("%-8s %-4s %zu records, %s\n", log.config.participant_id.c_str(),
                            problems.empty() ? "OK" : "FAIL", log.records.size(),
                            simulated ? "replayed against the simulated user" : "structure and sampler checked");
                for (const auto& p : problems) std::printf("    %s\n", p.c_str());
                bad += !problems.empty();
            }
            return bad ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
