#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "hilpareto/common/errors.hpp"
#include "hilpareto/session/cohort.hpp"
#include "hilpareto/session/protocol.hpp"
#include "hilpareto/session/serialization.hpp"
#include "hilpareto/session/session_log.hpp"

using namespace hilpareto;
using namespace hilpareto::session;
using moo::Phase;

namespace {

SessionConfig sim_config(Group g, std::uint64_t seed) {
    SessionConfig c;
    c.group = g;
    c.seed = seed;
    c.sim_user = sim::SimUserProfile{};
    return c;
}

SessionLog run_sim(const SessionConfig& c) {
    sim::SimulatedUser user(*c.sim_user, c.plant, c.disturbance);
    return run_protocol(user, c);
}

std::string dump(const SessionLog& log) {
    std::ostringstream os;
    write_log(log, os);
    return os.str();
}

std::filesystem::path tmp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

class FlakyUser : public moo::UserPort {
public:
    explicit FlakyUser(int fail_on_play) : fail_(fail_on_play), inner_(sim::SimUserProfile{}) {}
    task::BestOfThree play(double a, std::span<const std::uint64_t, 3> s) override {
        if (++plays_ == fail_) throw std::runtime_error("connection lost");
        return inner_.play(a, s);
    }
    gp::OrdinalLabel rate(double a, std::uint64_t s) override { return inner_.rate(a, s); }
    gp::Preference compare(double p, double c, std::uint64_t s) override { return inner_.compare(p, c, s); }
    bool simulated() const override { return true; }

private:
    int fail_;
    int plays_ = 0;
    sim::SimulatedUser inner_;
};

// Live-style user: not simulated, so the warm-up is played.
class LiveLikeUser : public sim::SimulatedUser {
public:
    using sim::SimulatedUser::SimulatedUser;
    bool simulated() const override { return false; }
};

}  // namespace

TEST_CASE("pareto group protocol has the expected structure") {
    const SessionLog log = run_sim(sim_config(Group::pareto, 3));
    REQUIRE(log.completed);
    CHECK(!log.failure);
    std::map<Phase, int> count;
    for (const auto& r : log.records) ++count[r.phase];
    CHECK(count[Phase::warmup] == 0);
    CHECK(count[Phase::pre_eval] == 3);
    CHECK(count[Phase::pre_hil] == 10);
    CHECK(count[Phase::training] == 20);
    CHECK(count[Phase::post_eval] == 3);
    CHECK(count[Phase::post_hil] == 10);
    CHECK(log.records.size() == 46);
    CHECK(check_structure(log).empty());
    for (Phase p : {Phase::pre_hil, Phase::post_hil}) {
        int prefs = 0;
        for (const auto& r : log.phase_records(p)) prefs += r.preference.has_value();
        CHECK(prefs == 9);
    }
    REQUIRE(log.selection);
    REQUIRE(log.pre_front);
    REQUIRE(log.post_front);
    CHECK(log.snapshots.size() == 20);
    for (const auto& r : log.phase_records(Phase::training))
        CHECK(std::find(log.selection->assistance.begin(), log.selection->assistance.end(), r.assistance) !=
              log.selection->assistance.end());
    for (Phase p : {Phase::pre_eval, Phase::post_eval})
        for (const auto& r : log.phase_records(p)) CHECK(r.assistance == 0.0);
}

TEST_CASE("staircase group follows the staircase given its own outcomes") {
    const SessionConfig c = sim_config(Group::staircase, 4);
    const SessionLog log = run_sim(c);
    REQUIRE(log.completed);
    const auto tr = log.phase_records(Phase::training);
    REQUIRE(tr.size() == 20);
    CHECK(tr.front().assistance == 0.5);
    int tenths = 5, run = 0;
    for (const auto& r : tr) {
        CHECK(r.assistance == tenths / 10.0);
        CHECK(r.assistance >= 0.0);
        CHECK(r.assistance <= 1.0);
        if (r.best < c.success_threshold) {
            tenths = std::min(10, tenths + 1);
            run = 0;
        } else if (++run == 2) {
            tenths = std::max(0, tenths - 1);
            run = 0;
        }
    }
}

TEST_CASE("live users play the warm-up first") {
    SessionConfig c = sim_config(Group::pareto, 8);
    c.training_trials = 2;
    LiveLikeUser user(*c.sim_user);
    const SessionLog log = run_protocol(user, c);
    REQUIRE(log.completed);
    const auto w = log.phase_records(Phase::warmup);
    REQUIRE(w.size() == 2);
    CHECK(w[0].assistance == 0.5);
    CHECK(log.records.front().phase == Phase::warmup);
    CHECK(check_structure(log).empty());
}

TEST_CASE("pareto training schedule") {
    const std::vector<double> five{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto s = pareto_schedule(five, 12, 9);
    REQUIRE(s.size() == 12);
    std::map<double, int> uses;
    for (double x : s) ++uses[x];
    for (double x : five) {
        CHECK(uses[x] >= 2);
        CHECK(uses[x] <= 3);
    }
    // Each block of five is a permutation of the designs.
    for (int b = 0; b < 2; ++b) {
        std::vector<double> block(s.begin() + 5 * b, s.begin() + 5 * b + 5);
        std::sort(block.begin(), block.end());
        CHECK(block == five);
    }
    CHECK(pareto_schedule(five, 12, 9) == s);
    CHECK(pareto_schedule(five, 12, 10) != s);
    const std::vector<double> one{0.35};
    for (double x : pareto_schedule(one, 7, 1)) CHECK(x == 0.35);
    CHECK_THROWS(pareto_schedule(std::vector<double>{}, 3, 1));
}

TEST_CASE("prospective assistance") {
    std::vector<pareto::ObjectivePoint> pts;
    for (int i = 0; i <= 10; ++i) pts.push_back({i / 10.0, i / 10.0, 1.0 - i / 10.0});
    const pareto::ParetoFront f = pareto::make_front(pts);
    const Prospective p = prospective_assistance(f, pareto::SelectionWindow::both(0.4, 0.8));
    REQUIRE(p.selection.assistance.size() == 3);
    CHECK(p.mean == doctest::Approx(0.5));
    CHECK(p.std == doctest::Approx(std::sqrt(0.02 / 3.0)));
    const Prospective wide = prospective_assistance(f, pareto::SelectionWindow::both(0.2, 0.9));
    for (double x : p.selection.assistance)
        CHECK(std::find(wide.selection.assistance.begin(), wide.selection.assistance.end(), x) !=
              wide.selection.assistance.end());
    CHECK(wide.selection.assistance.size() >= p.selection.assistance.size());
}

TEST_CASE("prospective assistance of a high-skill cohort stays below the staircase levels") {
    auto profiles = default_cohort(8, 5);
    for (auto& p : profiles) p.skill = 0.45;
    SessionConfig base;
    base.seed = 11;
    auto logs = simulate_cohort(profiles, base, 2);
    double prospective = 0.0, staircase = 0.0;
    int n = 0;
    for (const auto& r : prospective_table(logs))
        if (r.group == Group::staircase) {
            prospective += r.prospective_mean;
            staircase += r.trained_mean;
            ++n;
        }
    REQUIRE(n == 4);
    MESSAGE("prospective " << prospective / n << " staircase " << staircase / n);
    CHECK(prospective < staircase);
}

TEST_CASE("cohort results do not depend on the worker count") {
    const auto profiles = default_cohort(4, 2);
    SessionConfig base;
    base.training_trials = 4;
    const auto a = simulate_cohort(profiles, base, 1);
    const auto b = simulate_cohort(profiles, base, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].records.size() == b[i].records.size());
        for (std::size_t k = 0; k < a[i].records.size(); ++k) CHECK(moo::same_outcome(a[i].records[k], b[i].records[k]));
    }
    CHECK(a[0].config.group == Group::pareto);
    CHECK(a[1].config.group == Group::staircase);
}

TEST_CASE("session logs round-trip through the file format") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const SessionLog log = run_sim(sim_config(seed % 2 ? Group::pareto : Group::staircase, seed));
        const auto path = tmp("hp_session_rt_" + std::to_string(seed) + ".jsonl");
        persist(log, path);
        const SessionLog back = load(path);
        CHECK(dump(back) == dump(log));
        REQUIRE(back.records.size() == log.records.size());
        for (std::size_t i = 0; i < log.records.size(); ++i) {
            CHECK(moo::same_outcome(back.records[i], log.records[i]));
            CHECK(back.records[i].started_at == log.records[i].started_at);
        }
        CHECK(back.snapshots.size() == log.snapshots.size());
        CHECK(back.snapshots.back().snapshot.curves.score_mean == log.snapshots.back().snapshot.curves.score_mean);
        CHECK(back.config.sim_user->skill == log.config.sim_user->skill);
        CHECK(back.completed);
    }
}

TEST_CASE("config JSON round trip keeps every field") {
    SessionConfig c = sim_config(Group::staircase, 77);
    c.participant_id = "P12";
    c.training_trials = 15;
    c.window = pareto::SelectionWindow{0.3, 0.7, 0.5, 0.9};
    c.characterization.acq.lambda_num = 3.0;
    c.plant.k_max = 150.0;
    c.disturbance.intensity = 2.0;
    const nlohmann::json j = c;
    const SessionConfig d = j.get<SessionConfig>();
    CHECK(nlohmann::json(d) == j);
    CHECK(d.group == Group::staircase);
    CHECK(d.window.chall_hi == 0.9);
    CHECK(d.plant.k_max == 150.0);
    const SessionConfig defaults = nlohmann::json::object().get<SessionConfig>();
    CHECK(defaults.training_trials == 20);
    CHECK(defaults.eval_trials == 3);
    CHECK(!defaults.sim_user);
}

TEST_CASE("corrupt or foreign logs are rejected") {
    const SessionLog log = run_sim(sim_config(Group::pareto, 5));
    const std::string text = dump(log);

    auto rejects = [](const std::string& body) {
        std::istringstream is(body);
        CHECK_THROWS_AS(read_log(is), LogFormatError);
    };
    rejects("");
    rejects("not json\n");
    rejects(text.substr(0, text.size() / 2));  // cut mid-line
    std::string bumped = text;
    bumped.replace(bumped.find("\"version\":1"), 11, "\"version\":2");
    rejects(bumped);
    std::string bad_phase = text;
    bad_phase.replace(bad_phase.find("\"pre_eval\""), 10, "\"pre_evil\"");
    rejects(bad_phase);
    std::string bad_best = text;
    const auto pos = bad_best.find("\"best\":");
    bad_best.replace(pos, 7, "\"best\":7");
    rejects(bad_best);
    rejects(text.substr(text.find('\n') + 1));  // header missing

    std::istringstream is(bumped);
    try {
        read_log(is);
    } catch (const LogFormatError& e) {
        CHECK(std::string(e.what()).find("version 2") != std::string::npos);
    }
    CHECK_THROWS_AS(load(tmp("hp_session_missing_file.jsonl")), LogFormatError);
}

TEST_CASE("replay reproduces simulated sessions and catches tampering") {
    for (Group g : {Group::pareto, Group::staircase}) {
        const SessionLog log = run_sim(sim_config(g, 21));
        const auto path = tmp("hp_session_replay.jsonl");
        persist(log, path);
        const SessionLog loaded = load(path);
        const ReplayReport r = replay(loaded);
        CHECK(r.identical);
        CHECK(r.mismatches.empty());
        CHECK(verify_sampler(loaded).identical);

        SessionLog tampered = loaded;
        tampered.records[15].attempts[0] = 0.123;
        CHECK(!replay(tampered).identical);

        SessionLog moved = loaded;
        for (auto& rec : moved.records)
            if (rec.phase == Phase::pre_hil && rec.iteration == 6) rec.assistance = std::min(1.0, rec.assistance + 0.005);
        CHECK(!verify_sampler(moved).identical);
    }
    SessionLog human;
    CHECK(!replay(human).identical);
}

TEST_CASE("a failure mid-session leaves a persistable partial log") {
    SessionConfig c = sim_config(Group::pareto, 6);
    FlakyUser user(3 + 4);  // fourth trial of the pre-training characterization
    const SessionLog log = run_protocol(user, c);
    CHECK(!log.completed);
    REQUIRE(log.failure);
    CHECK(log.failure->phase == Phase::pre_hil);
    CHECK(log.failure->iteration == 4);
    CHECK(log.failure->message == "connection lost");
    CHECK(log.records.size() == 6);
    const auto path = tmp("hp_session_partial.jsonl");
    persist(log, path);
    const SessionLog back = load(path);
    CHECK(!back.completed);
    REQUIRE(back.failure);
    CHECK(back.failure->iteration == 4);
    CHECK(check_structure(back).empty());

    FlakyUser in_training(3 + 10 + 5);
    const SessionLog t = run_protocol(in_training, c);
    REQUIRE(t.failure);
    CHECK(t.failure->phase == Phase::training);
    CHECK(t.failure->iteration == 5);
}

TEST_CASE("incremental writer produces a loadable log as the session runs") {
    SessionConfig c = sim_config(Group::pareto, 13);
    const auto path = tmp("hp_session_live.jsonl");
    SessionLog log;
    {
        LogWriter writer(path, c);
        int seen = 0;
        ProtocolObserver chained;
        chained.on_record = [&](const moo::TrialRecord&) { ++seen; };
        sim::SimulatedUser user(*c.sim_user);
        log = run_protocol(user, c, writer_observer(writer, c, chained));
        CHECK(seen == 46);
        writer.write(end_line(log.completed, log.failure));
    }
    const SessionLog back = load(path);
    CHECK(back.completed);
    REQUIRE(back.records.size() == log.records.size());
    for (std::size_t i = 0; i < log.records.size(); ++i) CHECK(moo::same_outcome(back.records[i], log.records[i]));
    CHECK(back.snapshots.size() == log.snapshots.size());
    REQUIRE(back.selection);
    CHECK(back.selection->assistance == log.selection->assistance);
    CHECK(replay(back).identical);
}

TEST_CASE("report tables are written") {
    const auto profiles = default_cohort(4, 3);
    SessionConfig base;
    base.training_trials = 4;
    const auto logs = simulate_cohort(profiles, base);
    const auto dir = tmp("hp_report_test");
    std::filesystem::remove_all(dir);
    write_report(logs, dir, 200);
    for (const char* f : {"fronts.csv", "windows.csv", "change_ci.csv", "participants.csv"}) {
        std::ifstream in(dir / f);
        REQUIRE(in);
        std::string header, row;
        std::getline(in, header);
        CHECK(!header.empty());
        CHECK(std::getline(in, row));
    }
}
