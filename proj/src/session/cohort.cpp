#include "hilpareto/session/cohort.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "hilpareto/common/errors.hpp"
#include "hilpareto/common/random.hpp"
#include "hilpareto/session/protocol.hpp"

namespace hilpareto::session {

namespace {

SessionConfig participant_config(const SessionConfig& base, const sim::SimUserProfile& prof, std::size_t i) {
    SessionConfig c = base;
    c.participant_id = prof.id;
    c.sim_user = prof;
    c.group = i % 2 == 0 ? Group::pareto : Group::staircase;
    c.seed = derive_seed(base.seed, {static_cast<std::uint64_t>(i)});
    return c;
}

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::string pct_label(const pareto::SelectionWindow& w) {
    char buf[64];
    if (w.perf_lo == w.chall_lo && w.perf_hi == w.chall_hi)
        std::snprintf(buf, sizeof buf, "%g-%g", w.perf_lo * 100, w.perf_hi * 100);
    else
        std::snprintf(buf, sizeof buf, "%g-%g/%g-%g", w.perf_lo * 100, w.perf_hi * 100, w.chall_lo * 100,
                      w.chall_hi * 100);
    return buf;
}

}  // namespace

std::vector<sim::SimUserProfile> default_cohort(int n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("cohort size must be >= 1");
    std::vector<sim::SimUserProfile> out;
    Rng rng(derive_seed(seed, {0xC0}));
    for (int i = 0; i < n; ++i) {
        sim::SimUserProfile p;
        char id[32];
        std::snprintf(id, sizeof id, "S%02d", i + 1);
        p.id = id;
        p.skill = 0.28 + 0.17 * uniform01(rng);
        p.noise_growth = 0.2 + 0.2 * uniform01(rng);
        p.challenge.intercept = 2.0 + 1.0 * uniform01(rng);
        p.challenge.slope = -4.0 - 2.0 * uniform01(rng);
        p.seed = derive_seed(seed, {0xC1, static_cast<std::uint64_t>(i)});
        out.push_back(p);
    }
    return out;
}

std::vector<SessionLog> simulate_cohort(std::span<const sim::SimUserProfile> profiles, const SessionConfig& base,
                                        int jobs) {
    std::vector<SessionLog> logs(profiles.size());
    parallel_for(profiles.size(), jobs, [&](std::size_t i) {
        const SessionConfig c = participant_config(base, profiles[i], i);
        sim::SimulatedUser user(profiles[i], c.plant, c.disturbance);
        logs[i] = run_protocol(user, c);
    });
    return logs;
}

std::vector<pareto::ParetoFront> characterize_cohort(std::span<const sim::SimUserProfile> profiles,
                                                     const SessionConfig& base, int jobs) {
    std::vector<pareto::ParetoFront> fronts(profiles.size());
    parallel_for(profiles.size(), jobs, [&](std::size_t i) {
        const SessionConfig c = participant_config(base, profiles[i], i);
        sim::SimulatedUser user(profiles[i], c.plant, c.disturbance);
        auto res = moo::run_characterization(user, hil_config(c, moo::Phase::pre_hil), moo::Phase::pre_hil);
        if (!res.completed) throw std::runtime_error("characterization of " + profiles[i].id + " failed: " + res.error);
        fronts[i] = std::move(*res.front);
    });
    return fronts;
}

pareto::ModelCurves final_curves(const SessionLog& log, moo::Phase phase) {
    for (auto it = log.snapshots.rbegin(); it != log.snapshots.rend(); ++it)
        if (it->phase == phase) return it->snapshot.curves;
    throw LogFormatError("session " + log.config.participant_id + " has no model for phase " +
                         std::string(moo::to_string(phase)));
}

std::vector<pareto::SelectionWindow> standard_windows() {
    return {pareto::SelectionWindow::both(0.3, 0.7), pareto::SelectionWindow::both(0.4, 0.8),
            pareto::SelectionWindow::both(0.5, 0.9)};
}

std::vector<WindowRow> window_analysis(std::span<const pareto::ParetoFront> fronts,
                                       std::span<const pareto::SelectionWindow> windows) {
    std::vector<WindowRow> rows;
    for (const auto& w : windows) rows.push_back({pct_label(w), pareto::summarize_window(fronts, w)});
    return rows;
}

std::vector<GroupChange> group_changes(std::span<const SessionLog> logs, int replicates, double confidence,
                                       std::uint64_t seed) {
    std::vector<GroupChange> out;
    for (Group g : {Group::pareto, Group::staircase}) {
        std::vector<pareto::ModelCurves> pre, post;
        for (const auto& log : logs) {
            if (log.config.group != g || !log.completed) continue;
            pre.push_back(final_curves(log, moo::Phase::pre_hil));
            post.push_back(final_curves(log, moo::Phase::post_hil));
        }
        if (pre.empty()) continue;
        out.push_back({g, pareto::bootstrap_change_ci(pre, post, replicates, confidence,
                                                      derive_seed(seed, {static_cast<std::uint64_t>(g)}))});
    }
    return out;
}

std::vector<ProspectiveRow> prospective_table(std::span<const SessionLog> logs) {
    std::vector<ProspectiveRow> rows;
    for (const auto& log : logs) {
        ProspectiveRow r;
        r.participant = log.config.participant_id;
        r.group = log.config.group;
        if (log.pre_front) {
            const Prospective p = prospective_assistance(*log.pre_front, log.config.window);
            r.prospective_mean = p.mean;
            r.prospective_std = p.std;
            r.designs = p.selection.assistance.size();
        }
        std::vector<double> trained, pre_eval, post_eval;
        for (const auto& rec : log.records) {
            if (rec.phase == moo::Phase::training) trained.push_back(rec.assistance);
            if (rec.phase == moo::Phase::pre_eval) pre_eval.push_back(rec.best);
            if (rec.phase == moo::Phase::post_eval) post_eval.push_back(rec.best);
        }
        r.trained_mean = mean_of(trained);
        r.pre_eval = mean_of(pre_eval);
        r.post_eval = mean_of(post_eval);
        rows.push_back(r);
    }
    return rows;
}

void write_window_table(std::ostream& os, std::span<const WindowRow> rows) {
    os << "window,mean_assistance,std_assistance,n_selected,n_fallback\n";
    for (const auto& r : rows)
        os << r.label << ',' << r.summary.mean_assistance << ',' << r.summary.std_assistance << ','
           << r.summary.n_selected << ',' << r.summary.n_fallback << '\n';
}

void write_report(std::span<const SessionLog> logs, const std::filesystem::path& dir, int replicates,
                  double confidence, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream os(dir / name, std::ios::trunc);
        if (!os) throw ConfigError("cannot write " + (dir / name).string());
        os.precision(10);
        return os;
    };

    {
        std::ofstream os = open("fronts.csv");
        os << "participant,group,phase,assistance,expected_score,expected_challenge\n";
        for (const auto& log : logs)
            for (auto [phase, front] : {std::pair{moo::Phase::pre_hil, &log.pre_front},
                                        std::pair{moo::Phase::post_hil, &log.post_front}})
                if (*front)
                    for (const auto& p : (*front)->front)
                        os << log.config.participant_id << ',' << to_string(log.config.group) << ','
                           << moo::to_string(phase) << ',' << p.assistance << ',' << p.expected_score << ','
                           << p.expected_challenge << '\n';
    }
    {
        std::vector<pareto::ParetoFront> fronts;
        for (const auto& log : logs)
            if (log.pre_front) fronts.push_back(*log.pre_front);
        std::ofstream os = open("windows.csv");
        if (!fronts.empty()) {
            const auto windows = standard_windows();
            write_window_table(os, window_analysis(fronts, windows));
        }
    }
    {
        std::ofstream os = open("change_ci.csv");
        os << "group,assistance,mean_change,boot_mean,lo,hi,replicates,confidence,degenerate\n";
        for (const auto& gc : group_changes(logs, replicates, confidence, seed))
            for (const auto& p : gc.intervals.points)
                os << to_string(gc.group) << ',' << p.assistance << ',' << p.mean_change << ',' << p.boot_mean << ','
                   << p.lo << ',' << p.hi << ',' << gc.intervals.replicates << ',' << gc.intervals.confidence << ','
                   << (gc.intervals.degenerate ? 1 : 0) << '\n';
    }
    {
        std::ofstream os = open("participants.csv");
        os << "participant,group,prospective_mean,prospective_std,designs,trained_mean,pre_eval,post_eval\n";
        for (const auto& r : prospective_table(logs))
            os << r.participant << ',' << to_string(r.group) << ',' << r.prospective_mean << ',' << r.prospective_std
               << ',' << r.designs << ',' << r.trained_mean << ',' << r.pre_eval << ',' << r.post_eval << '\n';
    }
}

}  // namespace hilpareto::session
