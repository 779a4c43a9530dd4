#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hilpareto/pareto/analysis.hpp"
#include "hilpareto/session/session_log.hpp"
#include "hilpareto/sim/sim_user.hpp"

namespace hilpareto::session {

/// n simulated participants spread around the default profile: skill,
/// fatigue noise and the latent challenge line vary per participant.
std::vector<sim::SimUserProfile> default_cohort(int n, std::uint64_t seed);

/// Runs the full protocol for every profile. Participants alternate between
/// the Pareto and staircase groups (first one Pareto). Sessions are
/// independent, so `jobs` worker threads give identical results to one.
std::vector<SessionLog> simulate_cohort(std::span<const sim::SimUserProfile> profiles, const SessionConfig& base,
                                        int jobs = 1);

/// Only the pre-training characterization of every profile (enough for
/// prospective-assistance and threshold-window analyses).
std::vector<pareto::ParetoFront> characterize_cohort(std::span<const sim::SimUserProfile> profiles,
                                                     const SessionConfig& base, int jobs = 1);

/// Last model snapshot of a HiL phase, as curves.
pareto::ModelCurves final_curves(const SessionLog& log, moo::Phase phase);

struct WindowRow {
    std::string label;  // e.g. "40-80"
    pareto::WindowSummary summary;
};

/// Mean selected assistance per window over a set of individual fronts.
std::vector<WindowRow> window_analysis(std::span<const pareto::ParetoFront> fronts,
                                       std::span<const pareto::SelectionWindow> windows);

/// Default threshold windows 30-70, 40-80 and 50-90 on both axes.
std::vector<pareto::SelectionWindow> standard_windows();

struct GroupChange {
    Group group;
    pareto::ChangeIntervals intervals;
};

/// Bootstrap confidence intervals of the post minus pre aggregate score curve, per group.
std::vector<GroupChange> group_changes(std::span<const SessionLog> logs, int replicates, double confidence,
                                       std::uint64_t seed);

struct ProspectiveRow {
    std::string participant;
    Group group;
    double prospective_mean = 0.0;  // Pareto-method levels from the pre-training front
    double prospective_std = 0.0;
    std::size_t designs = 0;
    double trained_mean = 0.0;  // levels actually used in training
    double pre_eval = 0.0;      // mean best score at assistance 0
    double post_eval = 0.0;
};

std::vector<ProspectiveRow> prospective_table(std::span<const SessionLog> logs);

/// Writes fronts.csv, windows.csv, change_ci.csv and participants.csv into dir.
void write_report(std::span<const SessionLog> logs, const std::filesystem::path& dir, int replicates = 5000,
                  double confidence = 0.95, std::uint64_t seed = 1);

void write_window_table(std::ostream& os, std::span<const WindowRow> rows);

}  // namespace hilpareto::session
