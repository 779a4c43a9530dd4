#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hilpareto/pareto/front.hpp"

namespace hilpareto::pareto {

/// Fractions of an individual's front range on each axis. Bounds are inclusive.
struct SelectionWindow {
    double perf_lo = 0.4;
    double perf_hi = 0.8;
    double chall_lo = 0.4;
    double chall_hi = 0.8;

    void validate() const;
    /// Symmetric window [lo, hi] on both axes.
    static SelectionWindow both(double lo, double hi) { return {lo, hi, lo, hi}; }
};

struct Selection {
    std::vector<double> assistance;  // ascending
    bool fallback = false;           // window was empty; nearest point to its center returned
};

/// Front points (min-max normalized per axis over the front itself) inside the window.
/// A degenerate axis counts as inside. An empty result falls back to the point nearest
/// the window center.
Selection select_designs(const ParetoFront& front, const SelectionWindow& window);

/// Per-axis min-max normalization of the front points; degenerate axes map to 0.
std::vector<std::pair<double, double>> capacity_normalized(const ParetoFront& front);

/// Posterior mean/std curves on a shared assistance grid. Score is on the raw scale,
/// challenge on the latent scale.
struct ModelCurves {
    std::vector<double> grid;
    std::vector<double> score_mean;
    std::vector<double> score_std;
    std::vector<double> chall_mean;
    std::vector<double> chall_std;

    void check_shape() const;
};

ParetoFront front_from_curves(const ModelCurves& c, double t1 = -0.5, double t2 = 0.5);

struct GroupCurves {
    std::vector<double> grid;
    std::vector<ModelCurves> participants;
    std::vector<double> score_mean;  // pointwise mean across participants
    std::vector<double> chall_mean;
};

GroupCurves aggregate_curves(std::span<const ModelCurves> participants);

struct ChangePoint {
    double assistance = 0.0;
    double mean_change = 0.0;  // on the unresampled cohort
    double boot_mean = 0.0;    // mean over replicates
    double lo = 0.0;
    double hi = 0.0;
};

struct ChangeIntervals {
    std::vector<ChangePoint> points;
    int replicates = 0;
    double confidence = 0.95;
    bool degenerate = false;  // fewer than two participants: intervals have zero width
};

/// Percentile bootstrap of the post-minus-pre aggregate score change, resampling
/// participants (pairs) with replacement. Replicate r draws from its own seed.
ChangeIntervals bootstrap_change_ci(std::span<const ModelCurves> pre, std::span<const ModelCurves> post,
                                    int replicates, double confidence, std::uint64_t seed);

/// Linear-interpolated sample quantile (sorted input, q in [0,1]).
double quantile_sorted(std::span<const double> sorted, double q);

struct AxisScaling {
    double score = 1.0;
    double challenge = 1.0;
};

/// Symmetric Hausdorff distance between the front point sets after dividing each axis by its scale.
double front_hausdorff(const ParetoFront& a, const ParetoFront& b, AxisScaling scaling = {});

/// Hausdorff distance after capacity-normalizing each front on its own ranges.
double normalized_hausdorff(const ParetoFront& a, const ParetoFront& b);

double hausdorff(std::span<const std::pair<double, double>> a, std::span<const std::pair<double, double>> b);

struct WindowSummary {
    SelectionWindow window;
    double mean_assistance = 0.0;  // pooled over every in-window level of every participant
    double std_assistance = 0.0;   // population std of the same pool
    std::size_t n_selected = 0;
    std::size_t n_fallback = 0;    // participants whose window was empty; excluded from the pool
};

WindowSummary summarize_window(std::span<const ParetoFront> fronts, const SelectionWindow& window);

}  // namespace hilpareto::pareto
