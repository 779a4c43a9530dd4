#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hilpareto::pareto {

/// One grid evaluation in objective space. Both objectives are maximized.
struct ObjectivePoint {
    double assistance = 0.0;
    double expected_score = 0.0;      // raw normalized score scale
    double expected_challenge = 0.0;  // latent challenge (unitless)
};

struct ParetoFront {
    std::vector<ObjectivePoint> all_points;
    std::vector<ObjectivePoint> front;  // non-dominated subset, ascending assistance
    double t1 = -0.5;                   // ordinal thresholds for easy/moderate/hard shading
    double t2 = 0.5;
};

/// Indices (ascending) of points not dominated under joint maximization.
/// Exact duplicates keep only their lowest index.
std::vector<std::size_t> non_dominated(std::span<const std::pair<double, double>> points);

/// Builds a front from grid evaluations (given in ascending assistance).
ParetoFront make_front(std::vector<ObjectivePoint> all_points, double t1 = -0.5, double t2 = 0.5);

}  // namespace hilpareto::pareto
