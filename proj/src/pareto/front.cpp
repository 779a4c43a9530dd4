#include "hilpareto/pareto/front.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hilpareto::pareto {

std::vector<std::size_t> non_dominated(std::span<const std::pair<double, double>> points) {
    for (const auto& [a, b] : points)
        if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("non_dominated: non-finite point");

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (points[i].first != points[j].first) return points[i].first > points[j].first;
        return points[i].second > points[j].second;
    });

    // Sweep in decreasing first objective: a point survives only if it beats
    // every second-objective value seen so far.
    std::vector<std::size_t> keep;
    double best_second = -std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
        if (points[i].second > best_second) {
            keep.push_back(i);
            best_second = points[i].second;
        }
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

ParetoFront make_front(std::vector<ObjectivePoint> all_points, double t1, double t2) {
    std::vector<std::pair<double, double>> objectives;
    objectives.reserve(all_points.size());
    for (const auto& p : all_points) objectives.emplace_back(p.expected_score, p.expected_challenge);
    ParetoFront out;
    for (std::size_t i : non_dominated(objectives)) out.front.push_back(all_points[i]);
    std::sort(out.front.begin(), out.front.end(),
              [](const ObjectivePoint& a, const ObjectivePoint& b) { return a.assistance < b.assistance; });
    out.all_points = std::move(all_points);
    out.t1 = t1;
    out.t2 = t2;
    return out;
}

}  // namespace hilpareto::pareto
