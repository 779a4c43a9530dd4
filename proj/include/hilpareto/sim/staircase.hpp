#pragma once

namespace hilpareto::sim {

/// Two-successes-down, one-failure-up assistance staircase. The level is kept
/// as an integer count of steps so repeated updates never accumulate rounding.
struct StaircaseState {
    int level_steps = 5;  // level = level_steps / steps_per_unit
    int steps_per_unit = 10;
    int consecutive_successes = 0;

    double level() const { return static_cast<double>(level_steps) / steps_per_unit; }
};

/// Initial state at the given level, rounded to the nearest step.
StaircaseState staircase_start(double level = 0.5, int steps_per_unit = 10);

StaircaseState staircase_update(StaircaseState st, bool success);

}  // namespace hilpareto::sim
