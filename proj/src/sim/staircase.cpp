#include "hilpareto/sim/staircase.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hilpareto::sim {

StaircaseState staircase_start(double level, int steps_per_unit) {
    if (steps_per_unit < 1) throw std::invalid_argument("staircase: steps_per_unit must be >= 1");
    if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("staircase: level must lie in [0, 1]");
    StaircaseState st;
    st.steps_per_unit = steps_per_unit;
    st.level_steps = static_cast<int>(std::lround(level * steps_per_unit));
    return st;
}

StaircaseState staircase_update(StaircaseState st, bool success) {
    if (!success) {
        st.level_steps = std::min(st.level_steps + 1, st.steps_per_unit);
        st.consecutive_successes = 0;
        return st;
    }
    if (++st.consecutive_successes >= 2) {
        st.level_steps = std::max(st.level_steps - 1, 0);
        st.consecutive_successes = 0;
    }
    return st;
}

}  // namespace hilpareto::sim
