#include "hilpareto/task/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hilpareto/common/errors.hpp"

namespace hilpareto::task {

void PlantParams::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(cart_mass) || !positive(pole_mass) || !positive(half_length) || !positive(gravity))
        throw ConfigError("plant masses, length and gravity must be positive");
    if (!positive(dt) || !positive(workspace_half_width) || !positive(k_max) || !positive(max_force))
        throw ConfigError("dt, workspace, k_max and max_force must be positive");
    if (!(std::isfinite(damping) && damping >= 0.0)) throw ConfigError("damping must be >= 0");
    for (double q : q_diag)
        if (!(std::isfinite(q) && q >= 0.0)) throw ConfigError("LQR Q diagonal must be >= 0");
    if (!positive(r)) throw ConfigError("LQR R must be positive");
    if (!positive(trial_duration) || !positive(fail_angle_deg)) throw ConfigError("invalid trial limits");
}

double PlantParams::fail_angle_rad() const { return fail_angle_deg * std::numbers::pi / 180.0; }

long PlantParams::steps_per_trial() const { return std::lround(trial_duration / dt); }

void DisturbanceConfig::validate() const {
    if (!(std::isfinite(rate) && rate > 0.0)) throw ConfigError("disturbance rate must be positive");
    if (!(std::isfinite(intensity) && intensity >= 0.0)) throw ConfigError("disturbance intensity must be >= 0");
    if (!(std::isfinite(clamp) && clamp >= 0.0)) throw ConfigError("disturbance clamp must be >= 0");
}

double DisturbanceConfig::stationary_std() const { return intensity / std::sqrt(2.0 * rate); }

Vec4 state_derivative(const Vec4& s, double force, const PlantParams& p) {
    const double m = p.pole_mass;
    const double l = p.half_length;
    const double total = p.cart_mass + m;
    const double inertia = 4.0 / 3.0 * m * l * l;  // uniform rod about its pivot
    const double sn = std::sin(s[2]);
    const double cs = std::cos(s[2]);
    const double mlc = m * l * cs;
    // [total, mlc; mlc, inertia] [x_dd; th_dd] = [r1; r2]
    const double r1 = force - p.damping * s[1] + m * l * sn * s[3] * s[3];
    const double r2 = m * p.gravity * l * sn;
    const double det = total * inertia - mlc * mlc;
    const double x_dd = (inertia * r1 - mlc * r2) / det;
    const double th_dd = (total * r2 - mlc * r1) / det;
    return {s[1], x_dd, s[3], th_dd};
}

double mechanical_energy(const TaskState& s, const PlantParams& p) {
    const double m = p.pole_mass;
    const double l = p.half_length;
    const double inertia = 4.0 / 3.0 * m * l * l;
    const double kinetic = 0.5 * (p.cart_mass + m) * s.x_dot * s.x_dot +
                           m * l * std::cos(s.theta) * s.x_dot * s.theta_dot +
                           0.5 * inertia * s.theta_dot * s.theta_dot;
    return kinetic + m * p.gravity * l * std::cos(s.theta);
}

double ideal_position(const TaskState& s, const Vec4& gains, const PlantParams& p) {
    const double u = -gains.dot(s.vec());
    return s.x + u / p.k_max;
}

double assistance_force(double assist, const TaskState& s, const Vec4& gains, const PlantParams& p) {
    if (!(std::isfinite(assist) && assist >= 0.0 && assist <= 1.0))
        throw std::invalid_argument("assistance level must lie in [0, 1]");
    if (assist == 0.0) return 0.0;
    const double stiffness = p.k_max * assist;
    const double f = stiffness * (ideal_position(s, gains, p) - s.x);
    return std::clamp(f, -p.max_force, p.max_force);
}

TaskState integrate_rk4(const TaskState& s, double total_force, double dt, const PlantParams& p) {
    const Vec4 y = s.vec();
    const Vec4 k1 = state_derivative(y, total_force, p);
    const Vec4 k2 = state_derivative(y + 0.5 * dt * k1, total_force, p);
    const Vec4 k3 = state_derivative(y + 0.5 * dt * k2, total_force, p);
    const Vec4 k4 = state_derivative(y + dt * k3, total_force, p);
    const Vec4 n = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!n.allFinite()) throw SimulationFault("non-finite cart-pole state");
    double theta = n[2];
    if (theta > std::numbers::pi || theta <= -std::numbers::pi)
        theta = std::remainder(theta, 2.0 * std::numbers::pi);
    return {n[0], n[1], theta, n[3], s.t + dt};
}

TaskState step(const TaskState& s, double user_force, double assist, double disturbance, const Vec4& gains,
               const PlantParams& p) {
    if (!std::isfinite(user_force) || !std::isfinite(disturbance))
        throw SimulationFault("non-finite force input");
    const double user = std::clamp(user_force, -p.max_force, p.max_force);
    const double total = user + assistance_force(assist, s, gains, p) + disturbance;
    return integrate_rk4(s, total, p.dt, p);
}

OuDisturbance::OuDisturbance(const DisturbanceConfig& dc, double dt, std::uint64_t seed)
    : dc_(dc), rng_(seed), decay_(std::exp(-dc.rate * dt)) {
    dc_.validate();
    step_std_ = dc.intensity * std::sqrt((1.0 - decay_ * decay_) / (2.0 * dc.rate));
    value_ = dc.stationary_std() * standard_normal(rng_);
}

double OuDisturbance::next() {
    if (started_)
        value_ = decay_ * value_ + step_std_ * standard_normal(rng_);
    started_ = true;
    return std::clamp(value_, -dc_.clamp, dc_.clamp);
}

}  // namespace hilpareto::task
