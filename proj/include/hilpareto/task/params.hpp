#pragma once

#include <array>

namespace hilpareto::task {

// All physical and disturbance defaults of the balancing game live here.
// They are artifact choices (the original device constants are unpublished):
// picked so that the unassisted task fails within seconds while full
// assistance balances indefinitely.

struct PlantParams {
    double cart_mass = 1.0;             // kg
    double pole_mass = 0.2;             // kg
    double half_length = 0.5;           // m, pivot to pole centre of mass
    double gravity = 9.81;              // m/s^2
    double damping = 0.5;               // N s/m, cart viscous friction
    double dt = 0.01;                   // s, RK4 step
    double workspace_half_width = 1.0;  // m, the two monsters sit at +-w
    double max_force = 15.0;            // N, user and assistance force limit
    double k_max = 200.0;               // N/m, spring stiffness at assistance 1
    std::array<double, 4> q_diag{10.0, 1.0, 100.0, 1.0};  // LQR state weights
    double r = 0.1;                     // LQR input weight
    double trial_duration = 25.0;       // s to survive for a full score
    double fail_angle_deg = 50.0;       // pole failure angle

    void validate() const;
    double fail_angle_rad() const;
    /// Number of integration steps in a full-length trial.
    long steps_per_trial() const;
};

/// Ornstein-Uhlenbeck disturbance force acting on the cart.
struct DisturbanceConfig {
    double rate = 2.0;       // 1/s, mean reversion
    double intensity = 3.0;  // N sqrt(s)
    double clamp = 6.0;      // N

    void validate() const;
    double stationary_std() const;
};

}  // namespace hilpareto::task
