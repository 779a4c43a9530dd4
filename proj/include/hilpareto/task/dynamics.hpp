#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "hilpareto/common/random.hpp"
#include "hilpareto/task/params.hpp"

namespace hilpareto::task {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Cart-pole state; angle 0 is upright, positive angle leans toward +x.
struct TaskState {
    double x = 0.0;
    double x_dot = 0.0;
    double theta = 0.0;
    double theta_dot = 0.0;
    double t = 0.0;

    Vec4 vec() const { return {x, x_dot, theta, theta_dot}; }
};

/// Time derivative of (x, x_dot, theta, theta_dot) under horizontal cart force.
Vec4 state_derivative(const Vec4& s, double force, const PlantParams& p);

/// Kinetic plus potential energy (potential measured from the pivot height).
double mechanical_energy(const TaskState& s, const PlantParams& p);

/// Virtual spring between the cart and the LQR-commanded ideal position.
/// The ideal position is the cart position at which a spring of stiffness
/// k_max would deliver the LQR force, x_ideal = x - (K s) / k_max.
double ideal_position(const TaskState& s, const Vec4& gains, const PlantParams& p);
double assistance_force(double assist, const TaskState& s, const Vec4& gains, const PlantParams& p);

/// One fixed-step RK4 step with all forces held over the step. The user
/// force is clamped to +-max_force; `disturbance` is applied as given.
TaskState step(const TaskState& s, double user_force, double assist, double disturbance, const Vec4& gains,
               const PlantParams& p);

/// Same integrator with an explicit total force (no assistance/clamping).
TaskState integrate_rk4(const TaskState& s, double total_force, double dt, const PlantParams& p);

/// Exactly discretized OU process; starts from its stationary distribution.
class OuDisturbance {
public:
    OuDisturbance(const DisturbanceConfig& dc, double dt, std::uint64_t seed);

    /// Advances one step and returns the clamped force for that step.
    double next();
    /// Unclamped process value after the last call to next().
    double raw() const { return value_; }

private:
    DisturbanceConfig dc_;
    Rng rng_;
    double decay_;
    double step_std_;
    double value_;
    bool started_ = false;
};

}  // namespace hilpareto::task
