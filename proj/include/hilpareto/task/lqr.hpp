#pragma once

#include <Eigen/Core>

#include "hilpareto/task/dynamics.hpp"
#include "hilpareto/task/params.hpp"

namespace hilpareto::task {

/// Linearization of the cart-pole about the upright, centred equilibrium.
struct LinearModel {
    Mat4 a;
    Vec4 b;
};

LinearModel linearize_upright(const PlantParams& p);

/// Stabilizing solution of A'P + PA - P B R^-1 B' P + Q = 0, computed with
/// the scaled matrix-sign iteration on the Hamiltonian (tolerance 1e-10).
/// Throws ConfigError if the iteration does not converge.
Mat4 solve_care(const Mat4& a, const Vec4& b, const Mat4& q, double r);

/// State-feedback gains K with u = -K s for s = (x, x_dot, theta, theta_dot).
Vec4 lqr_gains(const PlantParams& p);

}  // namespace hilpareto::task
