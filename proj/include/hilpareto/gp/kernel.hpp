#pragma once

#include <cmath>
#include <span>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace hilpareto::gp {

/// Length-scale coefficient of k(a, b) = exp(-theta * (a - b)^2).
struct KernelParams {
    double theta = 5.0;

    void validate() const;
};

/// Predictive distribution of a surrogate at one assistance level.
struct PosteriorGaussian {
    double mean = 0.0;
    double variance = 1.0;

    double stddev() const { return std::sqrt(variance); }
};

double rbf_kernel(double x1, double x2, double theta);

Eigen::MatrixXd gram_matrix(std::span<const double> x, const KernelParams& kp);
Eigen::VectorXd cross_kernel(std::span<const double> x, double x_star, const KernelParams& kp);

/// Cholesky factor of (A + jitter * I). The jitter starts at `initial_jitter`
/// and is escalated (first to 1e-8, then x10 per attempt) up to 1e-4; beyond
/// that a NumericalError is thrown.
struct JitteredCholesky {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

inline constexpr double kBaseJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-4;

JitteredCholesky factor_with_jitter(const Eigen::MatrixXd& a, double initial_jitter);

/// Throws std::invalid_argument unless x is finite and inside [0, 1].
void require_assistance(double x, const char* what);

}  // namespace hilpareto::gp
