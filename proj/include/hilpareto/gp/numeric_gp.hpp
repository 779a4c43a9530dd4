#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "hilpareto/gp/kernel.hpp"

namespace hilpareto::gp {

/// z-scores with population standard deviation. A single sample or a
/// zero-variance list maps to all zeros.
std::vector<double> standardize_scores(std::span<const double> s);

/// Assistance levels, raw normalized scores, and their standardized copy.
/// `y` is recomputed from the full score list on every append.
class NumericDataset {
public:
    NumericDataset() = default;
    NumericDataset(std::vector<double> x, std::vector<double> s);

    void append(double x, double s);

    std::span<const double> x() const { return x_; }
    std::span<const double> s() const { return s_; }
    std::span<const double> y() const { return y_; }
    std::size_t size() const { return x_.size(); }
    bool empty() const { return x_.empty(); }

    double score_mean() const { return mean_; }
    /// Population std; 0 for fewer than two samples.
    double score_std() const { return std_; }

    /// Maps a standardized value back onto the raw score scale.
    double to_raw(double y) const { return mean_ + std_ * y; }

private:
    void restandardize();

    std::vector<double> x_;
    std::vector<double> s_;
    std::vector<double> y_;
    double mean_ = 0.0;
    double std_ = 0.0;
};

/// Zero-mean GP regression on standardized scores with Gaussian white
/// observation noise. Immutable after construction.
class NumericGp {
public:
    NumericGp(NumericDataset data, double sigma_w2, KernelParams kp);

    PosteriorGaussian predict(double x_star) const;

    const NumericDataset& data() const { return data_; }
    double noise_variance() const { return sigma_w2_; }
    const KernelParams& kernel() const { return kp_; }

private:
    NumericDataset data_;
    double sigma_w2_;
    KernelParams kp_;
    JitteredCholesky chol_;
    Eigen::VectorXd alpha_;
};

PosteriorGaussian num_posterior(const NumericDataset& data, double x_star, double sigma_w2,
                                const KernelParams& kp);

}  // namespace hilpareto::gp
