#include "hilpareto/gp/numeric_gp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hilpareto::gp {

namespace {

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

Moments population_moments(std::span<const double> s) {
    const double n = static_cast<double>(s.size());
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

}  // namespace

std::vector<double> standardize_scores(std::span<const double> s) {
    if (s.empty()) throw std::invalid_argument("standardize_scores: empty score list");
    for (double v : s)
        if (!std::isfinite(v)) throw std::invalid_argument("standardize_scores: non-finite score");
    std::vector<double> y(s.size(), 0.0);
    if (s.size() == 1) return y;
    const auto m = population_moments(s);
    if (m.std <= 0.0) return y;
    for (std::size_t i = 0; i < s.size(); ++i) y[i] = (s[i] - m.mean) / m.std;
    return y;
}

NumericDataset::NumericDataset(std::vector<double> x, std::vector<double> s) {
    if (x.size() != s.size()) throw std::invalid_argument("NumericDataset: |x| != |s|");
    for (std::size_t i = 0; i < x.size(); ++i) {
        require_assistance(x[i], "NumericDataset");
        if (!std::isfinite(s[i])) throw std::invalid_argument("NumericDataset: non-finite score");
    }
    x_ = std::move(x);
    s_ = std::move(s);
    restandardize();
}

void NumericDataset::append(double x, double s) {
    require_assistance(x, "NumericDataset::append");
    if (!std::isfinite(s)) throw std::invalid_argument("NumericDataset::append: non-finite score");
    x_.push_back(x);
    s_.push_back(s);
    restandardize();
}

void NumericDataset::restandardize() {
    if (s_.empty()) {
        y_.clear();
        mean_ = std_ = 0.0;
        return;
    }
    y_ = standardize_scores(s_);
    if (s_.size() == 1) {
        mean_ = s_.front();
        std_ = 0.0;
    } else {
        const auto m = population_moments(s_);
        mean_ = m.mean;
        std_ = m.std;
    }
}

NumericGp::NumericGp(NumericDataset data, double sigma_w2, KernelParams kp)
    : data_(std::move(data)), sigma_w2_(sigma_w2), kp_(kp) {
    kp_.validate();
    if (!(std::isfinite(sigma_w2_) && sigma_w2_ >= 0.0))
        throw std::invalid_argument("NumericGp: observation noise must be >= 0");
    if (data_.empty()) return;
    Eigen::MatrixXd a = gram_matrix(data_.x(), kp_);
    a.diagonal().array() += sigma_w2_;
    // The noise term already regularizes the system; jitter only kicks in when
    // sigma_w2 = 0 or the factorization fails.
    chol_ = factor_with_jitter(a, 0.0);
    const auto y = data_.y();
    alpha_ = chol_.llt.solve(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
}

PosteriorGaussian NumericGp::predict(double x_star) const {
    require_assistance(x_star, "NumericGp::predict");
    if (data_.empty()) return {0.0, 1.0};
    const Eigen::VectorXd k = cross_kernel(data_.x(), x_star, kp_);
    const double mean = k.dot(alpha_);
    const Eigen::VectorXd v = chol_.llt.matrixL().solve(k);
    const double var = std::max(0.0, 1.0 - v.squaredNorm());
    return {mean, var};
}

PosteriorGaussian num_posterior(const NumericDataset& data, double x_star, double sigma_w2,
                                const KernelParams& kp) {
    return NumericGp(data, sigma_w2, kp).predict(x_star);
}

}  // namespace hilpareto::gp
