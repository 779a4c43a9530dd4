#include "hilpareto/gp/kernel.hpp"

#include <stdexcept>
#include <string>

#include "hilpareto/common/errors.hpp"

namespace hilpareto::gp {

void KernelParams::validate() const {
    if (!(std::isfinite(theta) && theta > 0.0))
        throw std::invalid_argument("kernel theta must be a positive finite number");
}

double rbf_kernel(double x1, double x2, double theta) {
    if (!std::isfinite(x1) || !std::isfinite(x2) || !std::isfinite(theta))
        throw std::invalid_argument("rbf_kernel: non-finite input");
    if (theta <= 0.0) throw std::invalid_argument("rbf_kernel: theta must be positive");
    const double d = x1 - x2;
    return std::exp(-theta * d * d);
}

Eigen::MatrixXd gram_matrix(std::span<const double> x, const KernelParams& kp) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            k(i, j) = rbf_kernel(x[i], x[j], kp.theta);
            k(j, i) = k(i, j);
        }
    }
    return k;
}

Eigen::VectorXd cross_kernel(std::span<const double> x, double x_star, const KernelParams& kp) {
    Eigen::VectorXd k(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        k[static_cast<Eigen::Index>(i)] = rbf_kernel(x[i], x_star, kp.theta);
    return k;
}

JitteredCholesky factor_with_jitter(const Eigen::MatrixXd& a, double initial_jitter) {
    const auto n = a.rows();
    double jitter = initial_jitter;
    while (true) {
        Eigen::MatrixXd m = a;
        if (jitter > 0.0) m.diagonal().array() += jitter;
        JitteredCholesky out{Eigen::LLT<Eigen::MatrixXd>(m), jitter};
        if (out.llt.info() == Eigen::Success) return out;
        if (jitter >= kMaxJitter * (1.0 - 1e-9))
            throw NumericalError("Cholesky factorization failed for a " + std::to_string(n) + "x" +
                                 std::to_string(n) + " system even with jitter 1e-4");
        jitter = jitter <= 0.0 ? kBaseJitter : jitter * 10.0;
    }
}

void require_assistance(double x, const char* what) {
    if (!std::isfinite(x) || x < 0.0 || x > 1.0)
        throw std::invalid_argument(std::string(what) + ": assistance level must lie in [0, 1]");
}

}  // namespace hilpareto::gp
