#include "hilpareto/task/lqr.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "hilpareto/common/errors.hpp"

namespace hilpareto::task {

LinearModel linearize_upright(const PlantParams& p) {
    p.validate();
    const double m = p.pole_mass;
    const double l = p.half_length;
    const double total = p.cart_mass + m;
    const double inertia = 4.0 / 3.0 * m * l * l;
    const double det = total * inertia - m * m * l * l;

    LinearModel lin{Mat4::Zero(), Vec4::Zero()};
    lin.a(0, 1) = 1.0;
    lin.a(1, 1) = -inertia * p.damping / det;
    lin.a(1, 2) = -m * m * l * l * p.gravity / det;
    lin.a(2, 3) = 1.0;
    lin.a(3, 1) = m * l * p.damping / det;
    lin.a(3, 2) = total * m * p.gravity * l / det;
    lin.b[1] = inertia / det;
    lin.b[3] = -m * l / det;
    return lin;
}

Mat4 solve_care(const Mat4& a, const Vec4& b, const Mat4& q, double r) {
    using Mat8 = Eigen::Matrix<double, 8, 8>;
    Mat8 h;
    h << a, -(b * b.transpose()) / r, -q, -a.transpose();

    // Scaled Newton iteration for the matrix sign function.
    Mat8 z = h;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        const Eigen::PartialPivLU<Mat8> lu(z);
        const double det = std::abs(lu.determinant());
        const double c = (det > 0.0 && std::isfinite(det)) ? std::pow(det, 1.0 / 8.0) : 1.0;
        const Mat8 next = 0.5 * (z / c + c * lu.inverse());
        const double change = (next - z).lpNorm<1>();
        const double scale = z.lpNorm<1>();
        z = next;
        if (!z.allFinite()) break;
        if (change <= 1e-10 * scale) {
            converged = true;
            break;
        }
    }
    if (!converged) throw ConfigError("Riccati sign iteration did not converge");

    // Stable invariant subspace: (sign(H) + I) [I; P] = 0.
    const Mat4 w11 = z.topLeftCorner<4, 4>();
    const Mat4 w12 = z.topRightCorner<4, 4>();
    const Mat4 w21 = z.bottomLeftCorner<4, 4>();
    const Mat4 w22 = z.bottomRightCorner<4, 4>();
    Eigen::Matrix<double, 8, 4> lhs, rhs;
    lhs << w12, w22 + Mat4::Identity();
    rhs << -(w11 + Mat4::Identity()), -w21;
    Mat4 pmat = lhs.colPivHouseholderQr().solve(rhs);
    pmat = 0.5 * (pmat + pmat.transpose());

    const Mat4 residual = a.transpose() * pmat + pmat * a - pmat * b * b.transpose() * pmat / r + q;
    if (!pmat.allFinite() || residual.norm() > 1e-6 * std::max(1.0, pmat.norm()))
        throw ConfigError("Riccati solution failed the residual check");
    return pmat;
}

Vec4 lqr_gains(const PlantParams& p) {
    const auto lin = linearize_upright(p);
    Mat4 q = Mat4::Zero();
    for (int i = 0; i < 4; ++i) q(i, i) = p.q_diag[static_cast<std::size_t>(i)];
    const Mat4 pmat = solve_care(lin.a, lin.b, q, p.r);
    const Vec4 k = (lin.b.transpose() * pmat / p.r).transpose();

    const Mat4 closed = lin.a - lin.b * k.transpose();
    Eigen::EigenSolver<Mat4> es(closed);
    if (es.eigenvalues().real().maxCoeff() >= 0.0)
        throw ConfigError("LQR design does not stabilize the linearized plant");
    return k;
}

}  // namespace hilpareto::task
