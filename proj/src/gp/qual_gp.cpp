#include "hilpareto/gp/qual_gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "hilpareto/common/normal.hpp"

namespace hilpareto::gp {

namespace {

Eigen::Index coordinate_of(const std::vector<double>& inputs, double x) {
    auto it = std::lower_bound(inputs.begin(), inputs.end(), x);
    if (it == inputs.end() || *it != x) throw std::logic_error("feedback input missing from index");
    return static_cast<Eigen::Index>(it - inputs.begin());
}

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

// z * phi(z), with the limits at +-inf taken as zero.
double z_pdf(double z) { return std::isfinite(z) ? z * normal_pdf(z) : 0.0; }
double pdf_or_zero(double z) { return std::isfinite(z) ? normal_pdf(z) : 0.0; }

Eigen::VectorXd prior_solve(const JitteredCholesky& chol, const Eigen::VectorXd& f) {
    return chol.llt.solve(f);
}

double log_posterior_value(const Eigen::VectorXd& f, const IndexedFeedback& fb, const LikelihoodParams& lp,
                           const JitteredCholesky& chol) {
    double value = 0.0;
    for (const auto& [i, label] : fb.ordinal) value += std::log(clamp_prob(ordinal_prob(f[i], label, lp)));
    for (const auto& [w, l] : fb.pairwise) value += std::log(clamp_prob(pairwise_prob(f[w], f[l], lp)));
    if (f.size() > 0) value -= 0.5 * f.dot(prior_solve(chol, f));
    return value;
}

void check_dimensions(const Eigen::VectorXd& f, const IndexedFeedback& fb, const Eigen::MatrixXd& k) {
    const auto n = static_cast<Eigen::Index>(fb.inputs.size());
    if (f.size() != n || k.rows() != n || k.cols() != n)
        throw std::invalid_argument("latent vector / kernel matrix do not match the feedback inputs");
}

}  // namespace

std::vector<double> QualDataset::inputs() const {
    std::vector<double> xs;
    xs.reserve(ordinal.size() + 2 * pairwise.size());
    for (const auto& o : ordinal) xs.push_back(o.x);
    for (const auto& p : pairwise) {
        xs.push_back(p.x_prev);
        xs.push_back(p.x_curr);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

IndexedFeedback index_feedback(const QualDataset& dq) {
    IndexedFeedback fb;
    for (const auto& o : dq.ordinal) require_assistance(o.x, "QualDataset");
    for (const auto& p : dq.pairwise) {
        require_assistance(p.x_prev, "QualDataset");
        require_assistance(p.x_curr, "QualDataset");
    }
    fb.inputs = dq.inputs();
    for (const auto& o : dq.ordinal) fb.ordinal.emplace_back(coordinate_of(fb.inputs, o.x), o.label);
    for (const auto& p : dq.pairwise) {
        const auto prev = coordinate_of(fb.inputs, p.x_prev);
        const auto curr = coordinate_of(fb.inputs, p.x_curr);
        if (p.preference == Preference::current_harder)
            fb.pairwise.emplace_back(curr, prev);
        else
            fb.pairwise.emplace_back(prev, curr);
    }
    return fb;
}

LikelihoodTerms likelihood_terms(const Eigen::VectorXd& f, const IndexedFeedback& fb,
                                 const LikelihoodParams& lp) {
    const auto n = f.size();
    LikelihoodTerms out{0.0, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};

    const double co2 = lp.c_o * lp.c_o;
    for (const auto& [i, label] : fb.ordinal) {
        const double p = clamp_prob(ordinal_prob(f[i], label, lp));
        const double z_hi = (lp.upper(label) - f[i]) / lp.c_o;
        const double z_lo = (lp.lower(label) - f[i]) / lp.c_o;
        const double dphi = pdf_or_zero(z_hi) - pdf_or_zero(z_lo);
        const double dzphi = z_pdf(z_hi) - z_pdf(z_lo);
        out.log_likelihood += std::log(p);
        out.gradient[i] += -dphi / (lp.c_o * p);
        out.neg_hessian(i, i) += dzphi / (co2 * p) + (dphi * dphi) / (co2 * p * p);
    }

    const double cp2 = lp.c_p * lp.c_p;
    for (const auto& [w, l] : fb.pairwise) {
        const double z = (f[w] - f[l]) / lp.c_p;
        const double p = clamp_prob(normal_cdf(z));
        const double r = normal_pdf(z) / p;
        const double h = r * (z + r) / cp2;
        out.log_likelihood += std::log(p);
        out.gradient[w] += r / lp.c_p;
        out.gradient[l] -= r / lp.c_p;
        out.neg_hessian(w, w) += h;
        out.neg_hessian(l, l) += h;
        out.neg_hessian(w, l) -= h;
        out.neg_hessian(l, w) -= h;
    }
    return out;
}

double qual_log_posterior(const Eigen::VectorXd& f, const QualDataset& dq, const Eigen::MatrixXd& k,
                          const LikelihoodParams& lp) {
    lp.validate();
    const auto fb = index_feedback(dq);
    check_dimensions(f, fb, k);
    if (f.size() == 0) return 0.0;
    return log_posterior_value(f, fb, lp, factor_with_jitter(k, kBaseJitter));
}

Eigen::VectorXd qual_log_posterior_gradient(const Eigen::VectorXd& f, const QualDataset& dq,
                                            const Eigen::MatrixXd& k, const LikelihoodParams& lp) {
    lp.validate();
    const auto fb = index_feedback(dq);
    check_dimensions(f, fb, k);
    if (f.size() == 0) return f;
    const auto chol = factor_with_jitter(k, kBaseJitter);
    return likelihood_terms(f, fb, lp).gradient - prior_solve(chol, f);
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return m;
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().minCoeff() >= 0.0) return sym;
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

LaplaceFit fit_laplace(const QualDataset& dq, const KernelParams& kp, const LikelihoodParams& lp,
                       const LaplaceOptions& opts) {
    kp.validate();
    lp.validate();
    const auto fb = index_feedback(dq);
    const auto n = static_cast<Eigen::Index>(fb.inputs.size());

    LaplaceFit fit;
    fit.inputs = fb.inputs;
    fit.k = gram_matrix(fb.inputs, kp);
    fit.f_hat = Eigen::VectorXd::Zero(n);
    fit.w = Eigen::MatrixXd::Zero(n, n);
    if (n == 0) return fit;

    const auto chol = factor_with_jitter(fit.k, kBaseJitter);
    fit.jitter = chol.jitter;
    Eigen::MatrixXd kj = fit.k;
    kj.diagonal().array() += chol.jitter;
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);

    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    double value = log_posterior_value(f, fb, lp, chol);
    fit.converged = false;
    int iter = 0;
    for (;; ++iter) {
        const auto terms = likelihood_terms(f, fb, lp);
        const Eigen::VectorXd grad = terms.gradient - prior_solve(chol, f);
        fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
        if (fit.gradient_norm < opts.gradient_tol) {
            fit.converged = true;
            break;
        }
        if (iter >= opts.max_iterations) break;

        // Newton direction (K^-1 + W) d = g, multiplied through by K.
        const Eigen::MatrixXd w = project_psd(terms.neg_hessian);
        const Eigen::VectorXd rhs = kj * terms.gradient - f;
        const Eigen::VectorXd dir = (identity + kj * w).partialPivLu().solve(rhs);

        double step = 1.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
            const Eigen::VectorXd trial = f + step * dir;
            const double v = log_posterior_value(trial, fb, lp, chol);
            if (std::isfinite(v) && v >= value) {
                f = trial;
                value = v;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    fit.iterations = iter;
    fit.f_hat = f;
    fit.w = project_psd(likelihood_terms(f, fb, lp).neg_hessian);
    return fit;
}

QualGp::QualGp(LaplaceFit fit, KernelParams kp) : fit_(std::move(fit)), kp_(kp) {
    kp_.validate();
    const auto n = fit_.f_hat.size();
    if (n == 0) return;
    const auto chol = factor_with_jitter(fit_.k, fit_.jitter);
    alpha_ = chol.llt.solve(fit_.f_hat);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (fit_.w + fit_.w.transpose()));
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    w_sqrt_ = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();

    Eigen::MatrixXd kj = fit_.k;
    kj.diagonal().array() += fit_.jitter;
    const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n) + w_sqrt_ * kj * w_sqrt_;
    b_.compute(0.5 * (b + b.transpose()));
}

PosteriorGaussian QualGp::predict(double x_star) const {
    require_assistance(x_star, "QualGp::predict");
    if (fit_.f_hat.size() == 0) return {0.0, 1.0};
    const Eigen::VectorXd k = cross_kernel(fit_.inputs, x_star, kp_);
    const double mean = k.dot(alpha_);
    // k_** - k^T (K + W^-1)^-1 k  ==  k_** - (W^1/2 k)^T B^-1 (W^1/2 k)
    const Eigen::VectorXd v = w_sqrt_ * k;
    const double var = std::max(0.0, 1.0 - v.dot(b_.solve(v)));
    return {mean, var};
}

PosteriorGaussian qual_posterior(const LaplaceFit& fit, double x_star, const KernelParams& kp) {
    return QualGp(fit, kp).predict(x_star);
}

}  // namespace hilpareto::gp
