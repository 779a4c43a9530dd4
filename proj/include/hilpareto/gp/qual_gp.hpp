#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hilpareto/gp/kernel.hpp"
#include "hilpareto/gp/likelihood.hpp"

namespace hilpareto::gp {

struct OrdinalObservation {
    double x = 0.0;
    OrdinalLabel label = OrdinalLabel::moderate;
};

struct PairwiseObservation {
    double x_prev = 0.0;
    double x_curr = 0.0;
    Preference preference = Preference::current_harder;
};

/// Ordinal labels and pairwise preferences collected over a session.
struct QualDataset {
    std::vector<OrdinalObservation> ordinal;
    std::vector<PairwiseObservation> pairwise;

    bool empty() const { return ordinal.empty() && pairwise.empty(); }
    /// Sorted distinct assistance levels referenced by any feedback item.
    /// Each one is a single latent coordinate.
    std::vector<double> inputs() const;
};

/// Feedback expressed against latent coordinates instead of raw x.
struct IndexedFeedback {
    std::vector<double> inputs;
    std::vector<std::pair<Eigen::Index, OrdinalLabel>> ordinal;
    /// (harder, easier) coordinate pairs.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairwise;
};

IndexedFeedback index_feedback(const QualDataset& dq);

/// Log-likelihood of the feedback together with its gradient and negative Hessian.
struct LikelihoodTerms {
    double log_likelihood = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd neg_hessian;
};

LikelihoodTerms likelihood_terms(const Eigen::VectorXd& f, const IndexedFeedback& fb,
                                 const LikelihoodParams& lp);

/// log P(D | f) + log N(f; 0, K) up to an additive constant. K is the
/// noiseless Gram matrix over dq.inputs(); it is factored with the standard
/// jitter schedule.
double qual_log_posterior(const Eigen::VectorXd& f, const QualDataset& dq, const Eigen::MatrixXd& k,
                          const LikelihoodParams& lp);

/// Analytic gradient of qual_log_posterior with respect to f.
Eigen::VectorXd qual_log_posterior_gradient(const Eigen::VectorXd& f, const QualDataset& dq,
                                            const Eigen::MatrixXd& k, const LikelihoodParams& lp);

struct LaplaceOptions {
    double gradient_tol = 1e-6;
    int max_iterations = 100;
};

/// Laplace approximation of the latent challenge posterior.
struct LaplaceFit {
    std::vector<double> inputs;
    Eigen::VectorXd f_hat;
    /// Negative Hessian of the log-likelihood at f_hat, projected to PSD.
    Eigen::MatrixXd w;
    /// Noiseless Gram matrix over `inputs`.
    Eigen::MatrixXd k;
    double jitter = 0.0;
    bool converged = true;
    int iterations = 0;
    double gradient_norm = 0.0;
};

LaplaceFit fit_laplace(const QualDataset& dq, const KernelParams& kp, const LikelihoodParams& lp,
                       const LaplaceOptions& opts = {});

/// Predictive latent challenge from a Laplace fit. Immutable after construction.
class QualGp {
public:
    QualGp(LaplaceFit fit, KernelParams kp);

    PosteriorGaussian predict(double x_star) const;

    const LaplaceFit& fit() const { return fit_; }
    const KernelParams& kernel() const { return kp_; }

private:
    LaplaceFit fit_;
    KernelParams kp_;
    Eigen::VectorXd alpha_;            // K^-1 f_hat
    Eigen::MatrixXd w_sqrt_;           // symmetric square root of W
    Eigen::LLT<Eigen::MatrixXd> b_;    // I + W^1/2 K W^1/2
};

PosteriorGaussian qual_posterior(const LaplaceFit& fit, double x_star, const KernelParams& kp);

/// Symmetric PSD projection: negative eigenvalues are clipped to zero.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m);

}  // namespace hilpareto::gp
