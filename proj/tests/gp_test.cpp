#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hilpareto/common/errors.hpp"
#include "hilpareto/common/random.hpp"
#include "hilpareto/gp/kernel.hpp"
#include "hilpareto/gp/likelihood.hpp"
#include "hilpareto/gp/numeric_gp.hpp"
#include "hilpareto/gp/qual_gp.hpp"
#include "support/oracles.hpp"

using namespace hilpareto;
using namespace hilpareto::gp;

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("rbf kernel closed form") {
    CHECK(rbf_kernel(0.3, 0.3, 5.0) == 1.0);
    CHECK(rbf_kernel(0.0, 1.0, 5.0) == doctest::Approx(0.00673794699908546709).epsilon(1e-14));
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const double a = uniform01(rng), b = uniform01(rng);
        CHECK(rbf_kernel(a, b, 5.0) == rbf_kernel(b, a, 5.0));
        CHECK(rbf_kernel(a, b, 5.0) > 0.0);
        CHECK(rbf_kernel(a, b, 5.0) <= 1.0);
    }
    CHECK_THROWS_AS(rbf_kernel(std::nan(""), 0.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(rbf_kernel(0.0, INFINITY, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(rbf_kernel(0.0, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("gram matrices factor with base jitter for distinct inputs") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x;
        const int n = 2 + static_cast<int>(uniform_index(rng, 20));
        for (int i = 0; i < n; ++i) x.push_back(uniform01(rng));
        std::sort(x.begin(), x.end());
        x.erase(std::unique(x.begin(), x.end()), x.end());
        const auto k = gram_matrix(x, KernelParams{});
        CHECK((k - k.transpose()).norm() == 0.0);
        CHECK_NOTHROW(factor_with_jitter(k, kBaseJitter));
    }
}

TEST_CASE("standardize_scores") {
    CHECK(standardize_scores(std::vector<double>{0.5}) == std::vector<double>{0.0});
    const auto y = standardize_scores(std::vector<double>{0.2, 0.8});
    CHECK(y[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(standardize_scores(std::vector<double>{0.3, 0.3, 0.3}) == std::vector<double>(3, 0.0));
    CHECK_THROWS_AS(standardize_scores(std::vector<double>{}), std::invalid_argument);

    Rng rng(3);
    std::vector<double> s;
    for (int i = 0; i < 25; ++i) s.push_back(uniform01(rng));
    const auto z = standardize_scores(s);
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::sqrt(var / z.size()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("NumericDataset restandardizes after every append") {
    NumericDataset d;
    d.append(0.2, 0.2);
    CHECK(d.y()[0] == 0.0);
    CHECK(d.to_raw(0.0) == 0.2);
    d.append(0.8, 0.8);
    CHECK(d.y()[0] == doctest::Approx(-1.0));
    CHECK(d.y()[1] == doctest::Approx(1.0));
    CHECK(d.score_mean() == doctest::Approx(0.5));
    CHECK(d.score_std() == doctest::Approx(0.3));
    CHECK(d.to_raw(1.0) == doctest::Approx(0.8));
    CHECK_THROWS_AS(d.append(1.5, 0.1), std::invalid_argument);
}

TEST_CASE("num_posterior: prior and dense-solve oracle") {
    const KernelParams kp{5.0};
    const auto prior = num_posterior(NumericDataset{}, 0.37, 0.1, kp);
    CHECK(prior.mean == 0.0);
    CHECK(prior.variance == 1.0);

    NumericDataset d({0.2, 0.8}, {0.2, 0.8});  // y = (-1, +1)
    const auto post = num_posterior(d, 0.2, 0.1, kp);
    const auto [m, v] = oracle::dense_gp_posterior({0.2, 0.8}, {-1.0, 1.0}, 0.1, 5.0, 0.2);
    CHECK(std::abs(post.mean - m) < 1e-10);
    CHECK(std::abs(post.variance - v) < 1e-10);

    Rng rng(21);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x, s;
        const int n = 1 + static_cast<int>(uniform_index(rng, 10));
        for (int i = 0; i < n; ++i) {
            x.push_back(uniform01(rng));
            s.push_back(uniform01(rng));
        }
        NumericDataset ds(x, s);
        const std::vector<double> y(ds.y().begin(), ds.y().end());
        NumericGp gp(ds, 0.1, kp);
        for (int q = 0; q < 5; ++q) {
            const double xs = uniform01(rng);
            const auto p = gp.predict(xs);
            const auto [om, ov] = oracle::dense_gp_posterior(x, y, 0.1, 5.0, xs);
            CHECK(std::abs(p.mean - om) < 1e-8);
            CHECK(std::abs(p.variance - ov) < 1e-8);
            CHECK(p.variance >= 0.0);
            CHECK(p.variance <= 1.0);
        }
    }
}

TEST_CASE("num_posterior rejects out-of-range queries") {
    NumericDataset d({0.5}, {0.5});
    CHECK_THROWS_AS(num_posterior(d, 1.2, 0.1, KernelParams{}), std::invalid_argument);
    CHECK_THROWS_AS(num_posterior(d, 0.5, -0.1, KernelParams{}), std::invalid_argument);
}

TEST_CASE("num_posterior with zero noise and duplicate inputs escalates jitter") {
    NumericDataset d({0.5, 0.5}, {0.2, 0.8});
    NumericGp gp(d, 0.0, KernelParams{});
    const auto p = gp.predict(0.5);
    CHECK(std::isfinite(p.mean));
    CHECK(p.variance >= 0.0);
}

TEST_CASE("ordinal probabilities") {
    const LikelihoodParams lp;
    CHECK(ordinal_prob(0.0, OrdinalLabel::moderate, lp) == doctest::Approx(0.382924922548026207).epsilon(1e-12));
    CHECK(ordinal_prob(INFINITY, OrdinalLabel::hard, lp) == 1.0);
    CHECK(ordinal_prob(-INFINITY, OrdinalLabel::easy, lp) == 1.0);
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double f = -8.0 + 16.0 * uniform01(rng);
        double sum = 0.0;
        for (auto l : {OrdinalLabel::easy, OrdinalLabel::moderate, OrdinalLabel::hard}) {
            const double p = ordinal_prob(f, l, lp);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("pairwise probabilities") {
    const LikelihoodParams lp;
    CHECK(pairwise_prob(0.7, 0.7, lp) == 0.5);
    CHECK(pairwise_prob(1.0 + lp.c_p, 1.0, lp) == doctest::Approx(0.841344746068542948).epsilon(1e-12));
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double a = 6.0 * uniform01(rng) - 3.0, b = 6.0 * uniform01(rng) - 3.0;
        CHECK(std::abs(pairwise_prob(a, b, lp) + pairwise_prob(b, a, lp) - 1.0) < 1e-15);
    }
}

TEST_CASE("labels and preferences round-trip through their wire names") {
    for (auto l : {OrdinalLabel::easy, OrdinalLabel::moderate, OrdinalLabel::hard})
        CHECK(parse_label(to_string(l)) == l);
    for (auto p : {Preference::current_harder, Preference::previous_harder})
        CHECK(parse_preference(to_string(p)) == p);
    CHECK_FALSE(parse_label("medium").has_value());
    CHECK_FALSE(parse_preference("both").has_value());
}

TEST_CASE("likelihood parameter validation") {
    LikelihoodParams lp;
    lp.t1 = 0.5;
    lp.t2 = -0.5;
    CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
    lp = LikelihoodParams{};
    lp.c_p = 0.0;
    CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
}

TEST_CASE("qualitative log posterior") {
    const LikelihoodParams lp;
    const KernelParams kp;

    SUBCASE("single ordinal label equals log-likelihood plus prior term") {
        QualDataset dq;
        dq.ordinal.push_back({0.4, OrdinalLabel::hard});
        const auto k = gram_matrix(dq.inputs(), kp);
        Eigen::VectorXd f(1);
        f << 0.3;
        const double prior = -0.5 * 0.3 * 0.3 / (1.0 + kBaseJitter);
        CHECK(qual_log_posterior(f, dq, k, lp) ==
              doctest::Approx(std::log(ordinal_prob(0.3, OrdinalLabel::hard, lp)) + prior).epsilon(1e-12));
    }

    SUBCASE("prior mode at the origin for uninformative feedback") {
        QualDataset dq;
        dq.pairwise.push_back({0.3, 0.3, Preference::current_harder});
        const auto k = gram_matrix(dq.inputs(), kp);
        const auto g = qual_log_posterior_gradient(Eigen::VectorXd::Zero(1), dq, k, lp);
        CHECK(g.norm() == 0.0);
    }

    SUBCASE("moving toward a hard label increases the log posterior") {
        QualDataset dq;
        for (int i = 0; i < 4; ++i) dq.ordinal.push_back({0.1, OrdinalLabel::hard});
        const auto k = gram_matrix(dq.inputs(), kp);
        double prev = -INFINITY;
        for (double v = -1.0; v <= 0.6; v += 0.2) {
            Eigen::VectorXd f(1);
            f << v;
            const double cur = qual_log_posterior(f, dq, k, lp);
            CHECK(cur > prev);
            const auto fd = oracle::fd_gradient(
                [&](const std::vector<double>& z) { return qual_log_posterior(to_eigen(z), dq, k, lp); },
                {v}, 1e-5);
            CHECK(fd[0] > 0.0);
            prev = cur;
        }
    }

    SUBCASE("analytic gradient matches central differences") {
        Rng rng(17);
        for (int rep = 0; rep < 50; ++rep) {
            QualDataset dq;
            const int n = 2 + static_cast<int>(uniform_index(rng, 6));
            std::vector<double> xs;
            for (int i = 0; i < n; ++i) xs.push_back(std::round(uniform01(rng) * 100.0) / 100.0);
            for (int i = 0; i < n; ++i) {
                dq.ordinal.push_back({xs[i], static_cast<OrdinalLabel>(1 + uniform_index(rng, 3))});
                if (i > 0)
                    dq.pairwise.push_back({xs[i - 1], xs[i],
                                           uniform01(rng) < 0.5 ? Preference::current_harder
                                                                : Preference::previous_harder});
            }
            const auto inputs = dq.inputs();
            const auto k = gram_matrix(inputs, kp);
            std::vector<double> f(inputs.size());
            for (auto& v : f) v = 3.0 * uniform01(rng) - 1.5;
            const auto g = to_std(qual_log_posterior_gradient(to_eigen(f), dq, k, lp));
            const auto fd = oracle::fd_gradient(
                [&](const std::vector<double>& z) { return qual_log_posterior(to_eigen(z), dq, k, lp); }, f,
                1e-5);
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double scale = std::max(1.0, std::abs(fd[i]));
                CHECK(std::abs(g[i] - fd[i]) / scale < 1e-4);
            }
        }
    }
}

TEST_CASE("fit_laplace") {
    const LikelihoodParams lp;
    const KernelParams kp;

    SUBCASE("no feedback gives the prior mode") {
        const auto fit = fit_laplace(QualDataset{}, kp, lp);
        CHECK(fit.f_hat.size() == 0);
        CHECK(fit.converged);
        const auto p = qual_posterior(fit, 0.42, kp);
        CHECK(p.mean == 0.0);
        CHECK(p.variance == 1.0);
    }

    SUBCASE("two points with consistent feedback match the grid oracle") {
        QualDataset dq;
        dq.ordinal.push_back({0.2, OrdinalLabel::easy});
        dq.ordinal.push_back({0.7, OrdinalLabel::hard});
        dq.pairwise.push_back({0.2, 0.7, Preference::current_harder});
        const auto fit = fit_laplace(dq, kp, lp);
        REQUIRE(fit.converged);
        CHECK(fit.f_hat[1] > fit.f_hat[0]);
        CHECK(fit.gradient_norm < 1e-6);

        oracle::GridProblem g;
        g.inputs = {0.2, 0.7};
        g.ordinal = {{0, 1}, {1, 3}};
        g.pairwise = {{1, 0}};
        const auto map = oracle::grid_search_map(g);
        CHECK(std::abs(fit.f_hat[0] - map[0]) < 1e-2);
        CHECK(std::abs(fit.f_hat[1] - map[1]) < 1e-2);

        // Posterior mean at training inputs carries the sign implied by feedback.
        CHECK(qual_posterior(fit, 0.2, kp).mean < 0.0);
        CHECK(qual_posterior(fit, 0.7, kp).mean > 0.0);
    }

    SUBCASE("duplicate inputs merge into one coordinate") {
        QualDataset dq;
        dq.ordinal.push_back({0.5, OrdinalLabel::hard});
        dq.ordinal.push_back({0.5, OrdinalLabel::hard});
        dq.pairwise.push_back({0.5, 0.5, Preference::previous_harder});
        const auto fit = fit_laplace(dq, kp, lp);
        CHECK(fit.inputs.size() == 1);
        CHECK(fit.converged);
        CHECK(fit.f_hat[0] > 0.0);
    }

    SUBCASE("W is symmetric PSD and the gradient vanishes at random problems") {
        Rng rng(23);
        for (int rep = 0; rep < 40; ++rep) {
            QualDataset dq;
            double prev = -1.0;
            const int n = 1 + static_cast<int>(uniform_index(rng, 10));
            for (int i = 0; i < n; ++i) {
                const double x = static_cast<double>(uniform_index(rng, 201)) / 200.0;
                dq.ordinal.push_back({x, static_cast<OrdinalLabel>(1 + uniform_index(rng, 3))});
                if (prev >= 0.0)
                    dq.pairwise.push_back({prev, x,
                                           uniform01(rng) < 0.5 ? Preference::current_harder
                                                                : Preference::previous_harder});
                prev = x;
            }
            const auto fit = fit_laplace(dq, kp, lp);
            CHECK(fit.converged);
            CHECK((fit.w - fit.w.transpose()).norm() < 1e-12);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.w);
            CHECK(es.eigenvalues().minCoeff() > -1e-10);
            const auto g = qual_log_posterior_gradient(fit.f_hat, dq, fit.k, lp);
            CHECK(g.lpNorm<Eigen::Infinity>() < 1e-6);

            const QualGp model(fit, kp);
            for (int q = 0; q <= 200; q += 10) {
                const double x = q / 200.0;
                const auto p = model.predict(x);
                CHECK(p.variance >= 0.0);
                CHECK(p.variance <= 1.0);
                CHECK(std::abs(p.mean - model.predict(std::min(1.0, x + 1e-6)).mean) < 1e-4);
            }
        }
    }
}

TEST_CASE("posterior variance uses the W-free form when W is singular") {
    // A single pairwise item constrains only the difference of two latents,
    // so W has rank one. Compare against (K + W^-1)^-1 computed in the limit
    // W + eps I, eps -> 0, evaluated via the same identity with a dense solve.
    const LikelihoodParams lp;
    const KernelParams kp;
    QualDataset dq;
    dq.pairwise.push_back({0.2, 0.8, Preference::current_harder});
    const auto fit = fit_laplace(dq, kp, lp);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.w);
    CHECK(std::abs(es.eigenvalues()[0]) < 1e-12);

    const double xs = 0.35;
    const auto p = qual_posterior(fit, xs, kp);
    const double eps = 1e-9;
    oracle::Matrix a(2, std::vector<double>(2));
    const oracle::Matrix wreg = {{fit.w(0, 0) + eps, fit.w(0, 1)}, {fit.w(1, 0), fit.w(1, 1) + eps}};
    const auto winv = oracle::invert(wreg);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a[i][j] = fit.k(i, j) + (i == j ? fit.jitter : 0.0) + winv[i][j];
    const std::vector<double> k = {oracle::rbf(0.2, xs, 5.0), oracle::rbf(0.8, xs, 5.0)};
    const auto v = oracle::gauss_solve(a, k);
    const double var = 1.0 - (k[0] * v[0] + k[1] * v[1]);
    CHECK(p.variance == doctest::Approx(var).epsilon(1e-6));
}

TEST_CASE("grid-search MAP oracle agreement for three coordinates") {
    const LikelihoodParams lp;
    const KernelParams kp;
    QualDataset dq;
    dq.ordinal = {{0.1, OrdinalLabel::hard}, {0.5, OrdinalLabel::moderate}, {0.9, OrdinalLabel::easy}};
    dq.pairwise = {{0.1, 0.5, Preference::previous_harder}, {0.5, 0.9, Preference::previous_harder}};
    const auto fit = fit_laplace(dq, kp, lp);
    REQUIRE(fit.converged);
    oracle::GridProblem g;
    g.inputs = {0.1, 0.5, 0.9};
    g.ordinal = {{0, 3}, {1, 2}, {2, 1}};
    g.pairwise = {{0, 1}, {1, 2}};
    const auto map = oracle::grid_search_map(g);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(fit.f_hat[i] - map[i]) < 1e-2);
}

TEST_CASE("consistent preferences recover a monotone latent ordering") {
    const LikelihoodParams lp;
    const KernelParams kp;
    auto truth = [](double x) { return 2.5 - 5.0 * x; };
    Rng rng(31);
    std::vector<double> order;
    for (int i = 0; i <= 20; ++i) order.push_back(i / 20.0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
    QualDataset dq;
    for (std::size_t i = 1; i < order.size(); ++i) {
        const bool curr_harder = truth(order[i]) > truth(order[i - 1]);
        dq.pairwise.push_back({order[i - 1], order[i],
                               curr_harder ? Preference::current_harder : Preference::previous_harder});
    }
    REQUIRE(dq.pairwise.size() == 20);
    const auto fit = fit_laplace(dq, kp, lp);
    REQUIRE(fit.converged);
    std::vector<double> mu, g;
    for (double x : fit.inputs) {
        mu.push_back(qual_posterior(fit, x, kp).mean);
        g.push_back(truth(x));
    }
    CHECK(oracle::kendall_tau(mu, g) >= 0.9);
}
