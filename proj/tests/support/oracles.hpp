#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing in here calls into the library's numerical code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) throw std::runtime_error("singular");
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= m * a[c][k];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

inline Matrix invert(const Matrix& a) {
    const std::size_t n = a.size();
    Matrix inv(n, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        const auto col = gauss_solve(a, e);
        for (std::size_t i = 0; i < n; ++i) inv[i][j] = col[i];
    }
    return inv;
}

inline double rbf(double a, double b, double theta) { return std::exp(-theta * (a - b) * (a - b)); }

inline double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// GP posterior by explicit dense solves of (K + s2 I).
inline std::pair<double, double> dense_gp_posterior(const std::vector<double>& x, const std::vector<double>& y,
                                                    double s2, double theta, double xs) {
    const std::size_t n = x.size();
    if (n == 0) return {0.0, 1.0};
    Matrix a(n, std::vector<double>(n));
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = rbf(x[i], x[j], theta) + (i == j ? s2 : 0.0);
        k[i] = rbf(x[i], xs, theta);
    }
    const auto alpha = gauss_solve(a, y);
    const auto v = gauss_solve(a, k);
    double mean = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += k[i] * alpha[i];
        quad += k[i] * v[i];
    }
    return {mean, 1.0 - quad};
}

/// Central finite-difference gradient.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

/// Feedback for the grid-search MAP oracle, already expressed on coordinates.
struct GridProblem {
    std::vector<double> inputs;
    double theta = 5.0;
    double jitter = 1e-8;
    double c_o = 1.0, c_p = 0.5, t1 = -0.5, t2 = 0.5;
    std::vector<std::pair<std::size_t, int>> ordinal;             // coordinate, label 1..3
    std::vector<std::pair<std::size_t, std::size_t>> pairwise;    // (harder, easier)
};

inline double clamp_p(double p) { return std::min(std::max(p, 1e-12), 1.0 - 1e-12); }

inline double ordinal_p(const GridProblem& g, double f, int label) {
    const double inf = std::numeric_limits<double>::infinity();
    const double t[4] = {-inf, g.t1, g.t2, inf};
    const double hi = label == 3 ? 1.0 : phi_cdf((t[label] - f) / g.c_o);
    const double lo = label == 1 ? 0.0 : phi_cdf((t[label - 1] - f) / g.c_o);
    return hi - lo;
}

/// Exhaustive search over a lattice of step `step` on [lo, hi]^n, n <= 3.
inline std::vector<double> grid_search_map(const GridProblem& g, double lo = -3.0, double hi = 3.0,
                                           double step = 0.01) {
    const std::size_t n = g.inputs.size();
    if (n == 0 || n > 3) throw std::invalid_argument("grid oracle supports 1..3 coordinates");
    const auto m = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
    std::vector<double> vals(m);
    for (std::size_t i = 0; i < m; ++i) vals[i] = lo + step * static_cast<double>(i);

    Matrix k(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) k[i][j] = rbf(g.inputs[i], g.inputs[j], g.theta) + (i == j ? g.jitter : 0.0);
    const Matrix p = invert(k);

    // Per-coordinate ordinal tables.
    std::vector<std::vector<double>> unary(n, std::vector<double>(m, 0.0));
    for (const auto& [c, label] : g.ordinal)
        for (std::size_t i = 0; i < m; ++i) unary[c][i] += std::log(clamp_p(ordinal_p(g, vals[i], label)));
    // Pairwise tables indexed by lattice difference (harder - easier).
    std::vector<double> diff(2 * m - 1);
    for (std::size_t d = 0; d < 2 * m - 1; ++d) {
        const double delta = step * (static_cast<double>(d) - static_cast<double>(m - 1));
        diff[d] = std::log(clamp_p(phi_cdf(delta / g.c_p)));
    }
    auto pair_term = [&](const std::size_t* idx) {
        double s = 0.0;
        for (const auto& [w, l] : g.pairwise)
            s += diff[idx[w] + (m - 1) - idx[l]];
        return s;
    };

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx[3] = {0, 0, 0};
    std::size_t idx[3] = {0, 0, 0};
    const std::size_t m1 = m, m2 = n >= 2 ? m : 1, m3 = n >= 3 ? m : 1;
    for (idx[0] = 0; idx[0] < m1; ++idx[0]) {
        for (idx[1] = 0; idx[1] < m2; ++idx[1]) {
            for (idx[2] = 0; idx[2] < m3; ++idx[2]) {
                double f[3];
                double v = 0.0;
                for (std::size_t c = 0; c < n; ++c) {
                    f[c] = vals[idx[c]];
                    v += unary[c][idx[c]];
                }
                double quad = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) quad += f[i] * p[i][j] * f[j];
                v += pair_term(idx) - 0.5 * quad;
                if (v > best) {
                    best = v;
                    std::copy(idx, idx + 3, best_idx);
                }
            }
        }
    }
    std::vector<double> out(n);
    for (std::size_t c = 0; c < n; ++c) out[c] = vals[best_idx[c]];
    return out;
}

/// Kendall tau-a between two equally long sequences.
inline double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = (a[i] - a[j]) * (b[i] - b[j]);
            if (s > 0) ++concordant;
            else if (s < 0) ++discordant;
        }
    return static_cast<double>(concordant - discordant) / (0.5 * static_cast<double>(n * (n - 1)));
}

/// O(n^2) non-dominance filter under joint maximization; returns kept indices.
/// Exact duplicates keep their first occurrence.
inline std::vector<std::size_t> brute_force_front(const std::vector<std::pair<double, double>>& pts) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (i == j) continue;
            const auto& p = pts[i];
            const auto& q = pts[j];
            const bool geq = q.first >= p.first && q.second >= p.second;
            const bool strict = q.first > p.first || q.second > p.second;
            if (geq && strict) dominated = true;
            if (p == q && j < i) dominated = true;
        }
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

/// Symmetric Hausdorff distance by a plain double loop.
inline double hausdorff(const std::vector<std::pair<double, double>>& a,
                        const std::vector<std::pair<double, double>>& b) {
    auto directed = [](const auto& from, const auto& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& q : to)
                nearest = std::min(nearest, std::hypot(p.first - q.first, p.second - q.second));
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace oracle
