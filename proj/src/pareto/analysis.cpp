#include "hilpareto/pareto/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hilpareto/common/random.hpp"

namespace hilpareto::pareto {

namespace {

constexpr double kWindowTol = 1e-12;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    bool degenerate() const { return !(hi > lo); }
    double normalize(double v) const { return degenerate() ? 0.0 : (v - lo) / (hi - lo); }
};

std::pair<Range, Range> front_ranges(const ParetoFront& f) {
    if (f.front.empty()) throw std::invalid_argument("empty Pareto front");
    Range s{f.front[0].expected_score, f.front[0].expected_score};
    Range c{f.front[0].expected_challenge, f.front[0].expected_challenge};
    for (const auto& p : f.front) {
        s.lo = std::min(s.lo, p.expected_score);
        s.hi = std::max(s.hi, p.expected_score);
        c.lo = std::min(c.lo, p.expected_challenge);
        c.hi = std::max(c.hi, p.expected_challenge);
    }
    return {s, c};
}

bool inside(double v, double lo, double hi) { return v >= lo - kWindowTol && v <= hi + kWindowTol; }

}  // namespace

void SelectionWindow::validate() const {
    auto ok = [](double lo, double hi) { return lo >= 0.0 && hi <= 1.0 && lo < hi; };
    if (!ok(perf_lo, perf_hi) || !ok(chall_lo, chall_hi))
        throw std::invalid_argument("SelectionWindow: need 0 <= lo < hi <= 1 on both axes");
}

std::vector<std::pair<double, double>> capacity_normalized(const ParetoFront& front) {
    const auto [s, c] = front_ranges(front);
    std::vector<std::pair<double, double>> out;
    out.reserve(front.front.size());
    for (const auto& p : front.front) out.emplace_back(s.normalize(p.expected_score), c.normalize(p.expected_challenge));
    return out;
}

Selection select_designs(const ParetoFront& front, const SelectionWindow& window) {
    window.validate();
    const auto [s, c] = front_ranges(front);
    Selection out;
    for (const auto& p : front.front) {
        const bool in_s = s.degenerate() || inside(s.normalize(p.expected_score), window.perf_lo, window.perf_hi);
        const bool in_c =
            c.degenerate() || inside(c.normalize(p.expected_challenge), window.chall_lo, window.chall_hi);
        if (in_s && in_c) out.assistance.push_back(p.assistance);
    }
    if (out.assistance.empty()) {
        const double cs = 0.5 * (window.perf_lo + window.perf_hi);
        const double cc = 0.5 * (window.chall_lo + window.chall_hi);
        double best = std::numeric_limits<double>::infinity();
        double best_a = front.front.front().assistance;
        for (const auto& p : front.front) {
            const double ds = s.degenerate() ? 0.0 : s.normalize(p.expected_score) - cs;
            const double dc = c.degenerate() ? 0.0 : c.normalize(p.expected_challenge) - cc;
            const double d = std::hypot(ds, dc);
            if (d < best) {
                best = d;
                best_a = p.assistance;
            }
        }
        out.assistance.push_back(best_a);
        out.fallback = true;
    }
    std::sort(out.assistance.begin(), out.assistance.end());
    return out;
}

void ModelCurves::check_shape() const {
    const std::size_t n = grid.size();
    if (n == 0 || score_mean.size() != n || score_std.size() != n || chall_mean.size() != n ||
        chall_std.size() != n)
        throw std::invalid_argument("ModelCurves: curve lengths must match a non-empty grid");
}

ParetoFront front_from_curves(const ModelCurves& c, double t1, double t2) {
    c.check_shape();
    std::vector<ObjectivePoint> pts;
    pts.reserve(c.grid.size());
    for (std::size_t i = 0; i < c.grid.size(); ++i) pts.push_back({c.grid[i], c.score_mean[i], c.chall_mean[i]});
    return make_front(std::move(pts), t1, t2);
}

GroupCurves aggregate_curves(std::span<const ModelCurves> participants) {
    if (participants.empty()) throw std::invalid_argument("aggregate_curves: no participants");
    GroupCurves g;
    g.grid = participants[0].grid;
    const std::size_t n = g.grid.size();
    g.score_mean.assign(n, 0.0);
    g.chall_mean.assign(n, 0.0);
    for (const auto& m : participants) {
        m.check_shape();
        if (m.grid != g.grid) throw std::invalid_argument("aggregate_curves: participants use different grids");
        for (std::size_t i = 0; i < n; ++i) {
            g.score_mean[i] += m.score_mean[i];
            g.chall_mean[i] += m.chall_mean[i];
        }
    }
    const double k = static_cast<double>(participants.size());
    for (std::size_t i = 0; i < n; ++i) {
        g.score_mean[i] /= k;
        g.chall_mean[i] /= k;
    }
    g.participants.assign(participants.begin(), participants.end());
    return g;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ChangeIntervals bootstrap_change_ci(std::span<const ModelCurves> pre, std::span<const ModelCurves> post,
                                    int replicates, double confidence, std::uint64_t seed) {
    if (pre.empty() || pre.size() != post.size())
        throw std::invalid_argument("bootstrap_change_ci: need paired, non-empty pre/post model sets");
    if (replicates < 1) throw std::invalid_argument("bootstrap_change_ci: replicates must be >= 1");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("bootstrap_change_ci: confidence must lie in (0, 1)");

    const std::vector<double>& grid = pre[0].grid;
    const std::size_t g = grid.size();
    const std::size_t n = pre.size();
    std::vector<std::vector<double>> change(n, std::vector<double>(g));
    for (std::size_t p = 0; p < n; ++p) {
        pre[p].check_shape();
        post[p].check_shape();
        if (pre[p].grid != grid || post[p].grid != grid)
            throw std::invalid_argument("bootstrap_change_ci: all curves must share one grid");
        for (std::size_t i = 0; i < g; ++i) change[p][i] = post[p].score_mean[i] - pre[p].score_mean[i];
    }

    ChangeIntervals out;
    out.replicates = replicates;
    out.confidence = confidence;
    out.degenerate = n < 2;

    // Column-major replicate table: boot[i * B + r] is grid point i, replicate r.
    const auto b = static_cast<std::size_t>(replicates);
    std::vector<double> boot(g * b, 0.0);
    std::vector<std::size_t> pick(n);
    for (std::size_t r = 0; r < b; ++r) {
        Rng rng(derive_seed(seed, {r}));
        for (auto& k : pick) k = static_cast<std::size_t>(uniform_index(rng, n));
        for (std::size_t i = 0; i < g; ++i) {
            double acc = 0.0;
            for (std::size_t k : pick) acc += change[k][i];
            boot[i * b + r] = acc / static_cast<double>(n);
        }
    }

    const double alpha = 1.0 - confidence;
    out.points.resize(g);
    for (std::size_t i = 0; i < g; ++i) {
        auto col = std::span<double>(boot).subspan(i * b, b);
        double est = 0.0;
        for (std::size_t p = 0; p < n; ++p) est += change[p][i];
        ChangePoint& cp = out.points[i];
        cp.assistance = grid[i];
        cp.mean_change = est / static_cast<double>(n);
        cp.boot_mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(b);
        std::sort(col.begin(), col.end());
        cp.lo = quantile_sorted(col, alpha / 2.0);
        cp.hi = quantile_sorted(col, 1.0 - alpha / 2.0);
    }
    return out;
}

double hausdorff(std::span<const std::pair<double, double>> a, std::span<const std::pair<double, double>> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: empty point set");
    auto directed = [](auto from, auto to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& q : to) nearest = std::min(nearest, std::hypot(p.first - q.first, p.second - q.second));
            worst = std::max(worst, nearest);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

double front_hausdorff(const ParetoFront& a, const ParetoFront& b, AxisScaling scaling) {
    if (!(scaling.score > 0.0) || !(scaling.challenge > 0.0))
        throw std::invalid_argument("front_hausdorff: axis scales must be positive");
    auto scaled = [&](const ParetoFront& f) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(f.front.size());
        for (const auto& p : f.front)
            pts.emplace_back(p.expected_score / scaling.score, p.expected_challenge / scaling.challenge);
        return pts;
    };
    return hausdorff(scaled(a), scaled(b));
}

double normalized_hausdorff(const ParetoFront& a, const ParetoFront& b) {
    return hausdorff(capacity_normalized(a), capacity_normalized(b));
}

WindowSummary summarize_window(std::span<const ParetoFront> fronts, const SelectionWindow& window) {
    WindowSummary out;
    out.window = window;
    std::vector<double> pool;
    for (const auto& f : fronts) {
        Selection sel = select_designs(f, window);
        // A fallback point lies outside the window, so it is not a level the window yields.
        if (sel.fallback) {
            ++out.n_fallback;
            continue;
        }
        pool.insert(pool.end(), sel.assistance.begin(), sel.assistance.end());
    }
    out.n_selected = pool.size();
    if (pool.empty()) return out;
    const double k = static_cast<double>(pool.size());
    out.mean_assistance = std::accumulate(pool.begin(), pool.end(), 0.0) / k;
    double ss = 0.0;
    for (double v : pool) ss += (v - out.mean_assistance) * (v - out.mean_assistance);
    out.std_assistance = std::sqrt(ss / k);
    return out;
}

}  // namespace hilpareto::pareto
