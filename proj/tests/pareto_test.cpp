#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "hilpareto/common/random.hpp"
#include "hilpareto/pareto/analysis.hpp"
#include "hilpareto/pareto/front.hpp"
#include "support/oracles.hpp"

using namespace hilpareto;
using namespace hilpareto::pareto;

namespace {

using Pts = std::vector<std::pair<double, double>>;

ParetoFront front_of(const Pts& objectives) {
    std::vector<ObjectivePoint> pts;
    for (std::size_t i = 0; i < objectives.size(); ++i)
        pts.push_back({static_cast<double>(i) / std::max<std::size_t>(1, objectives.size() - 1), objectives[i].first,
                       objectives[i].second});
    return make_front(std::move(pts));
}

ParetoFront linear_front(int n) {
    Pts o;
    for (int i = 0; i <= n; ++i) o.emplace_back(i / double(n), 1.0 - i / double(n));
    return front_of(o);
}

ModelCurves curves(const std::vector<double>& grid, const std::vector<double>& score, const std::vector<double>& chall) {
    ModelCurves c;
    c.grid = grid;
    c.score_mean = score;
    c.chall_mean = chall;
    c.score_std.assign(grid.size(), 0.1);
    c.chall_std.assign(grid.size(), 0.1);
    return c;
}

Pts random_cloud(Rng& rng, int n, bool coarse) {
    Pts p;
    for (int i = 0; i < n; ++i) {
        double a = uniform01(rng), b = uniform01(rng);
        if (coarse) {
            a = std::floor(a * 5) / 5;
            b = std::floor(b * 5) / 5;
        }
        p.emplace_back(a, b);
    }
    return p;
}

}  // namespace

TEST_CASE("non_dominated basic cases") {
    CHECK(non_dominated(Pts{{1, 1}, {0, 0}}) == std::vector<std::size_t>{0});
    CHECK(non_dominated(Pts{{1, 0}, {0, 1}, {0.5, 0.5}}) == std::vector<std::size_t>{0, 1, 2});
    CHECK(non_dominated(Pts{{0.5, 0.5}, {0.5, 0.5}, {0.2, 0.1}}) == std::vector<std::size_t>{0});
    CHECK(non_dominated(Pts{{1, 0}, {1, 0.5}}) == std::vector<std::size_t>{1});
    CHECK(non_dominated(Pts{}).empty());
    CHECK_THROWS(non_dominated(Pts{{std::nan(""), 0}}));
}

TEST_CASE("non_dominated matches the quadratic filter and is idempotent") {
    Rng rng(17);
    for (int rep = 0; rep < 200; ++rep) {
        const Pts cloud = random_cloud(rng, 100, rep % 2 == 1);
        const auto got = non_dominated(cloud);
        CHECK(got == oracle::brute_force_front(cloud));
        Pts sub;
        for (auto i : got) sub.push_back(cloud[i]);
        const auto again = non_dominated(sub);
        CHECK(again.size() == sub.size());
    }
}

TEST_CASE("make_front keeps a mutually non-dominated subset ordered by assistance") {
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const ParetoFront f = front_of(random_cloud(rng, 60, false));
        for (std::size_t i = 1; i < f.front.size(); ++i) CHECK(f.front[i - 1].assistance < f.front[i].assistance);
        for (const auto& p : f.front)
            for (const auto& q : f.front) {
                const bool dom = q.expected_score >= p.expected_score && q.expected_challenge >= p.expected_challenge &&
                                 (q.expected_score > p.expected_score || q.expected_challenge > p.expected_challenge);
                CHECK(!dom);
            }
        CHECK(f.all_points.size() == 60);
    }
}

TEST_CASE("select_designs on a linear front") {
    const ParetoFront f = linear_front(10);
    REQUIRE(f.front.size() == 11);
    const Selection all = select_designs(f, SelectionWindow::both(0.0, 1.0));
    CHECK(all.assistance.size() == 11);
    CHECK(!all.fallback);

    const SelectionWindow w = SelectionWindow::both(0.4, 0.8);
    // Enumeration: normalized score i/10 and normalized challenge 1 - i/10 both inside [0.4, 0.8].
    std::vector<double> want;
    for (int i = 0; i <= 10; ++i) {
        const double s = i / 10.0, c = 1.0 - i / 10.0;
        if (s >= 0.4 - 1e-12 && s <= 0.8 + 1e-12 && c >= 0.4 - 1e-12 && c <= 0.8 + 1e-12) want.push_back(i / 10.0);
    }
    const Selection got = select_designs(f, w);
    REQUIRE(got.assistance.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(got.assistance[i] == doctest::Approx(want[i]));
    CHECK(want.size() == 3);
}

TEST_CASE("select_designs normalizes by the front's own range") {
    Pts o;
    for (int i = 0; i <= 10; ++i) o.emplace_back(0.3 + 0.04 * i, 2.0 - 0.3 * i);
    const Selection got = select_designs(front_of(o), SelectionWindow::both(0.4, 0.8));
    CHECK(got.assistance.size() == 3);
    CHECK(got.assistance.front() == doctest::Approx(0.4));
}

TEST_CASE("select_designs degenerate axis and empty fallback") {
    const ParetoFront single = front_of(Pts{{0.5, 0.5}});
    const Selection s = select_designs(single, SelectionWindow::both(0.4, 0.8));
    CHECK(s.assistance.size() == 1);
    CHECK(!s.fallback);

    const ParetoFront two = front_of(Pts{{0.0, 1.0}, {1.0, 0.0}});
    const Selection e = select_designs(two, SelectionWindow::both(0.4, 0.6));
    CHECK(e.fallback);
    REQUIRE(e.assistance.size() == 1);

    CHECK_THROWS(select_designs(two, SelectionWindow{0.5, 0.4, 0.1, 0.2}));
    CHECK_THROWS(select_designs(ParetoFront{}, SelectionWindow{}));
}

TEST_CASE("enlarging the window never removes a design") {
    Rng rng(8);
    for (int rep = 0; rep < 300; ++rep) {
        const ParetoFront f = front_of(random_cloud(rng, 40, false));
        const double lo = 0.5 * uniform01(rng), hi = lo + 0.05 + (1 - lo - 0.05) * uniform01(rng);
        const SelectionWindow small = SelectionWindow::both(lo, hi);
        const SelectionWindow big{lo * uniform01(rng), hi + (1 - hi) * uniform01(rng), lo * uniform01(rng),
                                  hi + (1 - hi) * uniform01(rng)};
        const Selection a = select_designs(f, small);
        const Selection b = select_designs(f, big);
        if (a.fallback) continue;
        for (double x : a.assistance) CHECK(std::find(b.assistance.begin(), b.assistance.end(), x) != b.assistance.end());
    }
}

TEST_CASE("aggregate curves") {
    const std::vector<double> grid{0.0, 0.5, 1.0};
    const ModelCurves one = curves(grid, {0.1, 0.5, 0.9}, {1.0, 0.0, -1.0});
    SUBCASE("single participant is the identity") {
        const GroupCurves g = aggregate_curves(std::vector<ModelCurves>{one});
        CHECK(g.score_mean == one.score_mean);
        CHECK(g.chall_mean == one.chall_mean);
    }
    SUBCASE("mirrored challenge cancels") {
        const ModelCurves mirror = curves(grid, {0.1, 0.5, 0.9}, {-1.0, 0.0, 1.0});
        const GroupCurves g = aggregate_curves(std::vector<ModelCurves>{one, mirror});
        for (double c : g.chall_mean) CHECK(c == 0.0);
    }
    SUBCASE("pointwise sample mean and permutation invariance") {
        Rng rng(2);
        std::vector<ModelCurves> group;
        for (int p = 0; p < 7; ++p) {
            std::vector<double> s, c;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                s.push_back(uniform01(rng));
                c.push_back(standard_normal(rng));
            }
            group.push_back(curves(grid, s, c));
        }
        const GroupCurves g = aggregate_curves(group);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double s = 0, c = 0;
            for (const auto& m : group) {
                s += m.score_mean[i];
                c += m.chall_mean[i];
            }
            CHECK(g.score_mean[i] == doctest::Approx(s / 7).epsilon(1e-14));
            CHECK(g.chall_mean[i] == doctest::Approx(c / 7).epsilon(1e-14));
        }
        std::reverse(group.begin(), group.end());
        const GroupCurves r = aggregate_curves(group);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(r.score_mean[i] == doctest::Approx(g.score_mean[i]).epsilon(1e-14));
    }
    SUBCASE("errors") {
        CHECK_THROWS(aggregate_curves(std::vector<ModelCurves>{}));
        const ModelCurves other = curves({0.0, 1.0}, {0.1, 0.2}, {0.0, 0.0});
        CHECK_THROWS(aggregate_curves(std::vector<ModelCurves>{one, other}));
    }
}

TEST_CASE("quantiles interpolate linearly") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 1.0) == 4.0);
    CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("bootstrap of identical participants has zero width") {
    const std::vector<double> grid{0.0, 0.5, 1.0};
    const std::vector<ModelCurves> pre(5, curves(grid, {0.1, 0.2, 0.3}, {0, 0, 0}));
    const std::vector<ModelCurves> post(5, curves(grid, {0.3, 0.3, 0.3}, {0, 0, 0}));
    const ChangeIntervals ci = bootstrap_change_ci(pre, post, 5000, 0.95, 1);
    CHECK(!ci.degenerate);
    CHECK(ci.replicates == 5000);
    for (const auto& p : ci.points) {
        CHECK(p.hi - p.lo == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(p.lo == doctest::Approx(p.mean_change).epsilon(1e-12));
    }
    CHECK(ci.points[0].mean_change == doctest::Approx(0.2));

    const ChangeIntervals single = bootstrap_change_ci(std::span(pre).first(1), std::span(post).first(1), 100, 0.95, 1);
    CHECK(single.degenerate);
    CHECK(single.points[2].hi == single.points[2].lo);
}

TEST_CASE("bootstrap is seeded and brackets the cohort estimate") {
    Rng rng(99);
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    std::vector<ModelCurves> pre, post;
    for (int p = 0; p < 12; ++p) {
        std::vector<double> a, b, z(grid.size(), 0.0);
        for (double x : grid) {
            const double base = 0.2 + 0.6 * x + 0.1 * standard_normal(rng);
            a.push_back(base);
            b.push_back(base + 0.1 * std::sin(3 * x) + 0.1 * standard_normal(rng));
        }
        pre.push_back(curves(grid, a, z));
        post.push_back(curves(grid, b, z));
    }
    const ChangeIntervals c1 = bootstrap_change_ci(pre, post, 1000, 0.95, 5);
    const ChangeIntervals c2 = bootstrap_change_ci(pre, post, 1000, 0.95, 5);
    const ChangeIntervals c3 = bootstrap_change_ci(pre, post, 1000, 0.95, 6);
    int bracketed = 0;
    bool differs = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(c1.points[i].lo == c2.points[i].lo);
        CHECK(c1.points[i].hi == c2.points[i].hi);
        CHECK(c1.points[i].boot_mean == c2.points[i].boot_mean);
        differs |= c1.points[i].lo != c3.points[i].lo;
        if (c1.points[i].lo <= c1.points[i].mean_change && c1.points[i].mean_change <= c1.points[i].hi) ++bracketed;
        CHECK(c1.points[i].lo <= c1.points[i].hi);
    }
    CHECK(differs);
    CHECK(bracketed >= static_cast<int>(std::ceil(0.99 * grid.size())));

    CHECK_THROWS(bootstrap_change_ci(pre, std::span(post).first(3), 100, 0.95, 1));
    CHECK_THROWS(bootstrap_change_ci(pre, post, 0, 0.95, 1));
    CHECK_THROWS(bootstrap_change_ci(pre, post, 10, 1.0, 1));
}

TEST_CASE("percentile intervals reach nominal coverage on synthetic cohorts") {
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    auto shift = [](double x) { return 0.15 * x - 0.05; };
    const int reps = 500, n = 40;
    int covered = 0, total = 0;
    Rng rng(2024);
    for (int r = 0; r < reps; ++r) {
        std::vector<ModelCurves> pre, post;
        for (int p = 0; p < n; ++p) {
            std::vector<double> a, b, z(grid.size(), 0.0);
            const double level = 0.5 + 0.2 * standard_normal(rng);
            for (double x : grid) {
                a.push_back(level + 0.3 * x);
                b.push_back(level + 0.3 * x + shift(x) + 0.1 * standard_normal(rng));
            }
            pre.push_back(curves(grid, a, z));
            post.push_back(curves(grid, b, z));
        }
        const ChangeIntervals ci = bootstrap_change_ci(pre, post, 5000, 0.95, derive_seed(7, {std::uint64_t(r)}));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double truth = shift(grid[i]);
            covered += ci.points[i].lo <= truth && truth <= ci.points[i].hi;
            ++total;
        }
    }
    const double rate = static_cast<double>(covered) / total;
    MESSAGE("coverage " << rate);
    CHECK(rate >= 0.92);
    CHECK(rate <= 0.98);
}

TEST_CASE("front hausdorff") {
    const ParetoFront a = linear_front(10);
    CHECK(front_hausdorff(a, a) == 0.0);

    Pts shifted;
    for (int i = 0; i <= 10; ++i) shifted.emplace_back(i / 10.0 + 0.1, 1.0 - i / 10.0);
    // A rigid shift along the score axis, measured on the same normalized axes.
    Pts base;
    for (int i = 0; i <= 10; ++i) base.emplace_back(i / 10.0, 0.0);
    Pts moved;
    for (int i = 0; i <= 10; ++i) moved.emplace_back(i / 10.0, 0.1);
    CHECK(hausdorff(base, moved) == doctest::Approx(0.1));

    std::vector<ObjectivePoint> p1, p2;
    for (int i = 0; i <= 10; ++i) {
        p1.push_back({i / 10.0, 2.0 * i / 10.0, 4.0});
        p2.push_back({i / 10.0, 2.0 * i / 10.0, 4.4});
    }
    ParetoFront f1, f2;
    f1.front = p1;
    f2.front = p2;
    CHECK(front_hausdorff(f1, f2, {2.0, 4.0}) == doctest::Approx(0.1));
    CHECK_THROWS(front_hausdorff(f1, f2, {0.0, 1.0}));

    Rng rng(12);
    for (int rep = 0; rep < 100; ++rep) {
        const Pts x = random_cloud(rng, 1 + rep % 30, false);
        const Pts y = random_cloud(rng, 1 + (rep * 7) % 25, false);
        CHECK(hausdorff(x, y) == doctest::Approx(oracle::hausdorff(x, y)).epsilon(1e-15));
        CHECK(hausdorff(x, y) == hausdorff(y, x));
    }
}

TEST_CASE("capacity-normalized hausdorff ignores affine rescaling of either axis") {
    Pts o;
    for (int i = 0; i <= 20; ++i) o.emplace_back(std::sqrt(i / 20.0), 1.0 - i / 20.0);
    Pts scaled;
    for (const auto& [s, c] : o) scaled.emplace_back(0.2 + 0.5 * s, -3.0 + 0.25 * c);
    CHECK(normalized_hausdorff(front_of(o), front_of(scaled)) == doctest::Approx(0.0).epsilon(1e-12));
    const auto n = capacity_normalized(front_of(scaled));
    CHECK(n.front().first == doctest::Approx(0.0));
    CHECK(n.back().first == doctest::Approx(1.0));
}

TEST_CASE("window summary pools selected levels") {
    const std::vector<ParetoFront> fronts{linear_front(10), linear_front(10)};
    const WindowSummary s = summarize_window(fronts, SelectionWindow::both(0.4, 0.8));
    CHECK(s.n_selected == 6);
    CHECK(s.n_fallback == 0);
    CHECK(s.mean_assistance == doctest::Approx(0.5));
    CHECK(s.std_assistance == doctest::Approx(std::sqrt(2.0 / 300.0)));
}

TEST_CASE("window summary leaves out participants whose window is empty") {
    Pts two{{0.0, 1.0}, {1.0, 0.0}};
    const std::vector<ParetoFront> fronts{linear_front(10), front_of(two)};
    const WindowSummary s = summarize_window(fronts, SelectionWindow::both(0.4, 0.6));
    CHECK(s.n_fallback == 1);
    CHECK(s.n_selected == 3);
    CHECK(s.mean_assistance == doctest::Approx(0.5));
}
