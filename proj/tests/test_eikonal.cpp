#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hj/eikonal.hpp"
#include "hj/problems.hpp"

using namespace hj;

namespace {

std::shared_ptr<const RestrictedGrid> unit_grid(int dim, double step) {
    return std::make_shared<const RestrictedGrid>(
        RestrictedGrid::full(GridSpec::regular(BoxDomain::unit_cube(dim), step)));
}

// Residual of the upwind quadratic at u: the update must solve it exactly.
double quadratic_residual(double u, std::span<const double> a, double w) {
    double s = 0.0;
    for (double ai : a) {
        const double t = std::max(u - ai, 0.0);
        s += t * t;
    }
    return s - w * w;
}

}  // namespace

TEST_CASE("value transform round trip") {
    CHECK(kruzkov(0.0) == 0.0);
    CHECK(kruzkov(kInf) == 1.0);
    CHECK(inverse_kruzkov(0.0) == 0.0);
    CHECK(inverse_kruzkov(1.0) == kInf);
    std::mt19937 rng(11);
    // Transformed side first: v -> t -> v holds across all of [0, 1).
    std::uniform_real_distribution<double> v_dist(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double v = v_dist(rng);
        CHECK(std::abs(kruzkov(inverse_kruzkov(v)) - v) <= 1e-12);
    }
    // Time side: the inverse multiplies rounding error by e^t, so the 1e-12
    // round trip is only meaningful for moderate times (e^10 * eps ~ 2e-12).
    std::uniform_real_distribution<double> t_dist(0.0, 10.0);
    for (int i = 0; i < 500; ++i) {
        const double t = t_dist(rng);
        CHECK(std::abs(inverse_kruzkov(kruzkov(t)) - t) <= 1e-12 * std::max(1.0, t));
        const double v = kruzkov(t);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(kruzkov(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(inverse_kruzkov(1.5), std::invalid_argument);
    CHECK_THROWS_AS(inverse_kruzkov(-0.01), std::invalid_argument);
}

TEST_CASE("one-node update solves the upwind quadratic") {
    const auto grid = unit_grid(2, 0.1);
    const auto& spec = grid->spec();
    const SpeedField unit = SpeedField::constant(1.0);
    std::vector<double> time(static_cast<size_t>(grid->size()), kInf);
    const Index x = spec.flat_of(std::vector<Index>{5, 5});

    SUBCASE("two binding axes") {
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{4, 5}))] = 0.0;
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{5, 4}))] = 0.05;
        // Root of (u)^2 + (u - 0.05)^2 = 0.01 above 0.05.
        const double expect = (0.05 + std::sqrt(0.0175)) / 2.0;
        CHECK(local_update(*grid, unit, time, x) == doctest::Approx(expect).epsilon(1e-13));
        CHECK(expect == doctest::Approx(0.0911438).epsilon(1e-6));
    }
    SUBCASE("equal neighbors give the diagonal value") {
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{4, 5}))] = 0.0;
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{5, 4}))] = 0.0;
        CHECK(local_update(*grid, unit, time, x) ==
              doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-13));
    }
    SUBCASE("distant neighbor is dropped, not binding") {
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{4, 5}))] = 0.0;
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{5, 4}))] = 10.0;
        CHECK(local_update(*grid, unit, time, x) == doctest::Approx(0.1).epsilon(1e-13));
    }
    SUBCASE("per-axis minimum of the two sides") {
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{4, 5}))] = 0.3;
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{6, 5}))] = 0.2;
        CHECK(local_update(*grid, unit, time, x) == doctest::Approx(0.3).epsilon(1e-13));
    }
    SUBCASE("no finite neighbor yields infinity") {
        CHECK(local_update(*grid, unit, time, x) == kInf);
    }
    SUBCASE("speed rescales the step") {
        time[static_cast<size_t>(spec.flat_of(std::vector<Index>{4, 5}))] = 0.0;
        const SpeedField fast = SpeedField::constant(2.0);
        CHECK(local_update(*grid, fast, time, x) == doctest::Approx(0.05).epsilon(1e-13));
    }
}

TEST_CASE("one-node update at the box boundary is one-sided") {
    const auto grid = unit_grid(2, 0.25);
    const auto& spec = grid->spec();
    std::vector<double> time(static_cast<size_t>(grid->size()), kInf);
    const Index corner = spec.flat_of(std::vector<Index>{0, 0});
    time[static_cast<size_t>(spec.flat_of(std::vector<Index>{1, 0}))] = 0.5;
    CHECK(local_update(*grid, SpeedField::constant(1.0), time, corner) ==
          doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("one-node update root property on random data") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> a_dist(0.0, 1.0);
    std::uniform_real_distribution<double> w_dist(0.05, 0.8);
    for (int dim = 1; dim <= 3; ++dim) {
        const auto grid = unit_grid(dim, 0.25);
        const auto& spec = grid->spec();
        std::vector<Index> center(dim, 2);
        const Index x = spec.flat_of(center);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> time(static_cast<size_t>(grid->size()), kInf);
            std::vector<double> mins;
            for (int axis = 0; axis < dim; ++axis) {
                const double lo = a_dist(rng);
                const double hi = lo + a_dist(rng);
                auto down = center, up = center;
                down[axis] -= 1;
                up[axis] += 1;
                time[static_cast<size_t>(spec.flat_of(down))] = lo;
                time[static_cast<size_t>(spec.flat_of(up))] = hi;
                mins.push_back(lo);
            }
            const double f = w_dist(rng);
            const double u = local_update(*grid, SpeedField::constant(f), time, x);
            const double w = spec.step / f;
            CHECK(std::abs(quadratic_residual(u, mins, w)) <= 1e-12);
            CHECK(u > *std::min_element(mins.begin(), mins.end()));
        }
    }
}

TEST_CASE("march on a line gives exact distances") {
    const auto grid = unit_grid(1, 0.1);
    const auto field = partial_fast_march(grid, SpeedField::constant(1.0), {{0}, {}});
    for (Index f = 0; f < grid->size(); ++f) {
        CHECK(field.time_at(f) == doctest::Approx(0.1 * static_cast<double>(f)).epsilon(1e-13));
        CHECK(field.state_at(f) == NodeState::accepted);
    }
}

TEST_CASE("corner-source error shrinks under refinement") {
    // Max error against the Euclidean distance from a corner. The upwind
    // scheme carries an h*log(1/h) error along diagonals, so the fitted
    // constant drifts upward; pin a per-size bound and a refinement ratio
    // instead of a single C.
    double prev = kInf;
    for (double h : {1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0}) {
        auto grid = std::make_shared<const RestrictedGrid>(
            RestrictedGrid::full(GridSpec::regular(BoxDomain::unit_cube(2), h)));
        const auto field =
            partial_fast_march(grid, SpeedField::constant(1.0), {std::vector<Index>{0}, {}});
        double worst = 0.0;
        for (Index f = 0; f < grid->size(); ++f) {
            const auto p = grid->spec().point_of(f);
            worst = std::max(worst, std::abs(field.time_at(f) - std::hypot(p[0], p[1])));
        }
        CHECK(worst <= 1.6 * h);
        CHECK(worst < prev / 1.5);  // genuine convergence, not just decrease
        prev = worst;
    }
}

TEST_CASE("march agrees with relaxation sweeps") {
    std::mt19937 rng(101);
    for (int dim = 1; dim <= 3; ++dim) {
        const double step = dim == 3 ? 0.125 : 0.05;
        const auto grid = unit_grid(dim, step);
        std::uniform_int_distribution<Index> pick(0, grid->size() - 1);
        std::vector<Index> start;
        for (int k = 0; k < 3; ++k) start.push_back(pick(rng));
        const SpeedField speed =
            dim == 1 ? SpeedField::constant(1.0)
                     : SpeedField::varying(
                           [](std::span<const double> p) {
                               return 1.0 + 0.5 * std::sin(3.0 * p[0]) * std::cos(2.0 * p[1]);
                           },
                           0.5, 1.5);
        const auto field = partial_fast_march(grid, speed, {start, {}});
        const auto reference = brute_force_values(*grid, speed, start);
        for (size_t r = 0; r < reference.size(); ++r) {
            CHECK(std::abs(field.time[r] - reference[r]) <= 1e-10);
        }
    }
}

TEST_CASE("march stops once the end set is accepted") {
    const auto grid = unit_grid(2, 0.1);
    const auto& spec = grid->spec();
    const Index start = spec.flat_of(std::vector<Index>{0, 0});
    const Index end = spec.flat_of(std::vector<Index>{3, 0});
    const auto field = partial_fast_march(grid, SpeedField::constant(1.0), {{start}, {end}});
    CHECK(field.state_at(end) == NodeState::accepted);
    // The far corner is well beyond the stopping front.
    CHECK(field.state_at(spec.flat_of(std::vector<Index>{10, 10})) != NodeState::accepted);
    CHECK(field.accepted_count() < grid->size());
}

TEST_CASE("unreachable end nodes stay far without error") {
    const auto spec = GridSpec::regular(BoxDomain::unit_cube(1), 0.1);
    // Two separated islands on a line.
    const auto grid = std::make_shared<const RestrictedGrid>(
        RestrictedGrid::subset(spec, {0, 1, 2, 8, 9, 10}));
    const auto field = partial_fast_march(grid, SpeedField::constant(1.0), {{0}, {9}});
    CHECK(field.state_at(9) == NodeState::far);
    CHECK(field.time_at(9) == kInf);
    CHECK(field.state_at(2) == NodeState::accepted);
}

TEST_CASE("march input validation") {
    const auto grid = unit_grid(2, 0.5);
    CHECK_THROWS_AS(partial_fast_march(grid, SpeedField::constant(1.0), {{}, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(partial_fast_march(grid, SpeedField::constant(1.0), {{999}, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(partial_fast_march(grid, SpeedField::constant(1.0), {{0}, {999}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(SpeedField::constant(0.0), std::invalid_argument);
    CHECK_THROWS_AS(SpeedField::varying(nullptr, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("acceptance order is monotone with flat-index ties") {
    const auto grid = unit_grid(2, 0.05);
    const auto& spec = grid->spec();
    const std::vector<Index> start = {spec.flat_of(std::vector<Index>{10, 10}),
                                      spec.flat_of(std::vector<Index>{3, 17})};
    const SpeedField speed = SpeedField::varying(
        [](std::span<const double> p) { return 1.0 + p[0]; }, 1.0, 2.0);
    const auto field = partial_fast_march(grid, speed, {start, {}});
    REQUIRE(field.accepted_count() == grid->size());
    for (size_t i = 1; i < field.acceptance_order.size(); ++i) {
        const double prev = field.time_at(field.acceptance_order[i - 1]);
        const double cur = field.time_at(field.acceptance_order[i]);
        CHECK(prev <= cur);
        if (prev == cur) CHECK(field.acceptance_order[i - 1] < field.acceptance_order[i]);
    }
}

TEST_CASE("accepted values are a fixed point of the update") {
    const auto grid = unit_grid(2, 0.1);
    const auto& spec = grid->spec();
    const std::vector<Index> start = {spec.flat_of(std::vector<Index>{2, 3})};
    SUBCASE("full sweep") {
        const auto field = partial_fast_march(grid, SpeedField::constant(1.0), {start, {}});
        for (Index f = 0; f < grid->size(); ++f) {
            if (f == start[0]) continue;
            CHECK(field.time_at(f) == local_update(*grid, SpeedField::constant(1.0), field.time, f));
        }
    }
    SUBCASE("partial sweep") {
        const Index end = spec.flat_of(std::vector<Index>{8, 8});
        const auto field = partial_fast_march(grid, SpeedField::constant(1.0), {start, {end}});
        for (Index f = 0; f < grid->size(); ++f) {
            if (f == start[0] || field.state_at(f) != NodeState::accepted) continue;
            CHECK(field.time_at(f) == local_update(*grid, SpeedField::constant(1.0), field.time, f));
        }
    }
}

TEST_CASE("far state means infinite time and conversely") {
    const auto grid = unit_grid(2, 0.1);
    const Index end = grid->spec().flat_of(std::vector<Index>{2, 2});
    const auto field = partial_fast_march(grid, SpeedField::constant(1.0), {{0}, {end}});
    for (size_t r = 0; r < field.time.size(); ++r) {
        CHECK((field.state[r] == NodeState::far) == (field.time[r] == kInf));
    }
}

TEST_CASE("identical marches are bitwise identical") {
    const auto grid = unit_grid(2, 0.05);
    const std::vector<Index> start = {17, 351};
    const SpeedField speed = SpeedField::varying(
        [](std::span<const double> p) { return 1.2 + std::sin(5.0 * p[0] + 2.0 * p[1]); },
        0.2, 2.2);
    const auto a = partial_fast_march(grid, speed, {start, {}});
    const auto b = partial_fast_march(grid, speed, {start, {}});
    CHECK(a.time == b.time);
    CHECK(a.acceptance_order == b.acceptance_order);
}

TEST_CASE("expired deadline aborts the march") {
    const auto grid = unit_grid(2, 0.01);
    MarchOptions options;
    options.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    CHECK_THROWS_AS(partial_fast_march(grid, SpeedField::constant(1.0), {{0}, {}}, options),
                    BudgetExceeded);
}
