#include "hj/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hj {

namespace {

// Benchmark geometry.
constexpr double kBallRadius = 0.1;
constexpr double kSourceCoord = 0.2;
constexpr double kTargetCoord = 0.8;

// Speed-bump field.
constexpr double kBumpHeight = 0.5;
constexpr double kBumpWidth2 = 0.02;  // squared length scale

// Two-channel field: a slow slab across the last axis with two unit-speed
// gaps along the first axis. All edges ramp linearly over kRampWidth.
constexpr double kSlabLo = 0.45;
constexpr double kSlabHi = 0.55;
constexpr double kSlabSpeed = 0.2;
constexpr double kGap0Lo = 0.15;
constexpr double kGap0Hi = 0.25;
constexpr double kGap1Lo = 0.75;
constexpr double kGap1Hi = 0.85;
constexpr double kRampWidth = 0.02;

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

// 1 inside [lo, hi], 0 at distance kRampWidth outside, linear in between.
double ramp_profile(double x, double lo, double hi) {
    if (x >= lo && x <= hi) return 1.0;
    const double outside = x < lo ? lo - x : x - hi;
    return std::max(0.0, 1.0 - outside / kRampWidth);
}

void require_dim(int dim) {
    if (dim < 2) throw std::invalid_argument("benchmark problems require dim >= 2");
}

std::vector<double> uniform_point(int dim, double c) { return std::vector<double>(dim, c); }

ProblemSpec benchmark_geometry(int dim, std::string name, SpeedField speed) {
    require_dim(dim);
    ProblemSpec p;
    p.name = std::move(name);
    p.domain = BoxDomain::unit_cube(dim);
    p.source = Region::ball(uniform_point(dim, kSourceCoord), kBallRadius);
    p.target = Region::ball(uniform_point(dim, kTargetCoord), kBallRadius);
    p.speed = std::move(speed);
    return p;
}

}  // namespace

double AnalyticOracle::value_to_target(std::span<const double> p) const {
    const double d = std::sqrt(sq_dist(p, target_center));
    return std::max(0.0, d - target_radius);
}

ProblemSpec paper_benchmark(int dim) {
    return benchmark_geometry(dim, "paper_benchmark", SpeedField::constant(1.0));
}

AnalyticOracle benchmark_oracle(int dim) {
    require_dim(dim);
    AnalyticOracle o;
    o.target_center = uniform_point(dim, kTargetCoord);
    o.target_radius = kBallRadius;
    const double span = kTargetCoord - kSourceCoord;
    const double center_dist = span * std::sqrt(static_cast<double>(dim));
    o.tau_star = center_dist - 2.0 * kBallRadius;
    // Straight segment between the facing sphere boundaries.
    const double dir = span / center_dist;  // unit direction, per axis
    o.segment_a.resize(dim);
    o.segment_b.resize(dim);
    for (int a = 0; a < dim; ++a) {
        o.segment_a[a] = kSourceCoord + kBallRadius * dir;
        o.segment_b[a] = kTargetCoord - kBallRadius * dir;
    }
    return o;
}

SpeedField bump_speed(int dim) {
    require_dim(dim);
    std::vector<double> center(dim, 0.5);
    auto eval = [center](std::span<const double> p) {
        return 1.0 + kBumpHeight * std::exp(-sq_dist(p, center) / kBumpWidth2);
    };
    return SpeedField::varying(eval, 1.0, 1.0 + kBumpHeight);
}

ProblemSpec bump_problem(int dim) { return benchmark_geometry(dim, "bump", bump_speed(dim)); }

SpeedField two_channel_speed(int dim) {
    require_dim(dim);
    auto eval = [dim](std::span<const double> p) {
        const double along = p[0];
        const double across = p[static_cast<size_t>(dim - 1)];
        const double in_slab = ramp_profile(across, kSlabLo, kSlabHi);
        const double in_gap = std::max(ramp_profile(along, kGap0Lo, kGap0Hi),
                                       ramp_profile(along, kGap1Lo, kGap1Hi));
        // Full slowdown inside the slab away from the gaps.
        return 1.0 - (1.0 - kSlabSpeed) * in_slab * (1.0 - in_gap);
    };
    return SpeedField::varying(eval, kSlabSpeed, 1.0);
}

ProblemSpec two_channel_problem(int dim) {
    return benchmark_geometry(dim, "two_channel", two_channel_speed(dim));
}

std::vector<double> brute_force_values(const RestrictedGrid& grid, const SpeedField& speed,
                                       std::span<const Index> start, double tol,
                                       long max_sweeps) {
    const auto n = static_cast<size_t>(grid.size());
    std::vector<double> time(n, kInf);
    std::vector<unsigned char> pinned(n, 0);
    for (Index f : start) {
        const Index r = grid.rank_of(f);
        if (r < 0) throw std::invalid_argument("brute_force_values: start node not a member");
        time[static_cast<size_t>(r)] = 0.0;
        pinned[static_cast<size_t>(r)] = 1;
    }

    const auto relax = [&](size_t r) {
        if (pinned[r]) return 0.0;
        const double old = time[r];
        const double next = local_update(grid, speed, time, grid.member_at(static_cast<Index>(r)));
        time[r] = next;
        if (old == kInf) return next == kInf ? 0.0 : kInf;
        return old - next;  // values never increase
    };

    for (long sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (size_t r = 0; r < n; ++r) change = std::max(change, relax(r));
        for (size_t r = n; r-- > 0;) change = std::max(change, relax(r));
        if (change <= tol) return time;
    }
    throw std::runtime_error("brute_force_values: no convergence within sweep limit");
}

}  // namespace hj
