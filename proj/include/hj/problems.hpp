#pragma once

#include <span>
#include <string>
#include <vector>

#include "hj/eikonal.hpp"
#include "hj/grid.hpp"

namespace hj {

// Minimum-time instance: travel from the source region to the target region
// inside the box at speed f.
struct ProblemSpec {
    std::string name;
    BoxDomain domain;
    Region source;
    Region target;
    SpeedField speed;
};

// Closed-form solution data, available for the unit-speed benchmark where
// geodesics are straight lines.
struct AnalyticOracle {
    double tau_star = 0.0;
    std::vector<double> segment_a;  // geodesic endpoints on the two sphere
    std::vector<double> segment_b;  // boundaries
    std::vector<double> target_center;
    double target_radius = 0.0;

    // Minimum time from p to the target region.
    double value_to_target(std::span<const double> p) const;
};

// Unit-speed benchmark on [0,1]^dim: source and target are balls of radius
// 0.1 centered at (0.2,...,0.2) and (0.8,...,0.8). Requires dim >= 2.
ProblemSpec paper_benchmark(int dim);
AnalyticOracle benchmark_oracle(int dim);

// Benchmark geometry with a smooth speed bump 1 + 0.5*exp(-|x-c|^2 / 0.02)
// around the box center; speed stays within [1, 1.5].
ProblemSpec bump_problem(int dim);
SpeedField bump_speed(int dim);

// Benchmark geometry with a slow slab across the box (f = 0.2) pierced by
// two unit-speed gaps; edges are linear ramps so the field stays Lipschitz.
ProblemSpec two_channel_problem(int dim);
SpeedField two_channel_speed(int dim);

// Reference solver for tests: Gauss-Seidel sweeps of the one-node update,
// alternating rank order, until the largest change over a full pair of
// sweeps is at most tol. start nodes are pinned to 0; an empty start leaves
// everything at +inf. Returns times by member rank.
std::vector<double> brute_force_values(const RestrictedGrid& grid, const SpeedField& speed,
                                       std::span<const Index> start, double tol = 1e-13,
                                       long max_sweeps = 100000);

}  // namespace hj
