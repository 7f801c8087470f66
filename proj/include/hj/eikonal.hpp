#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hj/grid.hpp"

namespace hj {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Isotropic speed f with known positive bounds f_lo <= f(x) <= f_hi.
struct SpeedField {
    std::function<double(std::span<const double>)> eval;
    double f_lo = 1.0;
    double f_hi = 1.0;
    bool uniform = true;
    double uniform_value = 1.0;

    static SpeedField constant(double value);
    static SpeedField varying(std::function<double(std::span<const double>)> eval,
                              double f_lo, double f_hi);

    double at(std::span<const double> p) const {
        return uniform ? uniform_value : eval(p);
    }
};

enum class NodeState : unsigned char { far, narrow, accepted };

// Start nodes get value 0 and seed the march; end nodes stop it once all of
// them are accepted. An empty end set means "sweep the whole member set".
struct FrontSets {
    std::vector<Index> start;
    std::vector<Index> end;
};

// Arrival times on a restricted grid. Storage is by member rank; time is
// +inf exactly for far nodes and finite otherwise. acceptance_order lists
// accepted flats in the order they were finalized (nondecreasing time,
// ties by flat index).
struct ValueField {
    std::shared_ptr<const RestrictedGrid> grid;
    std::vector<double> time;
    std::vector<NodeState> state;
    std::vector<Index> acceptance_order;

    double time_at(Index flat) const;
    NodeState state_at(Index flat) const;
    Index accepted_count() const { return static_cast<Index>(acceptance_order.size()); }
};

struct BudgetExceeded : std::runtime_error {
    BudgetExceeded() : std::runtime_error("time budget exceeded") {}
};

struct MarchOptions {
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

// One-node upwind update for |grad T| * f = 1: the unique root
// U >= max(binding a_i) of sum_i max(U - a_i, 0)^2 = (step/f)^2, where a_i is
// the smaller finite time among the two axis-i neighbors of flat. Axes with
// no finite neighbor impose no constraint; with no finite neighbor at all the
// result is +inf. Missing neighbors (box boundary or non-members) fall back
// to one-sided differences the same way.
double local_update(const RestrictedGrid& grid, const SpeedField& speed,
                    std::span<const double> time_by_rank, Index flat);

// Dijkstra-like front propagation: repeatedly accept the narrow node of
// smallest time (ties by flat index) and relax its non-accepted neighbors
// with local_update. Stops when every end node is accepted or the narrow
// band empties, whichever comes first; unreachable end nodes stay far, which
// callers can inspect. Accepted non-start values satisfy
// T(x) == local_update(T, x) exactly at return.
ValueField partial_fast_march(std::shared_ptr<const RestrictedGrid> grid,
                              const SpeedField& speed, const FrontSets& fronts,
                              const MarchOptions& options = {});

// v = 1 - exp(-t), mapping [0, +inf] monotonically onto [0, 1].
double kruzkov(double t);
// Inverse map; v must lie in [0, 1], where v = 1 gives +inf.
double inverse_kruzkov(double v);

}  // namespace hj
