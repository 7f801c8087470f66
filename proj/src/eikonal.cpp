#include "hj/eikonal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace hj {

namespace {

constexpr int kMaxDim = 16;
constexpr int kDeadlineStride = 8192;  // heap pops between clock reads

struct HeapEntry {
    double time;
    Index flat;
    friend bool operator>(const HeapEntry& a, const HeapEntry& b) {
        if (a.time != b.time) return a.time > b.time;
        return a.flat > b.flat;
    }
};

using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>>;

std::vector<Index> sorted_unique(std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

SpeedField SpeedField::constant(double value) {
    if (!(value > 0.0)) throw std::invalid_argument("SpeedField: speed must be positive");
    SpeedField f;
    f.f_lo = f.f_hi = f.uniform_value = value;
    f.uniform = true;
    return f;
}

SpeedField SpeedField::varying(std::function<double(std::span<const double>)> eval,
                               double f_lo, double f_hi) {
    if (!eval) throw std::invalid_argument("SpeedField: missing evaluator");
    if (!(f_lo > 0.0) || !(f_lo <= f_hi)) {
        throw std::invalid_argument("SpeedField: requires 0 < f_lo <= f_hi");
    }
    SpeedField f;
    f.eval = std::move(eval);
    f.f_lo = f_lo;
    f.f_hi = f_hi;
    f.uniform = false;
    return f;
}

double ValueField::time_at(Index flat) const {
    const Index r = grid->rank_of(flat);
    if (r < 0) throw std::out_of_range("ValueField::time_at: not a member node");
    return time[static_cast<size_t>(r)];
}

NodeState ValueField::state_at(Index flat) const {
    const Index r = grid->rank_of(flat);
    if (r < 0) throw std::out_of_range("ValueField::state_at: not a member node");
    return state[static_cast<size_t>(r)];
}

double local_update(const RestrictedGrid& grid, const SpeedField& speed,
                    std::span<const double> time_by_rank, Index flat) {
    const GridSpec& spec = grid.spec();
    const int d = spec.dim();
    if (d > kMaxDim) throw std::invalid_argument("local_update: dimension above limit");

    // Smallest finite neighbor time per axis.
    std::array<double, kMaxDim> a{};
    int m = 0;
    for (int axis = 0; axis < d; ++axis) {
        double best = kInf;
        for (int dir = -1; dir <= 1; dir += 2) {
            if (const auto nb = grid.axis_neighbor(flat, axis, dir)) {
                const double t = time_by_rank[static_cast<size_t>(grid.rank_of(*nb))];
                best = std::min(best, t);
            }
        }
        if (best < kInf) a[static_cast<size_t>(m++)] = best;
    }
    if (m == 0) return kInf;

    double w;
    if (speed.uniform) {
        w = spec.step / speed.uniform_value;
    } else {
        std::array<double, kMaxDim> p{};
        spec.point_of(flat, std::span<double>(p.data(), static_cast<size_t>(d)));
        w = spec.step / speed.eval(std::span<const double>(p.data(), static_cast<size_t>(d)));
    }

    std::sort(a.begin(), a.begin() + m);

    // Grow the binding set while the tentative root still exceeds the next
    // neighbor value. A negative discriminant cannot occur on this path; the
    // rollback guards against float corner cases by dropping the largest
    // value again.
    double u = a[0] + w;
    double s = a[0];
    double q = a[0] * a[0];
    int k = 1;
    while (k < m && u > a[static_cast<size_t>(k)]) {
        const double ak = a[static_cast<size_t>(k)];
        s += ak;
        q += ak * ak;
        ++k;
        const double disc = s * s - static_cast<double>(k) * (q - w * w);
        if (disc < 0.0) {
            --k;
            break;
        }
        u = (s + std::sqrt(disc)) / static_cast<double>(k);
    }
    return u;
}

ValueField partial_fast_march(std::shared_ptr<const RestrictedGrid> grid,
                              const SpeedField& speed, const FrontSets& fronts,
                              const MarchOptions& options) {
    if (!grid) throw std::invalid_argument("partial_fast_march: null grid");
    const RestrictedGrid& g = *grid;
    const auto n = static_cast<size_t>(g.size());

    const std::vector<Index> start = sorted_unique(fronts.start);
    const std::vector<Index> end = sorted_unique(fronts.end);
    if (start.empty()) throw std::invalid_argument("partial_fast_march: empty start set");
    for (Index f : start) {
        if (!g.contains(f)) throw std::invalid_argument("partial_fast_march: start node not a member");
    }
    for (Index f : end) {
        if (!g.contains(f)) throw std::invalid_argument("partial_fast_march: end node not a member");
    }

    ValueField field;
    field.grid = grid;
    field.time.assign(n, kInf);
    field.state.assign(n, NodeState::far);
    field.acceptance_order.reserve(start.size() + 64);

    std::vector<unsigned char> is_end(n, 0);
    for (Index f : end) is_end[static_cast<size_t>(g.rank_of(f))] = 1;
    Index end_left = static_cast<Index>(end.size());

    for (Index f : start) {
        const auto r = static_cast<size_t>(g.rank_of(f));
        field.time[r] = 0.0;
        field.state[r] = NodeState::accepted;
        field.acceptance_order.push_back(f);
        if (is_end[r]) --end_left;
    }

    MinHeap heap;
    const int d = g.dim();
    const auto relax_neighbors = [&](Index x) {
        for (int axis = 0; axis < d; ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const auto nb = g.axis_neighbor(x, axis, dir);
                if (!nb) continue;
                const auto r = static_cast<size_t>(g.rank_of(*nb));
                if (field.state[r] == NodeState::accepted) continue;
                const double u = local_update(g, speed, field.time, *nb);
                if (u < field.time[r]) {
                    field.time[r] = u;
                    field.state[r] = NodeState::narrow;
                    heap.push({u, *nb});
                }
            }
        }
    };
    for (Index f : start) relax_neighbors(f);

    long pops = 0;
    while (!heap.empty() && (end.empty() || end_left > 0)) {
        const HeapEntry top = heap.top();
        heap.pop();
        const auto r = static_cast<size_t>(g.rank_of(top.flat));
        if (field.state[r] == NodeState::accepted || top.time > field.time[r]) continue;

        field.state[r] = NodeState::accepted;
        field.acceptance_order.push_back(top.flat);
        if (is_end[r]) --end_left;

        if (options.deadline && (++pops % kDeadlineStride) == 0 &&
            std::chrono::steady_clock::now() > *options.deadline) {
            throw BudgetExceeded{};
        }
        relax_neighbors(top.flat);
    }

    return field;
}

double kruzkov(double t) {
    if (std::isnan(t) || t < 0.0) throw std::invalid_argument("kruzkov: time must be >= 0");
    return -std::expm1(-t);
}

double inverse_kruzkov(double v) {
    if (std::isnan(v) || v < 0.0 || v > 1.0) {
        throw std::invalid_argument("inverse_kruzkov: value must lie in [0, 1]");
    }
    return -std::log1p(-v);
}

}  // namespace hj
