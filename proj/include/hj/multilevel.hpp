#pragma once

#include <optional>
#include <string>

#include "hj/eikonal.hpp"
#include "hj/problems.hpp"

namespace hj {

// Default scale for the selection thresholds eta_l = eta_const * H_l^gamma.
// Large values stop pruning anything once f_min + eta exceeds 1 (the
// transformed values live in [0,1]); small values clip the optimal corridor
// and inflate the error in higher dimension. 0.5 balances the two on the
// bundled problems; the unreachable-end retry widens it when too small.
inline constexpr double kEtaConstDefault = 0.5;

enum class ScheduleMode { classic, two_level, multi_level };

struct ScheduleRequest {
    ScheduleMode mode = ScheduleMode::multi_level;
    // Exactly one of epsilon / finest_h must be set; the other is derived
    // through epsilon = (h / extent)^gamma.
    std::optional<double> epsilon;
    std::optional<double> finest_h;
    int levels = 0;  // multi_level only; 0 picks the count from epsilon
    double gamma = 1.0;
    double beta = 0.5;
    double eta_const = kEtaConstDefault;
};

// Mesh steps H_1 > ... > H_N (H_N = finest h) plus the selection threshold
// eta_l for every level below the finest. Steps are snapped down to integer
// divisions extent/k of the longest box extent so levels tile the domain.
struct LevelSchedule {
    std::vector<double> steps;
    std::vector<double> raw_steps;  // before snapping, for inspection
    std::vector<double> etas;       // size steps.size() - 1
    double epsilon = 0.0;
    double gamma = 1.0;
    double beta = 0.5;
    double eta_const = kEtaConstDefault;
    bool fallback_single_level = false;  // requested accuracy needed no hierarchy

    int level_count() const { return static_cast<int>(steps.size()); }
    double finest() const { return steps.back(); }
};

// Level plan for a box of the given extent (longest side) and dimension.
// classic: single level at the finest step. two_level: one coarse level at
// H = extent * (h/extent)^(1/(nu+1)) with nu = gamma*beta*(1 - 1/dim).
// multi_level with levels = N: H_l follows the geometric profile
// (h/extent)^((1 - nu^l)/(1 - nu^N)); with levels = 0 the count is
// floor((1/gamma) * log(1/epsilon)) and H_l = extent * (h/extent)^(l/N).
LevelSchedule schedule_params(const ScheduleRequest& request, int dim, double extent);

// Combined value of the two one-sided transforms:
// v_s + v_d - v_s * v_d = 1 - exp(-(t_s + t_d)).
double combine_fv(double v_src, double v_dst);

// Arrival times marched from the source region (time_src) and from the
// destination region (time_dst) on one shared grid.
struct BidirectionalValues {
    ValueField from_src;
    ValueField from_dst;
};

struct UnreachableEnd : std::runtime_error {
    explicit UnreachableEnd(const std::string& what, bool source_side_)
        : std::runtime_error(what), source_side(source_side_) {}
    bool source_side;  // true when the source-region end set was not reached
};

// Runs the two partial marches of one level: from source stopping at the
// destination region padded by eta, and from destination stopping at the
// padded source region. Throws UnreachableEnd when a march terminates with
// some node of the unpadded opposite region still far; nodes only in the
// padding may legitimately stay far (the march already swept everything
// reachable).
BidirectionalValues bidirectional_coarse_solve(std::shared_ptr<const RestrictedGrid> grid,
                                               const SpeedField& speed, const Region& source,
                                               const Region& target, double eta,
                                               const MarchOptions& options = {});

struct ActiveSet {
    std::vector<Index> nodes;  // sorted by flat index
    double f_min = 1.0;        // smallest combined value seen
    double eta = 0.0;          // threshold the selection used
    Index accepted_both = 0;   // nodes accepted in both directions
    bool touches_boundary = false;
};

// Nodes accepted in both directions whose combined transformed value lies
// within eta of the minimum. Selecting with a larger eta yields a superset.
ActiveSet select_active(const BidirectionalValues& values, double eta);

// Fine grid holding every fine node within max(H - h, h) of an active coarse
// node in the max norm, where H and h are the coarse and fine steps.
RestrictedGrid refine_grid(const GridSpec& coarse, std::span<const Index> active,
                           const GridSpec& fine);

struct PathPlateau : std::runtime_error {
    PathPlateau() : std::runtime_error("path descent hit a plateau") {}
};

// Steepest-descent polyline on the destination-side times: starts at the
// accepted source-region node with smallest time and repeatedly moves to the
// accepted neighbor of strictly smaller time until the target region is
// entered. Throws PathPlateau when no strictly smaller neighbor exists.
std::vector<std::vector<double>> extract_path(const ValueField& from_dst, const Region& source,
                                              const Region& target);

struct MlfmLevel {
    int level = 0;  // 1-based
    double step = 0.0;
    double eta = 0.0;  // selection threshold after retries; 0 on the last level
    Index grid_nodes = 0;
    Index accepted_src = 0;
    Index accepted_dst = 0;
    Index active_nodes = 0;
    int retries = 0;
    bool touches_boundary = false;
    double wall_ms = 0.0;
    std::shared_ptr<const RestrictedGrid> grid;
    ActiveSet active;  // empty on the last level
};

struct MlfmResult {
    double v_star = 0.0;
    double tau_star = 0.0;
    std::vector<MlfmLevel> levels;
    ValueField final_from_dst;  // times on the finest grid, destination side
    Index visited_total = 0;    // sum of level grid sizes (memory proxy)
    bool budget_exceeded = false;
    std::vector<std::string> warnings;
};

struct MlfmOptions {
    int max_eta_retries = 3;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Full hierarchy run. Every level below the finest solves both directions
// and selects active nodes; each next grid refines around them. The finest
// level marches from the destination until the source region is accepted;
// tau_star is the smallest source arrival time and v_star its transform.
// When a level cannot reach its end set the selection threshold that built
// its grid is doubled and the level is retried, at most max_eta_retries
// times. On deadline expiry the result carries the completed levels and
// budget_exceeded = true.
MlfmResult run_multilevel(const ProblemSpec& problem, const LevelSchedule& schedule,
                          const MlfmOptions& options = {});

}  // namespace hj
