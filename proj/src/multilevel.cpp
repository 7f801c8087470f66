#include "hj/multilevel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace hj {

namespace {

constexpr double kGridEps = 1e-9;

// Largest extent/k (integer k >= 1) that does not exceed step.
double snap_down(double step, double extent) {
    if (step >= extent) return extent;
    const auto k = static_cast<long>(std::ceil(extent / step * (1.0 - kGridEps)));
    return extent / static_cast<double>(k);
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double, std::milli>(dt).count();
}

bool past(const std::optional<std::chrono::steady_clock::time_point>& deadline) {
    return deadline && std::chrono::steady_clock::now() > *deadline;
}

// Two partial marches with explicit start node lists. The stop set of each
// march is the padded opposite region plus the opposite start nodes, so
// seeded nodes that fall outside their region still terminate the march.
BidirectionalValues bidirectional_from_nodes(std::shared_ptr<const RestrictedGrid> grid,
                                             const SpeedField& speed, const Region& source,
                                             const Region& target,
                                             const std::vector<Index>& src_nodes,
                                             const std::vector<Index>& dst_nodes, double eta,
                                             const MarchOptions& options) {
    const auto padded_end = [&](const Region& region, const std::vector<Index>& nodes) {
        std::vector<Index> end = nodes_in_region(*grid, region.inflate(eta));
        end.insert(end.end(), nodes.begin(), nodes.end());
        return end;
    };

    BidirectionalValues out;
    out.from_src =
        partial_fast_march(grid, speed, {src_nodes, padded_end(target, dst_nodes)}, options);
    for (Index f : dst_nodes) {
        if (out.from_src.state_at(f) != NodeState::accepted) {
            throw UnreachableEnd("march from the source could not reach the target region",
                                 false);
        }
    }
    out.from_dst =
        partial_fast_march(grid, speed, {dst_nodes, padded_end(source, src_nodes)}, options);
    for (Index f : src_nodes) {
        if (out.from_dst.state_at(f) != NodeState::accepted) {
            throw UnreachableEnd("march from the target could not reach the source region",
                                 true);
        }
    }
    return out;
}

}  // namespace

LevelSchedule schedule_params(const ScheduleRequest& request, int dim, double extent) {
    if (dim < 1) throw std::invalid_argument("schedule_params: dim must be >= 1");
    if (!(extent > 0.0)) throw std::invalid_argument("schedule_params: extent must be positive");
    if (!(request.gamma > 0.0) || request.gamma > 1.0) {
        throw std::invalid_argument("schedule_params: gamma must lie in (0, 1]");
    }
    if (!(request.beta > 0.0) || request.beta > 1.0) {
        throw std::invalid_argument("schedule_params: beta must lie in (0, 1]");
    }
    if (!(request.eta_const > 0.0)) {
        throw std::invalid_argument("schedule_params: eta_const must be positive");
    }
    if (request.epsilon.has_value() == request.finest_h.has_value()) {
        throw std::invalid_argument("schedule_params: set exactly one of epsilon and finest_h");
    }
    if (request.levels < 0) throw std::invalid_argument("schedule_params: negative level count");

    LevelSchedule out;
    out.gamma = request.gamma;
    out.beta = request.beta;
    out.eta_const = request.eta_const;

    // Relative step hrel = h/extent keeps the accuracy relation epsilon =
    // hrel^gamma scale-invariant; the formulas below work in relative units.
    double hrel;
    if (request.finest_h) {
        const double h = *request.finest_h;
        if (!(h > 0.0) || h > extent) {
            throw std::invalid_argument("schedule_params: finest_h must lie in (0, extent]");
        }
        hrel = h / extent;
        out.epsilon = std::pow(hrel, request.gamma);
    } else {
        out.epsilon = *request.epsilon;
        if (!(out.epsilon > 0.0) || out.epsilon >= 1.0) {
            throw std::invalid_argument("schedule_params: epsilon must lie in (0, 1)");
        }
        hrel = std::pow(out.epsilon, 1.0 / request.gamma);
    }
    const double h = hrel * extent;
    const double nu = request.gamma * request.beta * (1.0 - 1.0 / static_cast<double>(dim));

    switch (request.mode) {
        case ScheduleMode::classic:
            out.raw_steps = {h};
            break;
        case ScheduleMode::two_level:
            out.raw_steps = {extent * std::pow(hrel, 1.0 / (nu + 1.0)), h};
            break;
        case ScheduleMode::multi_level: {
            int n = request.levels;
            if (n == 0) {
                n = static_cast<int>(std::floor(std::log(1.0 / out.epsilon) / request.gamma));
                if (n < 1) {
                    n = 1;
                    out.fallback_single_level = true;
                }
                for (int l = 1; l <= n; ++l) {
                    out.raw_steps.push_back(
                        extent * std::pow(hrel, static_cast<double>(l) / static_cast<double>(n)));
                }
            } else if (n == 1 || nu == 0.0) {
                out.raw_steps = {h};
            } else {
                const double denom = 1.0 - std::pow(nu, static_cast<double>(n));
                for (int l = 1; l <= n; ++l) {
                    const double expo = (1.0 - std::pow(nu, static_cast<double>(l))) / denom;
                    out.raw_steps.push_back(extent * std::pow(hrel, expo));
                }
            }
            break;
        }
    }

    // Snapping is monotone, so the list stays nonincreasing; collapse
    // duplicates to keep the hierarchy strictly decreasing.
    for (double s : out.raw_steps) {
        const double snapped = snap_down(s, extent);
        if (out.steps.empty() || snapped < out.steps.back() * (1.0 - kGridEps)) {
            out.steps.push_back(snapped);
        }
    }

    for (size_t l = 0; l + 1 < out.steps.size(); ++l) {
        out.etas.push_back(request.eta_const * std::pow(out.steps[l] / extent, request.gamma));
    }
    return out;
}

double combine_fv(double v_src, double v_dst) {
    if (!(v_src >= 0.0 && v_src <= 1.0) || !(v_dst >= 0.0 && v_dst <= 1.0)) {
        throw std::invalid_argument("combine_fv: inputs must lie in [0, 1]");
    }
    return v_src + v_dst - v_src * v_dst;
}

BidirectionalValues bidirectional_coarse_solve(std::shared_ptr<const RestrictedGrid> grid,
                                               const SpeedField& speed, const Region& source,
                                               const Region& target, double eta,
                                               const MarchOptions& options) {
    if (!grid) throw std::invalid_argument("bidirectional_coarse_solve: null grid");
    if (eta < 0.0) throw std::invalid_argument("bidirectional_coarse_solve: negative eta");

    const std::vector<Index> src_nodes = nodes_in_region(*grid, source);
    const std::vector<Index> dst_nodes = nodes_in_region(*grid, target);
    if (src_nodes.empty() || dst_nodes.empty()) {
        throw std::invalid_argument(
            "bidirectional_coarse_solve: a region does not intersect the grid");
    }
    return bidirectional_from_nodes(std::move(grid), speed, source, target, src_nodes, dst_nodes,
                                    eta, options);
}

ActiveSet select_active(const BidirectionalValues& values, double eta) {
    if (eta < 0.0) throw std::invalid_argument("select_active: negative eta");
    const ValueField& fs = values.from_src;
    const ValueField& fd = values.from_dst;
    if (!fs.grid || fs.grid != fd.grid) {
        throw std::invalid_argument("select_active: value fields disagree on the grid");
    }
    const RestrictedGrid& g = *fs.grid;
    const auto n = static_cast<size_t>(g.size());

    ActiveSet out;
    out.eta = eta;
    out.f_min = kInf;
    for (size_t r = 0; r < n; ++r) {
        if (fs.state[r] != NodeState::accepted || fd.state[r] != NodeState::accepted) continue;
        ++out.accepted_both;
        const double fv = combine_fv(kruzkov(fs.time[r]), kruzkov(fd.time[r]));
        out.f_min = std::min(out.f_min, fv);
    }
    if (out.accepted_both == 0) {
        throw std::invalid_argument("select_active: no node accepted in both directions");
    }

    const GridSpec& spec = g.spec();
    const int d = spec.dim();
    const double cut = out.f_min + eta;
    for (size_t r = 0; r < n; ++r) {
        if (fs.state[r] != NodeState::accepted || fd.state[r] != NodeState::accepted) continue;
        if (combine_fv(kruzkov(fs.time[r]), kruzkov(fd.time[r])) > cut) continue;
        const Index flat = g.member_at(static_cast<Index>(r));
        out.nodes.push_back(flat);
        for (int a = 0; a < d && !out.touches_boundary; ++a) {
            const Index c = spec.coord(flat, a);
            if (c == 0 || c == spec.counts[a] - 1) out.touches_boundary = true;
        }
    }
    return out;
}

RestrictedGrid refine_grid(const GridSpec& coarse, std::span<const Index> active,
                           const GridSpec& fine) {
    if (coarse.dim() != fine.dim()) {
        throw std::invalid_argument("refine_grid: dimension mismatch");
    }
    if (coarse.domain.lo != fine.domain.lo || coarse.domain.hi != fine.domain.hi) {
        throw std::invalid_argument("refine_grid: grids must share the domain");
    }
    if (!(fine.step <= coarse.step)) {
        throw std::invalid_argument("refine_grid: fine step must not exceed the coarse step");
    }
    const double radius = std::max(coarse.step - fine.step, fine.step);
    const int d = fine.dim();

    std::unordered_set<Index> members;
    members.reserve(active.size() * (1u << d));
    std::vector<double> p(d);
    std::vector<Index> ilo(d), ihi(d), idx(d);
    for (Index af : active) {
        coarse.point_of(af, p);
        bool empty = false;
        for (int a = 0; a < d; ++a) {
            const double lo = fine.domain.lo[a];
            const Index i0 =
                static_cast<Index>(std::ceil((p[a] - radius - lo) / fine.step - kGridEps));
            const Index i1 =
                static_cast<Index>(std::floor((p[a] + radius - lo) / fine.step + kGridEps));
            ilo[a] = std::clamp(i0, Index{0}, fine.counts[a] - 1);
            ihi[a] = std::clamp(i1, Index{0}, fine.counts[a] - 1);
            if (i1 < 0 || i0 >= fine.counts[a]) empty = true;
        }
        if (empty) continue;
        idx = ilo;
        while (true) {
            Index flat = 0;
            for (int a = 0; a < d; ++a) flat += idx[a] * fine.strides[a];
            members.insert(flat);
            int a = d - 1;
            for (; a >= 0; --a) {
                if (++idx[a] <= ihi[a]) break;
                idx[a] = ilo[a];
            }
            if (a < 0) break;
        }
    }
    return RestrictedGrid::subset(fine, std::vector<Index>(members.begin(), members.end()));
}

std::vector<std::vector<double>> extract_path(const ValueField& from_dst, const Region& source,
                                              const Region& target) {
    if (!from_dst.grid) throw std::invalid_argument("extract_path: empty value field");
    const RestrictedGrid& g = *from_dst.grid;

    Index cur = -1;
    double best = kInf;
    for (Index f : nodes_in_region(g, source)) {
        const auto r = static_cast<size_t>(g.rank_of(f));
        if (from_dst.state[r] == NodeState::accepted && from_dst.time[r] < best) {
            best = from_dst.time[r];
            cur = f;
        }
    }
    if (cur < 0) throw std::invalid_argument("extract_path: no accepted node in the source region");

    const int d = g.dim();
    std::vector<std::vector<double>> path;
    for (Index guard = 0; guard <= g.size(); ++guard) {
        path.push_back(g.spec().point_of(cur));
        if (target.contains(path.back())) return path;

        const double tcur = from_dst.time[static_cast<size_t>(g.rank_of(cur))];
        Index next = -1;
        double tnext = tcur;
        for (int a = 0; a < d; ++a) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const auto nb = g.axis_neighbor(cur, a, dir);
                if (!nb) continue;
                const auto r = static_cast<size_t>(g.rank_of(*nb));
                if (from_dst.state[r] != NodeState::accepted) continue;
                if (from_dst.time[r] < tnext) {
                    tnext = from_dst.time[r];
                    next = *nb;
                }
            }
        }
        if (next < 0) throw PathPlateau{};
        cur = next;
    }
    throw PathPlateau{};  // cycle guard; unreachable with strictly decreasing times
}

MlfmResult run_multilevel(const ProblemSpec& problem, const LevelSchedule& schedule,
                          const MlfmOptions& options) {
    const int n_levels = schedule.level_count();
    if (n_levels < 1) throw std::invalid_argument("run_multilevel: empty schedule");
    if (problem.domain.dim() != problem.source.dim() ||
        problem.domain.dim() != problem.target.dim()) {
        throw std::invalid_argument("run_multilevel: problem dimensions disagree");
    }
    if (static_cast<int>(schedule.etas.size()) != n_levels - 1) {
        throw std::invalid_argument("run_multilevel: schedule is missing thresholds");
    }

    MlfmResult res;
    res.v_star = res.tau_star = std::numeric_limits<double>::quiet_NaN();
    MarchOptions march{options.deadline};

    std::vector<double> etas = schedule.etas;
    std::vector<MlfmLevel> lv(static_cast<size_t>(n_levels));
    std::vector<BidirectionalValues> bis(static_cast<size_t>(n_levels));

    const auto finish = [&](int done_levels, bool budget) {
        res.levels.assign(lv.begin(), lv.begin() + done_levels);
        res.budget_exceeded = budget;
        res.visited_total = 0;
        for (const MlfmLevel& rec : res.levels) res.visited_total += rec.grid_nodes;
        for (const MlfmLevel& rec : res.levels) {
            if (rec.touches_boundary) {
                res.warnings.push_back("active set touches the domain boundary at level " +
                                       std::to_string(rec.level));
            }
        }
        return res;
    };

    auto grid = std::make_shared<const RestrictedGrid>(
        RestrictedGrid::full(GridSpec::regular(problem.domain, schedule.steps[0])));

    int l = 0;
    while (l < n_levels) {
        const auto t0 = std::chrono::steady_clock::now();
        auto& rec = lv[static_cast<size_t>(l)];
        rec = MlfmLevel{};
        rec.level = l + 1;
        rec.step = schedule.steps[static_cast<size_t>(l)];
        rec.grid = grid;
        rec.grid_nodes = grid->size();

        try {
            if (past(options.deadline)) throw BudgetExceeded{};

            std::vector<Index> src_nodes = nodes_in_region(*grid, problem.source);
            std::vector<Index> dst_nodes = nodes_in_region(*grid, problem.target);
            if (l == 0) {
                // The coarsest grid may be too coarse to sample a region at
                // all; seed the nearest node so the hierarchy can start.
                const auto seed = [&](std::vector<Index>& nodes, const Region& region,
                                      const char* which) {
                    if (!nodes.empty()) return;
                    std::vector<double> blo, bhi;
                    region.bounds(blo, bhi);
                    for (size_t i = 0; i < blo.size(); ++i) blo[i] = 0.5 * (blo[i] + bhi[i]);
                    nodes.push_back(grid->spec().nearest_flat(blo));
                    res.warnings.push_back(std::string(which) +
                                           " region contains no node of the coarsest grid; "
                                           "seeded the nearest node");
                };
                seed(src_nodes, problem.source, "source");
                seed(dst_nodes, problem.target, "target");
            } else {
                if (src_nodes.empty()) {
                    throw UnreachableEnd("refined grid lost the source region", true);
                }
                if (dst_nodes.empty()) {
                    throw UnreachableEnd("refined grid lost the target region", false);
                }
            }

            if (l == n_levels - 1) {
                ValueField final_field =
                    partial_fast_march(grid, problem.speed, {dst_nodes, src_nodes}, march);
                double tmin = kInf;
                for (Index f : src_nodes) {
                    const auto r = static_cast<size_t>(grid->rank_of(f));
                    if (final_field.state[r] != NodeState::accepted) {
                        throw UnreachableEnd("finest march could not reach the source region",
                                             true);
                    }
                    tmin = std::min(tmin, final_field.time[r]);
                }
                rec.accepted_dst = final_field.accepted_count();
                rec.wall_ms = elapsed_ms(t0);
                res.tau_star = tmin;
                res.v_star = kruzkov(tmin);
                res.final_from_dst = std::move(final_field);
                ++l;
            } else {
                const double eta = etas[static_cast<size_t>(l)];
                BidirectionalValues bi =
                    bidirectional_from_nodes(grid, problem.speed, problem.source, problem.target,
                                             src_nodes, dst_nodes, eta, march);
                ActiveSet act = select_active(bi, eta);
                rec.eta = eta;
                rec.accepted_src = bi.from_src.accepted_count();
                rec.accepted_dst = bi.from_dst.accepted_count();
                rec.active_nodes = static_cast<Index>(act.nodes.size());
                rec.touches_boundary = act.touches_boundary;
                rec.wall_ms = elapsed_ms(t0);
                bis[static_cast<size_t>(l)] = std::move(bi);
                rec.active = std::move(act);

                grid = std::make_shared<const RestrictedGrid>(
                    refine_grid(grid->spec(), rec.active.nodes,
                                GridSpec::regular(problem.domain,
                                                  schedule.steps[static_cast<size_t>(l + 1)])));
                ++l;
            }
        } catch (const BudgetExceeded&) {
            rec.wall_ms = elapsed_ms(t0);
            return finish(l + 1, true);
        } catch (const UnreachableEnd& e) {
            if (l == 0) throw;  // full grid with positive speed: genuinely ill-posed
            auto& prev = lv[static_cast<size_t>(l - 1)];
            if (prev.retries >= options.max_eta_retries) {
                throw std::runtime_error(std::string("level ") + std::to_string(l + 1) +
                                         " end set unreachable after retries: " + e.what());
            }
            // Rebuild this level's grid from a doubled selection threshold
            // one level up, then retry this level.
            ++prev.retries;
            etas[static_cast<size_t>(l - 1)] *= 2.0;
            prev.eta = etas[static_cast<size_t>(l - 1)];
            prev.active = select_active(bis[static_cast<size_t>(l - 1)], prev.eta);
            prev.active_nodes = static_cast<Index>(prev.active.nodes.size());
            prev.touches_boundary = prev.active.touches_boundary;
            grid = std::make_shared<const RestrictedGrid>(
                refine_grid(prev.grid->spec(), prev.active.nodes,
                            GridSpec::regular(problem.domain,
                                              schedule.steps[static_cast<size_t>(l)])));
        }
    }

    return finish(n_levels, false);
}

}  // namespace hj
