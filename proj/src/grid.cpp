#include "hj/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hj {

namespace {

// Relative slack for float comparisons tied to grid arithmetic. Mesh steps
// are snapped to rational fractions of the extents, so honest values sit far
// from these margins.
constexpr double kGridEps = 1e-9;

void check_dims(size_t a, size_t b, const char* what) {
    if (a != b || a == 0) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch or empty");
    }
}

}  // namespace

BoxDomain::BoxDomain(std::vector<double> lo_, std::vector<double> hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
    check_dims(lo.size(), hi.size(), "BoxDomain");
    for (size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) {
            throw std::invalid_argument("BoxDomain: requires lo < hi on every axis");
        }
    }
}

BoxDomain BoxDomain::unit_cube(int dim) {
    if (dim < 1) throw std::invalid_argument("BoxDomain: dim must be >= 1");
    return BoxDomain(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

double BoxDomain::max_extent() const {
    double m = 0.0;
    for (int a = 0; a < dim(); ++a) m = std::max(m, extent(a));
    return m;
}

bool BoxDomain::contains(std::span<const double> p) const {
    if (static_cast<int>(p.size()) != dim()) return false;
    for (int a = 0; a < dim(); ++a) {
        if (p[a] < lo[a] || p[a] > hi[a]) return false;
    }
    return true;
}

Region Region::ball(std::vector<double> center, double radius) {
    if (center.empty()) throw std::invalid_argument("Region::ball: empty center");
    if (radius < 0.0) throw std::invalid_argument("Region::ball: negative radius");
    Region r;
    r.kind_ = Kind::ball;
    r.a_ = std::move(center);
    r.radius_ = radius;
    return r;
}

Region Region::box(std::vector<double> lo, std::vector<double> hi) {
    check_dims(lo.size(), hi.size(), "Region::box");
    for (size_t i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) throw std::invalid_argument("Region::box: requires lo <= hi");
    }
    Region r;
    r.kind_ = Kind::box;
    r.a_ = std::move(lo);
    r.b_ = std::move(hi);
    return r;
}

Region Region::join(std::vector<Region> parts) {
    if (parts.empty()) throw std::invalid_argument("Region::join: empty union");
    const int d = parts.front().dim();
    for (const Region& p : parts) {
        if (p.dim() != d) throw std::invalid_argument("Region::join: mixed dimensions");
    }
    Region r;
    r.kind_ = Kind::join;
    r.parts_ = std::move(parts);
    return r;
}

int Region::dim() const {
    return kind_ == Kind::join ? parts_.front().dim() : static_cast<int>(a_.size());
}

bool Region::contains(std::span<const double> p) const {
    switch (kind_) {
        case Kind::ball: {
            if (p.size() != a_.size()) return false;
            double d2 = 0.0;
            for (size_t i = 0; i < a_.size(); ++i) {
                const double t = p[i] - a_[i];
                d2 += t * t;
            }
            return d2 <= radius_ * radius_ * (1.0 + kGridEps) + kGridEps * kGridEps;
        }
        case Kind::box: {
            if (p.size() != a_.size()) return false;
            for (size_t i = 0; i < a_.size(); ++i) {
                const double slack = kGridEps * (1.0 + std::abs(b_[i]) + std::abs(a_[i]));
                if (p[i] < a_[i] - slack || p[i] > b_[i] + slack) return false;
            }
            return true;
        }
        case Kind::join:
            for (const Region& part : parts_) {
                if (part.contains(p)) return true;
            }
            return false;
    }
    return false;
}

Region Region::inflate(double pad) const {
    if (pad < 0.0) throw std::invalid_argument("Region::inflate: negative pad");
    switch (kind_) {
        case Kind::ball:
            return ball(a_, radius_ + pad);
        case Kind::box: {
            std::vector<double> lo = a_, hi = b_;
            for (size_t i = 0; i < lo.size(); ++i) {
                lo[i] -= pad;
                hi[i] += pad;
            }
            return box(std::move(lo), std::move(hi));
        }
        case Kind::join: {
            std::vector<Region> parts;
            parts.reserve(parts_.size());
            for (const Region& part : parts_) parts.push_back(part.inflate(pad));
            return join(std::move(parts));
        }
    }
    throw std::logic_error("Region::inflate: bad kind");
}

void Region::bounds(std::vector<double>& lo, std::vector<double>& hi) const {
    switch (kind_) {
        case Kind::ball: {
            lo = a_;
            hi = a_;
            for (size_t i = 0; i < a_.size(); ++i) {
                lo[i] -= radius_;
                hi[i] += radius_;
            }
            return;
        }
        case Kind::box:
            lo = a_;
            hi = b_;
            return;
        case Kind::join: {
            parts_.front().bounds(lo, hi);
            std::vector<double> plo, phi;
            for (size_t k = 1; k < parts_.size(); ++k) {
                parts_[k].bounds(plo, phi);
                for (size_t i = 0; i < lo.size(); ++i) {
                    lo[i] = std::min(lo[i], plo[i]);
                    hi[i] = std::max(hi[i], phi[i]);
                }
            }
            return;
        }
    }
}

GridSpec GridSpec::regular(BoxDomain domain, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("GridSpec: step must be positive");
    GridSpec g;
    g.domain = std::move(domain);
    g.step = step;
    const int d = g.domain.dim();
    g.counts.resize(d);
    g.strides.resize(d);
    for (int a = 0; a < d; ++a) {
        const double ratio = g.domain.extent(a) / step;
        g.counts[a] = static_cast<Index>(std::floor(ratio * (1.0 + kGridEps))) + 1;
    }
    Index stride = 1;
    for (int a = d - 1; a >= 0; --a) {
        g.strides[a] = stride;
        stride *= g.counts[a];
    }
    g.total = stride;
    return g;
}

Index GridSpec::flat_of(std::span<const Index> idx) const {
    Index flat = 0;
    for (int a = 0; a < dim(); ++a) {
        if (idx[a] < 0 || idx[a] >= counts[a]) {
            throw std::out_of_range("GridSpec::flat_of: index outside grid");
        }
        flat += idx[a] * strides[a];
    }
    return flat;
}

void GridSpec::idx_of(Index flat, std::span<Index> out) const {
    if (flat < 0 || flat >= total) throw std::out_of_range("GridSpec::idx_of: flat outside grid");
    for (int a = 0; a < dim(); ++a) out[a] = (flat / strides[a]) % counts[a];
}

void GridSpec::point_of(Index flat, std::span<double> out) const {
    if (flat < 0 || flat >= total) throw std::out_of_range("GridSpec::point_of: flat outside grid");
    for (int a = 0; a < dim(); ++a) {
        out[a] = domain.lo[a] + static_cast<double>(coord(flat, a)) * step;
    }
}

std::vector<double> GridSpec::point_of(Index flat) const {
    std::vector<double> p(dim());
    point_of(flat, p);
    return p;
}

Index GridSpec::nearest_flat(std::span<const double> p) const {
    Index flat = 0;
    for (int a = 0; a < dim(); ++a) {
        auto i = static_cast<Index>(std::floor((p[a] - domain.lo[a]) / step + 0.5));
        i = std::clamp(i, Index{0}, counts[a] - 1);
        flat += i * strides[a];
    }
    return flat;
}

bool GridSpec::same_layout(const GridSpec& other) const {
    return counts == other.counts && step == other.step && domain.lo == other.domain.lo;
}

RestrictedGrid RestrictedGrid::full(GridSpec spec) {
    RestrictedGrid g;
    g.spec_ = std::move(spec);
    g.all_ = true;
    return g;
}

RestrictedGrid RestrictedGrid::subset(GridSpec spec, std::vector<Index> members) {
    for (Index m : members) {
        if (m < 0 || m >= spec.total) {
            throw std::out_of_range("RestrictedGrid::subset: member outside grid");
        }
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    RestrictedGrid g;
    g.spec_ = std::move(spec);
    g.all_ = false;
    g.members_ = std::move(members);
    return g;
}

bool RestrictedGrid::contains(Index flat) const {
    if (flat < 0 || flat >= spec_.total) return false;
    if (all_) return true;
    return std::binary_search(members_.begin(), members_.end(), flat);
}

Index RestrictedGrid::rank_of(Index flat) const {
    if (flat < 0 || flat >= spec_.total) return -1;
    if (all_) return flat;
    const auto it = std::lower_bound(members_.begin(), members_.end(), flat);
    if (it == members_.end() || *it != flat) return -1;
    return static_cast<Index>(it - members_.begin());
}

std::optional<Index> RestrictedGrid::axis_neighbor(Index flat, int axis, int dir) const {
    const Index c = spec_.coord(flat, axis) + dir;
    if (c < 0 || c >= spec_.counts[axis]) return std::nullopt;
    const Index n = flat + dir * spec_.strides[axis];
    if (!all_ && !std::binary_search(members_.begin(), members_.end(), n)) return std::nullopt;
    return n;
}

std::vector<Index> nodes_in_region(const RestrictedGrid& grid, const Region& region) {
    const GridSpec& spec = grid.spec();
    if (region.dim() != spec.dim()) {
        throw std::invalid_argument("nodes_in_region: dimension mismatch");
    }
    std::vector<double> rlo, rhi;
    region.bounds(rlo, rhi);

    const int d = spec.dim();
    std::vector<Index> ilo(d), ihi(d);
    for (int a = 0; a < d; ++a) {
        const double lo = spec.domain.lo[a];
        Index i0 = static_cast<Index>(std::ceil((rlo[a] - lo) / spec.step - kGridEps));
        Index i1 = static_cast<Index>(std::floor((rhi[a] - lo) / spec.step + kGridEps));
        ilo[a] = std::clamp(i0, Index{0}, spec.counts[a] - 1);
        ihi[a] = std::clamp(i1, Index{0}, spec.counts[a] - 1);
        if (i1 < 0 || i0 >= spec.counts[a]) return {};
    }

    std::vector<Index> idx(ilo);
    std::vector<double> point(d);
    std::vector<Index> out;
    while (true) {
        Index flat = 0;
        for (int a = 0; a < d; ++a) flat += idx[a] * spec.strides[a];
        if (grid.contains(flat)) {
            spec.point_of(flat, point);
            if (region.contains(point)) out.push_back(flat);
        }
        int a = d - 1;
        for (; a >= 0; --a) {
            if (++idx[a] <= ihi[a]) break;
            idx[a] = ilo[a];
        }
        if (a < 0) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace hj
