#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hj/geometry.hpp"

namespace hj {

// Uniform Cartesian grid over a box: node (i_0,...,i_{d-1}) sits at
// lo + i*step, with counts_i = floor((hi_i - lo_i)/step) + 1 nodes per axis.
// Boundary nodes are included; the last node may fall short of hi when step
// does not divide the extent. Flat indices are row-major with axis 0 slowest.
struct GridSpec {
    BoxDomain domain;
    double step = 0.0;
    std::vector<Index> counts;
    std::vector<Index> strides;
    Index total = 0;

    static GridSpec regular(BoxDomain domain, double step);

    int dim() const { return domain.dim(); }

    Index flat_of(std::span<const Index> idx) const;
    void idx_of(Index flat, std::span<Index> out) const;
    // Coordinate of a node along one axis, without unpacking the full index.
    Index coord(Index flat, int axis) const {
        return (flat / strides[axis]) % counts[axis];
    }

    void point_of(Index flat, std::span<double> out) const;
    std::vector<double> point_of(Index flat) const;

    // Grid node nearest to p, ties toward the lower index.
    Index nearest_flat(std::span<const double> p) const;

    bool same_layout(const GridSpec& other) const;
};

// A grid restricted to an explicit member set. The full grid is the common
// special case and skips the member list entirely. Members are kept sorted
// by flat index, so rank order equals flat order and iteration is
// deterministic. Ranks are dense 0..size()-1 and index per-node storage.
class RestrictedGrid {
  public:
    static RestrictedGrid full(GridSpec spec);
    // members must be valid flat indices; they are sorted and deduplicated.
    static RestrictedGrid subset(GridSpec spec, std::vector<Index> members);

    const GridSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim(); }
    bool is_full() const { return all_; }

    Index size() const { return all_ ? spec_.total : static_cast<Index>(members_.size()); }
    bool contains(Index flat) const;
    // Dense rank of a member, or -1 when flat is not a member.
    Index rank_of(Index flat) const;
    Index member_at(Index rank) const { return all_ ? rank : members_[static_cast<size_t>(rank)]; }

    // Member neighbor of flat one step along axis (dir = -1 or +1);
    // nullopt when the step leaves the box or the member set.
    std::optional<Index> axis_neighbor(Index flat, int axis, int dir) const;

  private:
    GridSpec spec_;
    bool all_ = true;
    std::vector<Index> members_;
};

// Member nodes whose points lie in the region (closed membership), sorted by
// flat index. The scan is limited to the region's index bounding box.
std::vector<Index> nodes_in_region(const RestrictedGrid& grid, const Region& region);

}  // namespace hj
