#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hj {

using Index = std::int64_t;

// Axis-aligned box (lo_i, hi_i) with lo_i < hi_i on every axis. Runtime
// dimension; all points handed to member functions must match dim().
struct BoxDomain {
    std::vector<double> lo;
    std::vector<double> hi;

    BoxDomain() = default;
    BoxDomain(std::vector<double> lo_, std::vector<double> hi_);

    // Unit cube [0,1]^d.
    static BoxDomain unit_cube(int dim);

    int dim() const { return static_cast<int>(lo.size()); }
    double extent(int axis) const { return hi[axis] - lo[axis]; }
    // Largest extent over all axes.
    double max_extent() const;
    // Closed membership test.
    bool contains(std::span<const double> p) const;
};

// Closed point sets used for start/target regions and speed-field geometry.
// A region is a Euclidean ball, an axis-aligned box, or a finite union of
// regions. Membership is closed: boundary points belong to the set.
class Region {
  public:
    static Region ball(std::vector<double> center, double radius);
    static Region box(std::vector<double> lo, std::vector<double> hi);
    static Region join(std::vector<Region> parts);

    bool contains(std::span<const double> p) const;
    int dim() const;

    // Region grown by the Minkowski sum with a closed Euclidean ball of
    // radius pad >= 0. Boxes grow by pad on every side, which contains the
    // exact sum; only used to enlarge stopping fronts, so a superset is fine.
    Region inflate(double pad) const;

    // Axis-aligned bounding box, used to narrow node scans.
    void bounds(std::vector<double>& lo, std::vector<double>& hi) const;

  private:
    enum class Kind { ball, box, join };
    Kind kind_ = Kind::ball;
    std::vector<double> a_;  // ball center, or box lo
    std::vector<double> b_;  // box hi
    double radius_ = 0.0;
    std::vector<Region> parts_;
};

}  // namespace hj
