#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace csdflow {

// Periodic interpolating cubic spline on non-uniform knots. knots has one more
// entry than values; the last knot closes the period and maps back to
// values[0].
class PeriodicCubicSpline {
public:
    PeriodicCubicSpline(std::vector<double> knots, std::vector<double> values);

    double value(std::size_t segment, double t) const;
    double derivative(std::size_t segment, double t) const;
    std::size_t segments() const { return values_.size(); }
    double knot(std::size_t i) const { return knots_[i]; }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> second_;
};

// Planar closed curve through points, parametrized by cumulative chord length.
class ClosedCurveSpline {
public:
    // Arc lengths are precomputed for the first `measured` segments (all by
    // default); segment_length() is only valid for those.
    ClosedCurveSpline(std::span<const double> x, std::span<const double> y, std::size_t measured = 0);

    std::size_t segments() const { return sx_.segments(); }
    double knot(std::size_t i) const { return sx_.knot(i); }
    double segment_length(std::size_t seg) const { return seg_length_[seg]; }
    // Arc length from the start of `seg` to parameter t within it.
    double partial_length(std::size_t seg, double t) const;
    double speed(std::size_t seg, double t) const;
    double x(std::size_t seg, double t) const { return sx_.value(seg, t); }
    double y(std::size_t seg, double t) const { return sy_.value(seg, t); }

    // Parameter within `seg` at which the arc length from the segment start
    // equals `target` (0 <= target <= segment_length(seg)).
    double invert(std::size_t seg, double target) const;

private:
    ClosedCurveSpline(std::vector<double> knots, std::span<const double> x, std::span<const double> y,
                      std::size_t measured);

    PeriodicCubicSpline sx_;
    PeriodicCubicSpline sy_;
    std::vector<double> seg_length_;
};

} // namespace csdflow
