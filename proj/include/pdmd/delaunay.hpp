#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace pdmd {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
double orient2d(const Point2& a, const Point2& b, const Point2& c);

/// Positive when d lies strictly inside the circumcircle of the
/// counter-clockwise triangle (a, b, c).
double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

/// Bowyer-Watson Delaunay triangulation of a planar point set.
///
/// Cavities are grown from the triangle containing the new point, so they stay
/// connected; cocircular ties (incircle == 0) are resolved in insertion order,
/// which is the lexicographic order of the input coordinates.
class Delaunay2D {
public:
    using Triangle = std::array<std::size_t, 3>;  // indices into points(), counter-clockwise

    struct Location {
        std::size_t triangle = 0;
        std::array<double, 3> barycentric{};  // non-negative, sums to 1
    };

    /// Throws Error(degenerate_geometry) for fewer than 3 points or a collinear
    /// set, Error(duplicate_points) for repeated points.
    explicit Delaunay2D(std::vector<Point2> points);

    const std::vector<Point2>& points() const { return points_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }

    /// Convex hull vertex indices, counter-clockwise.
    const std::vector<std::size_t>& hull() const { return hull_; }

    /// Triangle containing `q` with its barycentric coordinates, or nothing
    /// when q is outside the convex hull.
    std::optional<Location> locate(const Point2& q) const;

private:
    bool triangulate(double super_scale);

    std::vector<Point2> points_;
    std::vector<Triangle> triangles_;
    std::vector<std::size_t> hull_;
    double extent_ = 1.0;
};

}  // namespace pdmd
