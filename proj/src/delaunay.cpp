#include "pdmd/delaunay.hpp"

#include "pdmd/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <utility>

namespace pdmd {

double orient2d(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    return alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
}

namespace {

std::vector<std::size_t> convex_hull(const std::vector<Point2>& pts) {
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
    });
    std::vector<std::size_t> hull(2 * idx.size());
    std::size_t k = 0;
    for (std::size_t i : idx) {
        while (k >= 2 && orient2d(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= 0) --k;
        hull[k++] = i;
    }
    for (std::size_t t = k + 1, j = idx.size(); j-- > 1;) {
        const std::size_t i = idx[j - 1];
        while (k >= t && orient2d(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= 0) --k;
        hull[k++] = i;
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(const std::vector<Point2>& pts, const std::vector<std::size_t>& ring) {
    double a = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const auto& p = pts[ring[i]];
        const auto& q = pts[ring[(i + 1) % ring.size()]];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

}  // namespace

Delaunay2D::Delaunay2D(std::vector<Point2> points) : points_(std::move(points)) {
    if (points_.size() < 3) {
        throw Error(ErrorCode::degenerate_geometry, "triangulation needs at least 3 points, got " +
                                                        std::to_string(points_.size()));
    }
    for (const auto& p : points_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw Error(ErrorCode::invalid_argument, "non-finite point in triangulation input");
        }
    }
    std::vector<Point2> sorted = points_;
    std::sort(sorted.begin(), sorted.end(),
              [](const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].x == sorted[i - 1].x && sorted[i].y == sorted[i - 1].y) {
            throw Error(ErrorCode::duplicate_points, "duplicate point in triangulation input");
        }
    }

    double xmin = sorted.front().x, xmax = sorted.back().x;
    double ymin = points_[0].y, ymax = points_[0].y;
    for (const auto& p : points_) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    extent_ = std::max(xmax - xmin, ymax - ymin);

    // Collinearity: every point on the line through the first and farthest point.
    const Point2& p0 = points_[0];
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const double d = std::hypot(points_[i].x - p0.x, points_[i].y - p0.y);
        if (d > best) {
            best = d;
            far = i;
        }
    }
    double max_area = 0.0;
    for (const auto& p : points_) max_area = std::max(max_area, std::abs(orient2d(p0, points_[far], p)));
    if (max_area <= 1e-12 * extent_ * extent_) {
        throw Error(ErrorCode::degenerate_geometry, "all points are collinear; no 2-simplex exists");
    }

    hull_ = convex_hull(points_);
    for (double scale : {1e2, 1e4, 1e6}) {
        if (triangulate(scale)) return;
    }
    throw Error(ErrorCode::numerical, "Delaunay triangulation did not cover the convex hull");
}

bool Delaunay2D::triangulate(double super_scale) {
    const std::size_t n = points_.size();
    std::vector<Point2> pts = points_;
    double cx = 0.0, cy = 0.0;
    for (const auto& p : points_) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    const double big = super_scale * extent_;
    pts.push_back({cx - 3.0 * big, cy - 3.0 * big});
    pts.push_back({cx + 3.0 * big, cy - 3.0 * big});
    pts.push_back({cx, cy + 3.0 * big});

    std::vector<Triangle> tris{{n, n + 1, n + 2}};
    std::vector<bool> alive{true};
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> owner;  // directed edge -> triangle
    auto add_triangle = [&](Triangle t) {
        const std::size_t id = tris.size();
        tris.push_back(t);
        alive.push_back(true);
        for (int e = 0; e < 3; ++e) owner[{t[e], t[(e + 1) % 3]}] = id;
    };
    auto kill_triangle = [&](std::size_t id) {
        alive[id] = false;
        const auto& t = tris[id];
        for (int e = 0; e < 3; ++e) {
            auto it = owner.find({t[e], t[(e + 1) % 3]});
            if (it != owner.end() && it->second == id) owner.erase(it);
        }
    };
    for (int e = 0; e < 3; ++e) owner[{tris[0][e], tris[0][(e + 1) % 3]}] = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pts[a].x < pts[b].x || (pts[a].x == pts[b].x && pts[a].y < pts[b].y);
    });

    for (std::size_t pi : order) {
        const Point2& p = pts[pi];
        std::size_t start = tris.size();
        for (std::size_t t = 0; t < tris.size(); ++t) {
            if (!alive[t]) continue;
            const auto& tr = tris[t];
            if (orient2d(pts[tr[0]], pts[tr[1]], p) >= 0 && orient2d(pts[tr[1]], pts[tr[2]], p) >= 0 &&
                orient2d(pts[tr[2]], pts[tr[0]], p) >= 0) {
                start = t;
                break;
            }
        }
        if (start == tris.size()) return false;

        std::set<std::size_t> cavity{start};
        std::vector<std::size_t> queue{start};
        while (!queue.empty()) {
            const std::size_t t = queue.back();
            queue.pop_back();
            for (int e = 0; e < 3; ++e) {
                auto it = owner.find({tris[t][(e + 1) % 3], tris[t][e]});
                if (it == owner.end() || cavity.count(it->second)) continue;
                const auto& nb = tris[it->second];
                if (incircle(pts[nb[0]], pts[nb[1]], pts[nb[2]], p) > 0.0) {
                    cavity.insert(it->second);
                    queue.push_back(it->second);
                }
            }
        }

        // Grow the cavity until it is star-shaped from p.
        std::vector<std::pair<std::size_t, std::size_t>> boundary;
        for (bool grown = true; grown;) {
            grown = false;
            boundary.clear();
            for (std::size_t t : cavity) {
                for (int e = 0; e < 3; ++e) {
                    const std::size_t a = tris[t][e];
                    const std::size_t b = tris[t][(e + 1) % 3];
                    auto it = owner.find({b, a});
                    if (it != owner.end() && cavity.count(it->second)) continue;
                    if (orient2d(pts[a], pts[b], p) <= 0.0) {
                        if (it == owner.end()) return false;
                        cavity.insert(it->second);
                        grown = true;
                        break;
                    }
                    boundary.emplace_back(a, b);
                }
                if (grown) break;
            }
        }
        for (std::size_t t : cavity) kill_triangle(t);
        for (const auto& [a, b] : boundary) add_triangle({a, b, pi});
    }

    triangles_.clear();
    double area = 0.0;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        if (!alive[t]) continue;
        const auto& tr = tris[t];
        if (tr[0] >= n || tr[1] >= n || tr[2] >= n) continue;
        const double a2 = orient2d(pts[tr[0]], pts[tr[1]], pts[tr[2]]);
        if (a2 <= 0.0) return false;
        area += 0.5 * a2;
        triangles_.push_back(tr);
    }
    const double hull_area = polygon_area(points_, hull_);
    return std::abs(area - hull_area) <= 1e-10 * hull_area;
}

std::optional<Delaunay2D::Location> Delaunay2D::locate(const Point2& q) const {
    std::optional<Location> best;
    double best_min = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tr = triangles_[t];
        const Point2& a = points_[tr[0]];
        const Point2& b = points_[tr[1]];
        const Point2& c = points_[tr[2]];
        const double area = orient2d(a, b, c);
        const double l0 = orient2d(b, c, q) / area;
        const double l1 = orient2d(c, a, q) / area;
        const double l2 = 1.0 - l0 - l1;
        const double mn = std::min({l0, l1, l2});
        if (mn > best_min) {
            best_min = mn;
            best = Location{t, {l0, l1, l2}};
        }
    }
    if (!best || best_min < -1e-12) return std::nullopt;
    double sum = 0.0;
    for (double& l : best->barycentric) {
        l = std::max(l, 0.0);
        sum += l;
    }
    for (double& l : best->barycentric) l /= sum;
    return best;
}

}  // namespace pdmd
