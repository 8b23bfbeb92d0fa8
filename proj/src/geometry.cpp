#include "grasplab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grasplab {

double polygon_area(const Polygon& poly) {
    const size_t n = poly.size();
    if (n < 3) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * s;
}

Vec2 polygon_centroid(const Polygon& poly) {
    const size_t n = poly.size();
    if (n == 0) return {0.0, 0.0};
    if (n == 1) return poly[0];
    if (n == 2) return (poly[0] + poly[1]) * 0.5;
    double a = 0.0;
    Vec2 c{0.0, 0.0};
    for (size_t i = 0; i < n; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % n];
        const double w = cross(p, q);
        a += w;
        c = c + (p + q) * w;
    }
    if (std::abs(a) < 1e-30) { // nearly collinear, fall back to vertex mean
        Vec2 m{0.0, 0.0};
        for (const Vec2 p : poly) m = m + p;
        return m * (1.0 / static_cast<double>(n));
    }
    return c * (1.0 / (3.0 * a));
}

bool polygon_contains(const Polygon& poly, Vec2 p) {
    const size_t n = poly.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        if (cross(b - a, p - a) < 0.0) return false;
    }
    return true;
}

bool polygon_is_convex_ccw(const Polygon& poly) {
    const size_t n = poly.size();
    if (n < 3) return false;
    if (polygon_area(poly) <= 0.0) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % n];
        const Vec2 c = poly[(i + 2) % n];
        if (cross(b - a, c - b) < 0.0) return false;
    }
    return true;
}

Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c) {
    Polygon out;
    const size_t m = poly.size();
    if (m == 0) return out;
    out.reserve(m + 1);
    for (size_t i = 0; i < m; ++i) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[(i + 1) % m];
        const double da = dot(a, n) - c;
        const double db = dot(b, n) - c;
        if (da <= 0.0) out.push_back(a);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
            const double t = da / (da - db);
            out.push_back(a + (b - a) * t);
        }
    }
    return out;
}

Polygon convex_intersection(const Polygon& a, const Polygon& b) {
    Polygon out = a;
    const size_t n = b.size();
    for (size_t i = 0; i < n && !out.empty(); ++i) {
        const Vec2 p = b[i];
        const Vec2 q = b[(i + 1) % n];
        const Vec2 nrm = perp(q - p); // inward normal for ccw polygon
        // inside: cross(q - p, x - p) >= 0  <=>  dot(x, nrm) >= dot(p, nrm)
        out = clip_halfplane(out, -nrm, -dot(p, nrm));
    }
    return out;
}

namespace {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) return norm(p - a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm(p - (a + ab * t));
}

} // namespace

double polygon_distance(const Polygon& poly, Vec2 p) {
    if (poly.empty()) return std::numeric_limits<double>::infinity();
    if (polygon_contains(poly, p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
    }
    return best;
}

Polygon convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;
    Polygon hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) { // lower
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) { // upper
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

MinAreaRect min_area_rect(const Polygon& hull) {
    MinAreaRect best;
    best.area = std::numeric_limits<double>::infinity();
    const size_t n = hull.size();
    if (n == 0) return MinAreaRect{};
    if (n == 1) {
        return MinAreaRect{hull[0], {1.0, 0.0}, {0.0, 1.0}, 0.0, 0.0, 0.0};
    }

    auto consider = [&](Vec2 dir) {
        const double len = norm(dir);
        if (len <= 0.0) return;
        const Vec2 u{dir.x / len, dir.y / len};
        const Vec2 v = perp(u);
        double umin = dot(hull[0], u), umax = umin;
        double vmin = dot(hull[0], v), vmax = vmin;
        for (const Vec2 p : hull) {
            const double pu = dot(p, u), pv = dot(p, v);
            umin = std::min(umin, pu);
            umax = std::max(umax, pu);
            vmin = std::min(vmin, pv);
            vmax = std::max(vmax, pv);
        }
        const double du = umax - umin, dv = vmax - vmin;
        const double area = du * dv;
        if (area < best.area) {
            best.area = area;
            best.center = u * (0.5 * (umin + umax)) + v * (0.5 * (vmin + vmax));
            if (du >= dv) {
                best.axis_long = u;
                best.len_long = du;
                best.axis_short = v;
                best.len_short = dv;
            } else {
                best.axis_long = v;
                best.len_long = dv;
                best.axis_short = u;
                best.len_short = du;
            }
        }
    };

    for (size_t i = 0; i < n; ++i) consider(hull[(i + 1) % n] - hull[i]);
    if (!std::isfinite(best.area)) return MinAreaRect{};
    return best;
}

double convex_penetration(const Polygon& a, const Polygon& b) {
    if (a.size() < 2 || b.size() < 2) return 0.0;
    double depth = std::numeric_limits<double>::infinity();

    auto project = [](const Polygon& poly, Vec2 axis, double& lo, double& hi) {
        lo = hi = dot(poly[0], axis);
        for (const Vec2 p : poly) {
            const double v = dot(p, axis);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    };

    auto scan_edges = [&](const Polygon& poly) -> bool {
        const size_t n = poly.size();
        for (size_t i = 0; i < n; ++i) {
            Vec2 axis = perp(poly[(i + 1) % n] - poly[i]);
            const double len = norm(axis);
            if (len <= 0.0) continue;
            axis = axis * (1.0 / len);
            double alo, ahi, blo, bhi;
            project(a, axis, alo, ahi);
            project(b, axis, blo, bhi);
            const double overlap = std::min(ahi, bhi) - std::max(alo, blo);
            if (overlap <= 0.0) return false;
            depth = std::min(depth, overlap);
        }
        return true;
    };

    if (!scan_edges(a) || !scan_edges(b)) return 0.0;
    return std::isfinite(depth) ? depth : 0.0;
}

std::optional<std::pair<double, double>> segment_polygon_span(const Polygon& poly, Vec2 a, Vec2 b) {
    const size_t n = poly.size();
    if (n < 3) return std::nullopt;
    double t_in = 0.0, t_out = 1.0;
    const Vec2 d = b - a;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % n];
        const Vec2 e = q - p;
        // inside: cross(e, x - p) >= 0
        const double num = cross(e, a - p);
        const double den = cross(e, d);
        if (std::abs(den) < 1e-300) {
            if (num < 0.0) return std::nullopt; // parallel and outside
            continue;
        }
        const double t = -num / den;
        if (den > 0.0) { // entering
            t_in = std::max(t_in, t);
        } else { // leaving
            t_out = std::min(t_out, t);
        }
        if (t_in > t_out) return std::nullopt;
    }
    return std::make_pair(t_in, t_out);
}

Polygon make_rect_polygon(Vec2 center, Vec2 axis, double len_along, double len_perp) {
    const Vec2 u = axis * (0.5 * len_along);
    const Vec2 v = perp(axis) * (0.5 * len_perp);
    return {center - u - v, center + u - v, center + u + v, center - u + v};
}

Polygon circle_polygon(Vec2 center, double radius, int n) {
    Polygon poly;
    poly.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        poly.push_back(center + Vec2{radius * std::cos(t), radius * std::sin(t)});
    }
    return poly;
}

} // namespace grasplab
