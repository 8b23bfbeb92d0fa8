#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace grasplab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 unit_vec(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Strip of points p with |dot(p - center, perp(axis))| <= half_width.
// axis is the measurement direction and must be normalized.
struct Band {
    Vec2 center;
    double half_width = 0.0;
};

using Polygon = std::vector<Vec2>; // counter-clockwise, convex

double polygon_area(const Polygon& poly);
Vec2 polygon_centroid(const Polygon& poly);
bool polygon_contains(const Polygon& poly, Vec2 p);
bool polygon_is_convex_ccw(const Polygon& poly);

// Clips a convex polygon against the half-plane dot(p, n) <= c.
Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c);

// Intersection of two convex polygons (Sutherland-Hodgman).
Polygon convex_intersection(const Polygon& a, const Polygon& b);

// Distance from p to the polygon; 0 when inside.
double polygon_distance(const Polygon& poly, Vec2 p);

// Convex hull (monotone chain). Input need not be sorted; output is ccw.
Polygon convex_hull(std::vector<Vec2> points);

struct MinAreaRect {
    Vec2 center;
    // side directions are unit vectors; len_long >= len_short
    Vec2 axis_long;
    Vec2 axis_short;
    double len_long = 0.0;
    double len_short = 0.0;
    double area = 0.0;
};

// Minimum-area enclosing rectangle of a convex hull (edge-flush scan).
// Degenerate inputs (point, segment) yield zero-width rectangles.
MinAreaRect min_area_rect(const Polygon& hull);

// Minimum translation distance that separates two convex polygons (SAT);
// 0 when they do not overlap.
double convex_penetration(const Polygon& a, const Polygon& b);

// Parameter interval [t_in, t_out] of segment a + t*(b - a), t in [0,1],
// inside the convex polygon; nullopt when the segment misses it.
std::optional<std::pair<double, double>> segment_polygon_span(const Polygon& poly, Vec2 a, Vec2 b);

Polygon make_rect_polygon(Vec2 center, Vec2 axis, double len_along, double len_perp);

// Regular n-gon inscribed in the circle; local vertex k at angle 2*pi*k/n.
Polygon circle_polygon(Vec2 center, double radius, int n);

} // namespace grasplab
