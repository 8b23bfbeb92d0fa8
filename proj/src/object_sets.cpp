#include <cmath>

#include "grasplab/error.hpp"
#include "grasplab/rng.hpp"
#include "grasplab/scene.hpp"

namespace grasplab {

namespace {

ObjectModel make_object(std::string id, ShapeSpec shape, Material mat, double height,
                        double mass, Rgb color) {
    ObjectModel m{std::move(id), std::move(shape), mat, height, mass, color};
    m.validate();
    return m;
}

// capsule footprint: rectangle body with semicircular caps, as a convex polygon
Polygon stadium_polygon(double body_len, double cap_radius, int pts_per_cap = 7) {
    Polygon verts;
    const double cx = body_len / 2.0;
    for (int k = 0; k < pts_per_cap; ++k) {
        const double t = -M_PI / 2 + M_PI * k / (pts_per_cap - 1);
        verts.push_back({cx + cap_radius * std::cos(t), cap_radius * std::sin(t)});
    }
    for (int k = 0; k < pts_per_cap; ++k) {
        const double t = M_PI / 2 + M_PI * k / (pts_per_cap - 1);
        verts.push_back({-cx + cap_radius * std::cos(t), cap_radius * std::sin(t)});
    }
    return verts;
}

// Hexagonal "cookie" whose diagonal waist is rotated away from the axes of
// its minimum-area bounding rectangle. scale_x != 1 keeps that rectangle
// unambiguous; mirror flips the waist to the other diagonal.
Polygon cookie_polygon(double scale, double scale_x, bool mirror) {
    Polygon verts = {{-10.0, -30.0}, {30.0, -30.0}, {30.0, 10.0},
                     {10.0, 30.0},   {-30.0, 30.0}, {-30.0, -10.0}};
    for (Vec2& v : verts) {
        v.x *= scale * scale_x * (mirror ? -1.0 : 1.0);
        v.y *= scale;
    }
    if (mirror) std::reverse(verts.begin(), verts.end()); // restore ccw
    return verts;
}

} // namespace

ObjectSetPreset level1_8() {
    ObjectSetPreset set;
    set.name = "Level1-8";
    set.members = {
        make_object("l1_baseball", ShapeSpec::circle(27.0), Material::Rigid, 54.0, 140.0,
                    {0.85, 0.30, 0.25}),
        make_object("l1_softball", ShapeSpec::circle(33.0), Material::Rigid, 66.0, 180.0,
                    {0.95, 0.85, 0.30}),
        make_object("l1_apple", ShapeSpec::circle(38.0), Material::Rigid, 72.0, 160.0,
                    {0.75, 0.10, 0.10}),
        make_object("l1_orange", ShapeSpec::ellipse(37.0, 27.0), Material::Rigid, 58.0, 150.0,
                    {0.95, 0.55, 0.10}),
        make_object("l1_mug", ShapeSpec::circle(42.0), Material::Rigid, 48.0, 300.0,
                    {0.20, 0.35, 0.80}),
        make_object("l1_box", ShapeSpec::rect(55.0, 38.0), Material::Rigid, 45.0, 250.0,
                    {0.90, 0.75, 0.20}),
        make_object("l1_cookie_a", ShapeSpec::polygon(cookie_polygon(1.0, 1.06, false)),
                    Material::Rigid, 40.0, 120.0, {0.55, 0.35, 0.20}),
        make_object("l1_cookie_b", ShapeSpec::polygon(cookie_polygon(0.92, 1.06, true)),
                    Material::Rigid, 38.0, 100.0, {0.45, 0.55, 0.25}),
    };
    return set;
}

ObjectSetPreset level2_8() {
    ObjectSetPreset set;
    set.name = "Level2-8";
    set.members = {
        make_object("l2_banana", ShapeSpec::polygon(stadium_polygon(100.0, 10.0)),
                    Material::Rigid, 15.0, 120.0, {0.90, 0.85, 0.15}),
        make_object("l2_mustard", ShapeSpec::ellipse(45.0, 27.0), Material::Rigid, 19.0, 600.0,
                    {0.95, 0.80, 0.10}),
        make_object("l2_plate", ShapeSpec::circle(73.0), Material::Rigid, 12.0, 350.0,
                    {0.30, 0.50, 0.75}),
        make_object("l2_soccer", ShapeSpec::circle(50.0), Material::Rigid, 100.0, 280.0,
                    {0.15, 0.15, 0.18}),
        make_object("l2_bowl", ShapeSpec::circle(62.0), Material::Rigid, 38.0, 320.0,
                    {0.30, 0.60, 0.70}),
        make_object("l2_brick", ShapeSpec::rect(95.0, 48.0), Material::Rigid, 32.0, 700.0,
                    {0.70, 0.25, 0.15}),
        make_object("l2_wedge",
                    ShapeSpec::polygon({{-45.0, -18.0}, {45.0, -18.0}, {30.0, 18.0}, {-38.0, 18.0}}),
                    Material::Rigid, 22.0, 260.0, {0.35, 0.25, 0.55}),
        make_object("l2_ruler", ShapeSpec::rect(110.0, 18.0), Material::Rigid, 10.0, 80.0,
                    {0.80, 0.35, 0.55}),
    };
    return set;
}

ObjectSetPreset soft_toys_25() {
    ObjectSetPreset set;
    set.name = "SoftToys25";
    Rng rng(20240101u);
    // plush pastels: every channel stays above 0.5, away from the saturated
    // colors of the rigid object sets
    const Rgb palette[10] = {{0.85, 0.60, 0.60}, {0.60, 0.72, 0.85}, {0.85, 0.80, 0.55},
                             {0.62, 0.82, 0.62}, {0.78, 0.62, 0.85}, {0.85, 0.68, 0.55},
                             {0.58, 0.80, 0.78}, {0.83, 0.70, 0.76}, {0.72, 0.70, 0.55},
                             {0.55, 0.65, 0.72}};
    for (int i = 0; i < 25; ++i) {
        ShapeSpec shape;
        switch (i % 4) {
            case 0:
                shape = ShapeSpec::circle(rng.uniform(18.0, 42.0));
                break;
            case 1: {
                const double a = rng.uniform(24.0, 45.0);
                shape = ShapeSpec::ellipse(a, rng.uniform(14.0, 0.8 * a));
                break;
            }
            case 2:
                shape = ShapeSpec::rect(rng.uniform(30.0, 80.0), rng.uniform(20.0, 60.0));
                break;
            case 3: {
                // lumpy toy: convex hull over a jittered octagon
                std::vector<Vec2> pts;
                for (int k = 0; k < 8; ++k) {
                    const double ang = 2.0 * M_PI * k / 8 + rng.uniform(-0.15, 0.15);
                    const double r = rng.uniform(20.0, 40.0);
                    pts.push_back({r * std::cos(ang), r * std::sin(ang)});
                }
                shape = ShapeSpec::polygon(convex_hull(pts));
                break;
            }
        }
        Rgb color = palette[i % 10];
        color.r = std::min(0.95, color.r + rng.uniform(-0.04, 0.04));
        color.g = std::min(0.95, color.g + rng.uniform(-0.04, 0.04));
        color.b = std::min(0.95, color.b + rng.uniform(-0.04, 0.04));
        set.members.push_back(make_object("toy_" + std::to_string(i + 1), shape, Material::Soft,
                                          rng.uniform(30.0, 85.0), rng.uniform(40.0, 350.0),
                                          color));
    }
    return set;
}

ObjectSetPreset object_set_by_name(const std::string& name) {
    if (name == "SoftToys25") return soft_toys_25();
    if (name == "Level1-8") return level1_8();
    if (name == "Level2-8") return level2_8();
    if (name == "Levels-16") {
        ObjectSetPreset set;
        set.name = "Levels-16";
        set.members = level1_8().members;
        const auto l2 = level2_8().members;
        set.members.insert(set.members.end(), l2.begin(), l2.end());
        return set;
    }
    raise(ErrorCode::ConfigError, "unknown object set: " + name);
}

} // namespace grasplab
