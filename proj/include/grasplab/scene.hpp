#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "grasplab/geometry.hpp"

namespace grasplab {

struct Pose2D {
    double x = 0.0; // mm
    double y = 0.0; // mm
    double theta = 0.0; // radians, normalized to [0, 2*pi)

    static Pose2D make(double x, double y, double theta);
};

enum class ShapeKind { Circle, Rect, Ellipse, Polygon };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::Circle;
    double radius = 0.0;          // Circle
    double width = 0.0;           // Rect, along local x
    double height = 0.0;          // Rect, along local y
    double a = 0.0;               // Ellipse semi-axis, local x
    double b = 0.0;               // Ellipse semi-axis, local y
    Polygon vertices;             // ConvexPolygon, local frame, ccw

    static ShapeSpec circle(double r);
    static ShapeSpec rect(double w, double h);
    static ShapeSpec ellipse(double a, double b);
    static ShapeSpec polygon(Polygon vertices);

    double area() const;
    // largest footprint extent over all directions
    double max_extent() const;
    void validate() const;
};

enum class Material { Rigid, Soft };

struct Rgb {
    double r = 0.0, g = 0.0, b = 0.0;
    bool operator==(const Rgb&) const = default;
};

struct ObjectModel {
    std::string id;
    ShapeSpec shape;
    Material material = Material::Rigid;
    double height = 0.0; // mm
    double mass = 0.0;   // g
    Rgb color;

    void validate() const;
};

struct Workspace {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool contains(Vec2 p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
};

struct PlacedObject {
    ObjectModel model;
    Pose2D pose;
};

struct Scene {
    Workspace workspace;
    std::vector<PlacedObject> objects;

    const PlacedObject* find(const std::string& id) const;
};

// A shape footprint resolved into world coordinates. All oracle geometry
// queries go through this type so circle/ellipse cases stay closed-form.
struct PlacedShape {
    ShapeKind kind = ShapeKind::Circle;
    Vec2 center;                    // world position of the local origin
    double radius = 0.0;            // circle
    double ea = 0.0, eb = 0.0;      // ellipse semi-axes
    double eang = 0.0;              // ellipse world rotation
    Polygon poly;                   // rect/polygon world vertices, ccw

    double area() const;
    bool contains(Vec2 p) const;
    double distance(Vec2 p) const;          // 0 inside
    double support(Vec2 dir) const;         // max of dot(p, dir)
    Vec2 centroid() const;
    // [min, max] of dot(p, dir) over (footprint restricted to band);
    // nullopt when the band misses the footprint. dir must be normalized,
    // band axis is dir.
    std::optional<std::pair<double, double>> band_interval(Vec2 dir, const Band& band) const;
    // width of (footprint restricted to band) measured along dir
    double extent_along(Vec2 dir, const Band& band) const;
    // [t_in, t_out] of segment a->b inside the footprint
    std::optional<std::pair<double, double>> segment_span(Vec2 a, Vec2 b) const;
    Polygon as_polygon(int n_curve_vertices) const;
};

PlacedShape place_shape(const ShapeSpec& shape, const Pose2D& pose);
bool footprint_inside_workspace(const PlacedShape& ps, const Workspace& ws);

struct ObjectSetPreset {
    std::string name;
    std::vector<ObjectModel> members;
};

// -- operations ------------------------------------------------------------

// Places `count` members (a seed-chosen subset) at uniform random poses so
// that every footprint lies inside the workspace and each pairwise overlap
// area stays within overlap_frac * min(area_i, area_j). Overlap areas use
// 64-gon approximations of curved footprints. Throws PlacementExhausted
// when 10000 rejection tries are not enough.
Scene place_randomly(const std::vector<ObjectModel>& members, const Workspace& workspace,
                     size_t count, uint64_t seed, double overlap_frac = 0.0);

double extent_along(const ObjectModel& object, const Pose2D& pose, Vec2 direction,
                    const Band& band);

Scene remove_object(const Scene& scene, const std::string& id);

// -- serialization ----------------------------------------------------------

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
nlohmann::json object_set_to_json(const ObjectSetPreset& set);
ObjectSetPreset object_set_from_json(const nlohmann::json& j);
nlohmann::json object_to_json(const ObjectModel& m);
ObjectModel object_from_json(const nlohmann::json& j);
uint64_t scene_hash(const Scene& scene);

// -- object set presets ------------------------------------------------------

ObjectSetPreset soft_toys_25();
ObjectSetPreset level1_8();
ObjectSetPreset level2_8();
ObjectSetPreset object_set_by_name(const std::string& name);

const char* material_name(Material m);

} // namespace grasplab
