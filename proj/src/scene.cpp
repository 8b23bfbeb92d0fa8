#include "grasplab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grasplab/error.hpp"
#include "grasplab/rng.hpp"
#include "grasplab/util.hpp"

namespace grasplab {

namespace {

constexpr int kCurveVertices = 64;   // polygonization of circle/ellipse for area checks
constexpr int kPlacementBudget = 10000;

Vec2 rotate(Vec2 p, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y, s * p.x + c * p.y};
}

} // namespace

Pose2D Pose2D::make(double x, double y, double theta) {
    const double two_pi = 2.0 * M_PI;
    double t = std::fmod(theta, two_pi);
    if (t < 0.0) t += two_pi;
    if (t >= two_pi) t = 0.0;
    return Pose2D{x, y, t};
}

ShapeSpec ShapeSpec::circle(double r) {
    ShapeSpec s;
    s.kind = ShapeKind::Circle;
    s.radius = r;
    return s;
}

ShapeSpec ShapeSpec::rect(double w, double h) {
    ShapeSpec s;
    s.kind = ShapeKind::Rect;
    s.width = w;
    s.height = h;
    return s;
}

ShapeSpec ShapeSpec::ellipse(double a, double b) {
    ShapeSpec s;
    s.kind = ShapeKind::Ellipse;
    s.a = a;
    s.b = b;
    return s;
}

ShapeSpec ShapeSpec::polygon(Polygon vertices) {
    ShapeSpec s;
    s.kind = ShapeKind::Polygon;
    s.vertices = std::move(vertices);
    return s;
}

double ShapeSpec::area() const {
    switch (kind) {
        case ShapeKind::Circle: return M_PI * radius * radius;
        case ShapeKind::Rect: return width * height;
        case ShapeKind::Ellipse: return M_PI * a * b;
        case ShapeKind::Polygon: return polygon_area(vertices);
    }
    return 0.0;
}

double ShapeSpec::max_extent() const {
    switch (kind) {
        case ShapeKind::Circle: return 2.0 * radius;
        case ShapeKind::Rect: return std::hypot(width, height);
        case ShapeKind::Ellipse: return 2.0 * std::max(a, b);
        case ShapeKind::Polygon: {
            double best = 0.0;
            for (size_t i = 0; i < vertices.size(); ++i)
                for (size_t j = i + 1; j < vertices.size(); ++j)
                    best = std::max(best, norm(vertices[i] - vertices[j]));
            return best;
        }
    }
    return 0.0;
}

void ShapeSpec::validate() const {
    switch (kind) {
        case ShapeKind::Circle:
            if (radius <= 0.0) raise(ErrorCode::ConfigError, "circle radius must be > 0");
            break;
        case ShapeKind::Rect:
            if (width <= 0.0 || height <= 0.0) raise(ErrorCode::ConfigError, "rect sides must be > 0");
            break;
        case ShapeKind::Ellipse:
            if (a <= 0.0 || b <= 0.0) raise(ErrorCode::ConfigError, "ellipse semi-axes must be > 0");
            break;
        case ShapeKind::Polygon:
            if (!polygon_is_convex_ccw(vertices))
                raise(ErrorCode::ConfigError, "polygon must be convex, ccw, with positive area");
            break;
    }
}

void ObjectModel::validate() const {
    shape.validate();
    if (height <= 0.0) raise(ErrorCode::ConfigError, "object height must be > 0: " + id);
    if (mass <= 0.0) raise(ErrorCode::ConfigError, "object mass must be > 0: " + id);
    if (color == Rgb{1.0, 1.0, 1.0})
        raise(ErrorCode::ConfigError, "object color must differ from background white: " + id);
}

const PlacedObject* Scene::find(const std::string& id) const {
    for (const auto& obj : objects)
        if (obj.model.id == id) return &obj;
    return nullptr;
}

// -- PlacedShape -------------------------------------------------------------

PlacedShape place_shape(const ShapeSpec& shape, const Pose2D& pose) {
    PlacedShape ps;
    ps.kind = shape.kind;
    ps.center = {pose.x, pose.y};
    switch (shape.kind) {
        case ShapeKind::Circle:
            ps.radius = shape.radius;
            break;
        case ShapeKind::Ellipse:
            ps.ea = shape.a;
            ps.eb = shape.b;
            ps.eang = pose.theta;
            break;
        case ShapeKind::Rect: {
            const Polygon local = {{-shape.width / 2, -shape.height / 2},
                                   {shape.width / 2, -shape.height / 2},
                                   {shape.width / 2, shape.height / 2},
                                   {-shape.width / 2, shape.height / 2}};
            ps.poly.reserve(4);
            for (const Vec2 p : local) ps.poly.push_back(ps.center + rotate(p, pose.theta));
            break;
        }
        case ShapeKind::Polygon:
            ps.poly.reserve(shape.vertices.size());
            for (const Vec2 p : shape.vertices) ps.poly.push_back(ps.center + rotate(p, pose.theta));
            break;
    }
    return ps;
}

namespace {

// M = R(eang) * diag(ea, eb); returns M^T * v
Vec2 ellipse_mt(const PlacedShape& e, Vec2 v) {
    const double c = std::cos(e.eang), s = std::sin(e.eang);
    return {e.ea * (c * v.x + s * v.y), e.eb * (-s * v.x + c * v.y)};
}

// coordinates of p in the unit-disk frame of the ellipse
Vec2 ellipse_local(const PlacedShape& e, Vec2 p) {
    const double c = std::cos(e.eang), s = std::sin(e.eang);
    const Vec2 d = p - e.center;
    return {(c * d.x + s * d.y) / e.ea, (-s * d.x + c * d.y) / e.eb};
}

Vec2 ellipse_point(const PlacedShape& e, double t) {
    const double c = std::cos(e.eang), s = std::sin(e.eang);
    const double lx = e.ea * std::cos(t), ly = e.eb * std::sin(t);
    return e.center + Vec2{c * lx - s * ly, s * lx + c * ly};
}

// max of dot(f, v) over {|v| <= 1, lo <= dot(g, v) <= hi}; the caller
// guarantees a non-empty feasible set.
double disk_band_support(Vec2 f, Vec2 g, double lo, double hi) {
    const double fn = norm(f);
    if (fn <= 0.0) return 0.0;
    const double gn = norm(g);
    if (gn <= 0.0) return fn;
    const double s_star = dot(g, f) / fn; // band coordinate of the free optimum
    if (s_star >= lo && s_star <= hi) return fn;
    const double beta = (s_star > hi) ? hi : lo;
    const Vec2 gu = g * (1.0 / gn);
    const double c = beta / gn;
    const double tau = std::sqrt(std::max(0.0, 1.0 - c * c));
    return c * dot(f, gu) + tau * std::abs(cross(f, gu));
}

} // namespace

double PlacedShape::area() const {
    switch (kind) {
        case ShapeKind::Circle: return M_PI * radius * radius;
        case ShapeKind::Ellipse: return M_PI * ea * eb;
        default: return polygon_area(poly);
    }
}

bool PlacedShape::contains(Vec2 p) const {
    switch (kind) {
        case ShapeKind::Circle: return norm(p - center) <= radius;
        case ShapeKind::Ellipse: {
            const Vec2 v = ellipse_local(*this, p);
            return dot(v, v) <= 1.0;
        }
        default: return polygon_contains(poly, p);
    }
}

double PlacedShape::distance(Vec2 p) const {
    switch (kind) {
        case ShapeKind::Circle: return std::max(0.0, norm(p - center) - radius);
        case ShapeKind::Ellipse: {
            const Vec2 v = ellipse_local(*this, p);
            if (dot(v, v) <= 1.0) return 0.0;
            // coarse scan over the boundary parameter, then golden-section
            const int n = 128;
            double best_t = 0.0, best_d = std::numeric_limits<double>::infinity();
            for (int k = 0; k < n; ++k) {
                const double t = 2.0 * M_PI * k / n;
                const double d = norm(p - ellipse_point(*this, t));
                if (d < best_d) {
                    best_d = d;
                    best_t = t;
                }
            }
            const double step = 2.0 * M_PI / n;
            double a = best_t - step, b = best_t + step;
            const double gr = 0.6180339887498949;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = norm(p - ellipse_point(*this, x1));
            double f2 = norm(p - ellipse_point(*this, x2));
            for (int it = 0; it < 90; ++it) {
                if (f1 < f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - gr * (b - a);
                    f1 = norm(p - ellipse_point(*this, x1));
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + gr * (b - a);
                    f2 = norm(p - ellipse_point(*this, x2));
                }
            }
            return std::min(f1, f2);
        }
        default: return polygon_distance(poly, p);
    }
}

double PlacedShape::support(Vec2 dir) const {
    switch (kind) {
        case ShapeKind::Circle: return dot(center, dir) + radius * norm(dir);
        case ShapeKind::Ellipse: return dot(center, dir) + norm(ellipse_mt(*this, dir));
        default: {
            double best = -std::numeric_limits<double>::infinity();
            for (const Vec2 p : poly) best = std::max(best, dot(p, dir));
            return best;
        }
    }
}

Vec2 PlacedShape::centroid() const {
    switch (kind) {
        case ShapeKind::Circle:
        case ShapeKind::Ellipse: return center;
        default: return polygon_centroid(poly);
    }
}

std::optional<std::pair<double, double>> PlacedShape::band_interval(Vec2 dir,
                                                                    const Band& band) const {
    const Vec2 n = perp(dir);
    const double w = band.half_width;
    switch (kind) {
        case ShapeKind::Circle: {
            const double off = dot(center - band.center, n);
            // band constraint in circle-local coordinates along n
            const double lo = std::max(-w - off, -radius);
            const double hi = std::min(w - off, radius);
            if (lo > hi) return std::nullopt;
            const double s = std::clamp(0.0, lo, hi);
            const double half = std::sqrt(std::max(0.0, radius * radius - s * s));
            const double mid = dot(center, dir);
            return std::make_pair(mid - half, mid + half);
        }
        case ShapeKind::Ellipse: {
            const Vec2 g = ellipse_mt(*this, n);
            const Vec2 f = ellipse_mt(*this, dir);
            const double off = dot(center - band.center, n);
            const double gn = norm(g);
            double lo = -w - off, hi = w - off;
            if (lo > gn || hi < -gn) return std::nullopt;
            lo = std::max(lo, -gn);
            hi = std::min(hi, gn);
            const double mid = dot(center, dir);
            return std::make_pair(mid - disk_band_support(-f, g, lo, hi),
                                  mid + disk_band_support(f, g, lo, hi));
        }
        default: {
            const double c = dot(band.center, n);
            Polygon clipped = clip_halfplane(poly, n, c + w);
            clipped = clip_halfplane(clipped, -n, -(c - w));
            if (clipped.empty()) return std::nullopt;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const Vec2 p : clipped) {
                const double v = dot(p, dir);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            return std::make_pair(lo, hi);
        }
    }
}

double PlacedShape::extent_along(Vec2 dir, const Band& band) const {
    const auto interval = band_interval(dir, band);
    return interval ? std::max(0.0, interval->second - interval->first) : 0.0;
}

std::optional<std::pair<double, double>> PlacedShape::segment_span(Vec2 a, Vec2 b) const {
    switch (kind) {
        case ShapeKind::Circle:
        case ShapeKind::Ellipse: {
            Vec2 v0, vd;
            if (kind == ShapeKind::Circle) {
                v0 = (a - center) * (1.0 / radius);
                vd = (b - a) * (1.0 / radius);
            } else {
                v0 = ellipse_local(*this, a);
                vd = ellipse_local(*this, b) - v0;
            }
            const double qa = dot(vd, vd);
            const double qb = 2.0 * dot(v0, vd);
            const double qc = dot(v0, v0) - 1.0;
            if (qa <= 0.0) return qc <= 0.0 ? std::make_optional(std::make_pair(0.0, 1.0)) : std::nullopt;
            const double disc = qb * qb - 4.0 * qa * qc;
            if (disc < 0.0) return std::nullopt;
            const double sq = std::sqrt(disc);
            double t1 = (-qb - sq) / (2.0 * qa);
            double t2 = (-qb + sq) / (2.0 * qa);
            t1 = std::max(t1, 0.0);
            t2 = std::min(t2, 1.0);
            if (t1 > t2) return std::nullopt;
            return std::make_pair(t1, t2);
        }
        default: return segment_polygon_span(poly, a, b);
    }
}

Polygon PlacedShape::as_polygon(int n_curve_vertices) const {
    switch (kind) {
        case ShapeKind::Circle: return circle_polygon(center, radius, n_curve_vertices);
        case ShapeKind::Ellipse: {
            Polygon p;
            p.reserve(n_curve_vertices);
            for (int k = 0; k < n_curve_vertices; ++k)
                p.push_back(ellipse_point(*this, 2.0 * M_PI * k / n_curve_vertices));
            return p;
        }
        default: return poly;
    }
}

bool footprint_inside_workspace(const PlacedShape& ps, const Workspace& ws) {
    return ps.support({1.0, 0.0}) <= ws.x_max && -ps.support({-1.0, 0.0}) >= ws.x_min &&
           ps.support({0.0, 1.0}) <= ws.y_max && -ps.support({0.0, -1.0}) >= ws.y_min;
}

// -- operations ---------------------------------------------------------------

Scene place_randomly(const std::vector<ObjectModel>& members, const Workspace& workspace,
                     size_t count, uint64_t seed, double overlap_frac) {
    if (count > members.size())
        raise(ErrorCode::ConfigError, "count exceeds member list size");
    Rng rng(derive_seed(seed, 0x9c3e5a));

    // seed-chosen subset (Fisher-Yates prefix)
    std::vector<size_t> order(members.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t i = 0; i + 1 < order.size() && i < count; ++i) {
        const size_t j = i + static_cast<size_t>(rng.uniform_int(order.size() - i));
        std::swap(order[i], order[j]);
    }

    Scene scene;
    scene.workspace = workspace;
    std::vector<PlacedShape> footprints;
    std::vector<Polygon> approx;
    std::vector<double> areas;
    int budget = kPlacementBudget;

    for (size_t k = 0; k < count; ++k) {
        const ObjectModel& model = members[order[k]];
        const double my_area = model.shape.area();
        for (;;) {
            if (budget-- <= 0)
                raise(ErrorCode::PlacementExhausted,
                      "no valid placement for '" + model.id + "' within budget");
            const double x = rng.uniform(workspace.x_min, workspace.x_max);
            const double y = rng.uniform(workspace.y_min, workspace.y_max);
            const double theta = rng.uniform(0.0, 2.0 * M_PI);
            const Pose2D pose = Pose2D::make(x, y, theta);
            const PlacedShape ps = place_shape(model.shape, pose);
            if (!footprint_inside_workspace(ps, workspace)) continue;

            const Polygon mine = ps.as_polygon(kCurveVertices);
            bool ok = true;
            for (size_t i = 0; i < footprints.size() && ok; ++i) {
                const double limit = overlap_frac * std::min(my_area, areas[i]);
                if (limit <= 0.0) {
                    if (convex_penetration(mine, approx[i]) > 0.0) ok = false;
                } else {
                    const double inter = polygon_area(convex_intersection(mine, approx[i]));
                    if (inter > limit) ok = false;
                }
            }
            if (!ok) continue;

            scene.objects.push_back({model, pose});
            footprints.push_back(ps);
            approx.push_back(mine);
            areas.push_back(my_area);
            break;
        }
    }
    return scene;
}

double extent_along(const ObjectModel& object, const Pose2D& pose, Vec2 direction,
                    const Band& band) {
    return place_shape(object.shape, pose).extent_along(direction, band);
}

Scene remove_object(const Scene& scene, const std::string& id) {
    Scene out;
    out.workspace = scene.workspace;
    bool found = false;
    for (const auto& obj : scene.objects) {
        if (obj.model.id == id && !found) {
            found = true;
            continue;
        }
        out.objects.push_back(obj);
    }
    if (!found) raise(ErrorCode::UnknownObject, "no object with id '" + id + "'");
    return out;
}

// -- serialization -------------------------------------------------------------

namespace {

nlohmann::json shape_to_json(const ShapeSpec& s) {
    nlohmann::json j;
    switch (s.kind) {
        case ShapeKind::Circle:
            j["type"] = "circle";
            j["radius_mm"] = s.radius;
            break;
        case ShapeKind::Rect:
            j["type"] = "rect";
            j["w_mm"] = s.width;
            j["h_mm"] = s.height;
            break;
        case ShapeKind::Ellipse:
            j["type"] = "ellipse";
            j["a_mm"] = s.a;
            j["b_mm"] = s.b;
            break;
        case ShapeKind::Polygon: {
            j["type"] = "polygon";
            nlohmann::json verts = nlohmann::json::array();
            for (const Vec2 p : s.vertices) verts.push_back({p.x, p.y});
            j["vertices_mm"] = std::move(verts);
            break;
        }
    }
    return j;
}

ShapeSpec shape_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "circle") return ShapeSpec::circle(j.at("radius_mm").get<double>());
    if (type == "rect") return ShapeSpec::rect(j.at("w_mm").get<double>(), j.at("h_mm").get<double>());
    if (type == "ellipse") return ShapeSpec::ellipse(j.at("a_mm").get<double>(), j.at("b_mm").get<double>());
    if (type == "polygon") {
        Polygon verts;
        for (const auto& v : j.at("vertices_mm")) verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        return ShapeSpec::polygon(std::move(verts));
    }
    raise(ErrorCode::ConfigError, "unknown shape type: " + type);
}

} // namespace

const char* material_name(Material m) { return m == Material::Rigid ? "rigid" : "soft"; }

nlohmann::json object_to_json(const ObjectModel& m) {
    return nlohmann::json{{"id", m.id},
                          {"shape", shape_to_json(m.shape)},
                          {"material", material_name(m.material)},
                          {"height_mm", m.height},
                          {"mass_g", m.mass},
                          {"color", {m.color.r, m.color.g, m.color.b}}};
}

ObjectModel object_from_json(const nlohmann::json& j) {
    ObjectModel m;
    m.id = j.at("id").get<std::string>();
    m.shape = shape_from_json(j.at("shape"));
    const std::string mat = j.at("material").get<std::string>();
    if (mat == "rigid") m.material = Material::Rigid;
    else if (mat == "soft") m.material = Material::Soft;
    else raise(ErrorCode::ConfigError, "unknown material: " + mat);
    m.height = j.at("height_mm").get<double>();
    m.mass = j.at("mass_g").get<double>();
    const auto& c = j.at("color");
    m.color = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    return m;
}

nlohmann::json scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["workspace"] = {{"x_min", scene.workspace.x_min},
                      {"y_min", scene.workspace.y_min},
                      {"x_max", scene.workspace.x_max},
                      {"y_max", scene.workspace.y_max}};
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& obj : scene.objects) {
        nlohmann::json o = object_to_json(obj.model);
        o["pose"] = {{"x_mm", obj.pose.x}, {"y_mm", obj.pose.y}, {"theta_rad", obj.pose.theta}};
        objs.push_back(std::move(o));
    }
    j["objects"] = std::move(objs);
    return j;
}

Scene scene_from_json(const nlohmann::json& j) {
    Scene scene;
    const auto& w = j.at("workspace");
    scene.workspace = {w.at("x_min").get<double>(), w.at("y_min").get<double>(),
                       w.at("x_max").get<double>(), w.at("y_max").get<double>()};
    for (const auto& o : j.at("objects")) {
        PlacedObject obj;
        obj.model = object_from_json(o);
        const auto& p = o.at("pose");
        obj.pose = Pose2D{p.at("x_mm").get<double>(), p.at("y_mm").get<double>(),
                          p.at("theta_rad").get<double>()};
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

nlohmann::json object_set_to_json(const ObjectSetPreset& set) {
    nlohmann::json members = nlohmann::json::array();
    for (const ObjectModel& m : set.members) members.push_back(object_to_json(m));
    return nlohmann::json{{"name", set.name}, {"members", std::move(members)}};
}

ObjectSetPreset object_set_from_json(const nlohmann::json& j) {
    ObjectSetPreset set;
    set.name = j.at("name").get<std::string>();
    for (const auto& m : j.at("members")) set.members.push_back(object_from_json(m));
    return set;
}

uint64_t scene_hash(const Scene& scene) { return fnv1a64(scene_to_json(scene).dump()); }

} // namespace grasplab
