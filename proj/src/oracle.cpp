#include "grasplab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grasplab/error.hpp"
#include "grasplab/rng.hpp"
#include "grasplab/util.hpp"

namespace grasplab {

const char* outcome_name(const GraspOutcome& o) {
    switch (o.kind) {
        case OutcomeKind::Success: return "Success";
        case OutcomeKind::EmergencyStop: return "EmergencyStop";
        case OutcomeKind::Failure:
            switch (o.reason) {
                case FailureReason::NoContact: return "Failure(NoContact)";
                case FailureReason::TooWide: return "Failure(TooWide)";
                case FailureReason::BadAlignment: return "Failure(BadAlignment)";
                case FailureReason::MultiObjectPinch: return "Failure(MultiObjectPinch)";
                case FailureReason::InsufficientPurchase: return "Failure(InsufficientPurchase)";
            }
    }
    return "?";
}

GraspOutcome outcome_from_name(const std::string& name) {
    if (name == "Success") return GraspOutcome::ok("");
    if (name == "EmergencyStop") return GraspOutcome::estop();
    if (name == "Failure(NoContact)") return GraspOutcome::fail(FailureReason::NoContact);
    if (name == "Failure(TooWide)") return GraspOutcome::fail(FailureReason::TooWide);
    if (name == "Failure(BadAlignment)") return GraspOutcome::fail(FailureReason::BadAlignment);
    if (name == "Failure(MultiObjectPinch)") return GraspOutcome::fail(FailureReason::MultiObjectPinch);
    if (name == "Failure(InsufficientPurchase)")
        return GraspOutcome::fail(FailureReason::InsufficientPurchase);
    raise(ErrorCode::ConfigError, "unknown outcome name: " + name);
}

nlohmann::json AttemptLog::to_json() const {
    nlohmann::json j{{"u", {{"x_mm", u.x}, {"y_mm", u.y}, {"phi_rad", u.phi}}},
                     {"gripper", gripper_to_json(gripper)},
                     {"outcome", outcome_name(outcome)},
                     {"scene_before_hash", hash_hex(scene_before_hash)},
                     {"seed", seed}};
    if (outcome.success()) j["object_id"] = outcome.object_id;
    j["interaction"] = interaction ? nlohmann::json(interaction_name(*interaction)) : nlohmann::json();
    return j;
}

double closing_angle_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), M_PI);
    return std::min(d, M_PI - d);
}

double width_axis_misalignment(const PlacedShape& fp, double phi, Vec2 grasp_center,
                               double band_half_width, const ContactConfig& cfg) {
    if (fp.kind == ShapeKind::Circle) return 0.0;

    const int steps = std::max(1, static_cast<int>(std::lround(M_PI / cfg.width_axis_step)));
    std::vector<double> widths(steps, 0.0);
    double w_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < steps; ++k) {
        const double theta = M_PI * k / steps;
        const double w = fp.extent_along(unit_vec(theta), Band{grasp_center, band_half_width});
        widths[k] = w;
        if (w > 0.0) w_min = std::min(w_min, w);
    }
    if (!std::isfinite(w_min)) return 0.0; // band misses the footprint entirely

    double beta = M_PI;
    for (int k = 0; k < steps; ++k) {
        if (widths[k] > 0.0 && widths[k] <= w_min + cfg.width_tie_eps)
            beta = std::min(beta, closing_angle_distance(phi, M_PI * k / steps));
    }
    return beta;
}

namespace {

constexpr int kPenetrationCurveVertices = 64;

} // namespace

std::pair<GraspOutcome, Scene> execute_grasp(const Scene& scene, const GripperSpec& gripper,
                                             const GraspConfig& u, const OracleConfig& cfg) {
    if (!(u.phi >= 0.0 && u.phi < M_PI))
        raise(ErrorCode::PhiOutOfRange, "phi must lie in [0, pi): " + std::to_string(u.phi));
    if (!scene.workspace.contains(u.center()))
        raise(ErrorCode::ConfigError, "grasp center outside workspace");

    std::vector<PlacedShape> footprints;
    footprints.reserve(scene.objects.size());
    for (const auto& obj : scene.objects) footprints.push_back(place_shape(obj.model.shape, obj.pose));

    // (1) descent with pads fully open
    const auto pads = pad_polygons(gripper, u, gripper.max_open);
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        const ObjectModel& model = scene.objects[i].model;
        if (model.height <= cfg.contact.descent_clearance) continue;
        const Polygon approx = footprints[i].as_polygon(kPenetrationCurveVertices);
        for (const Polygon& pad : pads) {
            const double pen = convex_penetration(pad, approx);
            if (pen <= 0.0) continue;
            const InteractionClass ic = classify_interaction(gripper.material, model.material);
            if (ic == InteractionClass::RigidRigid) return {GraspOutcome::estop(), scene};
            // the soft party conforms: soft objects squash under the pad,
            // soft pads absorb up to their conforming depth
            if (model.material == Material::Soft) continue;
            if (pen > gripper.soft_depth) return {GraspOutcome::fail(FailureReason::NoContact), scene};
        }
    }

    // (2) closing: the jaws sweep a band of the pad span; the target is the
    // object the closing jaws reach first from each side
    const Vec2 d = u.closing_dir();
    const Vec2 c = u.center();
    const double span_half = gripper.effective_span() / 2.0;
    const double travel = gripper.max_open / 2.0;
    const double center_d = dot(c, d);
    const Band band{c, span_half};

    std::optional<size_t> first_a, first_b;
    double best_lo = std::numeric_limits<double>::infinity();
    double best_hi = -best_lo;
    for (size_t i = 0; i < footprints.size(); ++i) {
        const auto interval = footprints[i].band_interval(d, band);
        if (!interval) continue;
        const double lo = interval->first - center_d;
        const double hi = interval->second - center_d;
        if (hi < -travel || lo > travel) continue; // beyond the jaw travel
        if (lo < best_lo) {
            best_lo = lo;
            first_a = i;
        }
        if (hi > best_hi) {
            best_hi = hi;
            first_b = i;
        }
    }
    if (!first_a) return {GraspOutcome::fail(FailureReason::NoContact), scene};
    if (*first_a != *first_b)
        return {GraspOutcome::fail(FailureReason::MultiObjectPinch), scene};
    const size_t target = *first_a;

    const PlacedShape& fp = footprints[target];
    const ObjectModel& model = scene.objects[target].model;
    const double width = fp.extent_along(d, band);
    if (width > gripper.max_open || width < gripper.min_close)
        return {GraspOutcome::fail(FailureReason::TooWide), scene};

    // (3) alignment and purchase
    const ToleranceBudget tol = tolerance_budget(gripper, model, cfg.contact);
    const double beta =
        tol.ang_tol >= M_PI ? 0.0 : width_axis_misalignment(fp, u.phi, c, span_half, cfg.contact);
    GraspOutcome outcome;
    if (beta > tol.ang_tol) outcome = GraspOutcome::fail(FailureReason::BadAlignment);
    else if (fp.distance(c) > tol.pos_tol)
        outcome = GraspOutcome::fail(FailureReason::InsufficientPurchase);
    else
        outcome = GraspOutcome::ok(model.id);

    if (cfg.label_flip_rate > 0.0) {
        // flip decision is a pure function of (scene, u, seed); only
        // alignment-stage outcomes flip
        const uint64_t h = scene_hash(scene) ^ fnv1a64(&u, sizeof(u));
        Rng flip(derive_seed(cfg.label_flip_seed, h));
        if (flip.uniform() < cfg.label_flip_rate)
            outcome = outcome.success() ? GraspOutcome::fail(FailureReason::BadAlignment)
                                        : GraspOutcome::ok(model.id);
    }

    if (outcome.success()) return {outcome, remove_object(scene, model.id)};
    return {outcome, scene};
}

SuccessMap brute_force_success_map(const Scene& scene, const GripperSpec& gripper, int nx, int ny,
                                   int n_bins, const OracleConfig& cfg) {
    if (nx < 1 || ny < 1 || n_bins < 1)
        raise(ErrorCode::ConfigError, "success map grid must be at least 1x1x1");
    SuccessMap map;
    map.nx = nx;
    map.ny = ny;
    map.n_bins = n_bins;
    map.cells.assign(static_cast<size_t>(nx) * ny * n_bins, 0);

    const Workspace& ws = scene.workspace;
    parallel_for(static_cast<size_t>(nx) * ny, [&](size_t cell) {
        const int i = static_cast<int>(cell) / ny;
        const int j = static_cast<int>(cell) % ny;
        const double x = ws.x_min + (i + 0.5) * ws.width() / nx;
        const double y = ws.y_min + (j + 0.5) * ws.height() / ny;
        for (int k = 0; k < n_bins; ++k) {
            const double phi = (k + 0.5) * M_PI / n_bins;
            const auto [outcome, after] = execute_grasp(scene, gripper, GraspConfig{x, y, phi}, cfg);
            map.cells[cell * n_bins + k] = outcome.success() ? 1 : 0;
        }
    });
    return map;
}

} // namespace grasplab
