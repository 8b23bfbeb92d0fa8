#pragma once

#include <json.hpp>

#include "grasplab/geometry.hpp"
#include "grasplab/scene.hpp"

namespace grasplab {

using FingerMaterial = Material;

struct GripperSpec {
    int n_fingers = 2;            // 2 (precise) or 4 (power)
    FingerMaterial material = Material::Rigid;
    double pad_w = 10.0;          // pad thickness along the closing axis, mm
    double pad_len = 30.0;        // pad length perpendicular to the closing axis, mm
    double pad_gap = 24.0;        // center spacing of the two pads per side (4-finger)
    double max_open = 160.0;      // mm
    double min_close = 0.0;       // mm
    double soft_depth = 12.0;     // max conforming penetration, mm; 0 for rigid pads
    double soft_angle = 15.0 * M_PI / 180.0; // extra angular tolerance; 0 for rigid pads

    // pad span across the closing axis: pad_len, or pad_len + pad_gap for 4 fingers
    double effective_span() const {
        return n_fingers == 4 ? pad_len + pad_gap : pad_len;
    }
    void validate() const;
    std::string tag() const; // e.g. "2F-soft"
};

enum class InteractionClass { RigidRigid, RigidSoft, SoftRigid, SoftSoft };

const char* interaction_name(InteractionClass c);

InteractionClass classify_interaction(FingerMaterial finger, Material object_material);

struct GraspConfig {
    double x = 0.0;   // mm
    double y = 0.0;   // mm
    double phi = 0.0; // closing-axis angle, radians in [0, pi)

    Vec2 center() const { return {x, y}; }
    Vec2 closing_dir() const { return unit_vec(phi); }
};

// Contact/tolerance model constants; all lengths mm, angles radians.
struct ContactConfig {
    double pos_tol0 = 4.0;
    double ang_tol0 = 10.0 * M_PI / 180.0;
    double h_ref = 40.0;             // soft-finger adaptation reference height
    double pinch_margin = 10.0;      // extra positional slack on soft objects
    double descent_clearance = 25.0; // objects at or below this height are not hit on descent
    double width_axis_step = M_PI / 180.0; // sweep step for the local width axis
    double width_tie_eps = 1e-6;     // widths within this of the min tie for the axis
};

struct ToleranceBudget {
    double pos_tol = 0.0; // mm
    double ang_tol = 0.0; // radians
};

// World-space pad rectangles at the given opening. 2 pads for 2 fingers,
// 4 pads (offset +-pad_gap/2 across the closing axis) for 4 fingers.
std::vector<Polygon> pad_polygons(const GripperSpec& spec, const GraspConfig& u, double opening);

// Base tolerances plus the soft-interaction bonuses described by the
// contact model: soft pads add height-scaled slack, soft objects accept any
// angle and extra positional slack, 4-finger spans widen pos_tol.
ToleranceBudget tolerance_budget(const GripperSpec& spec, const ObjectModel& object,
                                 const ContactConfig& cfg);

nlohmann::json gripper_to_json(const GripperSpec& spec);
GripperSpec gripper_from_json(const nlohmann::json& j);
GripperSpec gripper_by_name(const std::string& name); // precise_rigid, precise_soft, power_rigid, power_soft

} // namespace grasplab
