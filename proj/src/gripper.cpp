#include "grasplab/gripper.hpp"

#include <algorithm>

#include "grasplab/error.hpp"

namespace grasplab {

void GripperSpec::validate() const {
    if (n_fingers != 2 && n_fingers != 4)
        raise(ErrorCode::ConfigError, "gripper must have 2 or 4 fingers");
    if (!(max_open > min_close) || min_close < 0.0)
        raise(ErrorCode::ConfigError, "gripper requires max_open > min_close >= 0");
    if (pad_w <= 0.0 || pad_len <= 0.0)
        raise(ErrorCode::ConfigError, "gripper pads require positive dimensions");
    if (n_fingers == 4 && pad_gap <= 0.0)
        raise(ErrorCode::ConfigError, "4-finger gripper requires pad_gap > 0");
    if (material == Material::Rigid && (soft_depth != 0.0 || soft_angle != 0.0))
        raise(ErrorCode::ConfigError, "rigid pads must have zero soft_depth and soft_angle");
}

std::string GripperSpec::tag() const {
    return std::to_string(n_fingers) + "F-" + material_name(material);
}

const char* interaction_name(InteractionClass c) {
    switch (c) {
        case InteractionClass::RigidRigid: return "RigidRigid";
        case InteractionClass::RigidSoft: return "RigidSoft";
        case InteractionClass::SoftRigid: return "SoftRigid";
        case InteractionClass::SoftSoft: return "SoftSoft";
    }
    return "?";
}

InteractionClass classify_interaction(FingerMaterial finger, Material object_material) {
    if (finger == Material::Rigid)
        return object_material == Material::Rigid ? InteractionClass::RigidRigid
                                                  : InteractionClass::RigidSoft;
    return object_material == Material::Rigid ? InteractionClass::SoftRigid
                                              : InteractionClass::SoftSoft;
}

std::vector<Polygon> pad_polygons(const GripperSpec& spec, const GraspConfig& u, double opening) {
    if (opening < spec.min_close || opening > spec.max_open)
        raise(ErrorCode::OpeningOutOfRange, "opening " + std::to_string(opening));
    const Vec2 d = u.closing_dir();
    const Vec2 p = perp(d);
    const Vec2 c = u.center();
    std::vector<Polygon> pads;
    if (spec.n_fingers == 2) {
        pads.push_back(make_rect_polygon(c - d * (opening / 2.0), d, spec.pad_w, spec.pad_len));
        pads.push_back(make_rect_polygon(c + d * (opening / 2.0), d, spec.pad_w, spec.pad_len));
    } else {
        for (const double side : {-1.0, 1.0})
            for (const double off : {-1.0, 1.0})
                pads.push_back(make_rect_polygon(c + d * (side * opening / 2.0) + p * (off * spec.pad_gap / 2.0),
                                                 d, spec.pad_w, spec.pad_len));
    }
    return pads;
}

ToleranceBudget tolerance_budget(const GripperSpec& spec, const ObjectModel& object,
                                 const ContactConfig& cfg) {
    ToleranceBudget tol{cfg.pos_tol0, cfg.ang_tol0};
    if (spec.material == Material::Soft) {
        const double s = std::clamp(object.height / cfg.h_ref, 0.0, 1.0);
        tol.pos_tol += spec.soft_depth * s;
        tol.ang_tol += spec.soft_angle * s;
    }
    const bool soft_object = object.material == Material::Soft;
    if (soft_object) {
        tol.ang_tol = M_PI; // any pinch direction holds soft tissue
        tol.pos_tol += cfg.pinch_margin;
    }
    if (spec.n_fingers == 4) tol.pos_tol *= spec.effective_span() / spec.pad_len;
    // a pinch only happens where the jaws sweep, so the soft-object slack is
    // capped at the band half-width; this keeps the success set independent
    // of the closing angle
    if (soft_object) tol.pos_tol = std::min(tol.pos_tol, spec.effective_span() / 2.0);
    return tol;
}

nlohmann::json gripper_to_json(const GripperSpec& s) {
    return nlohmann::json{{"n_fingers", s.n_fingers},
                          {"material", material_name(s.material)},
                          {"pad_w_mm", s.pad_w},
                          {"pad_len_mm", s.pad_len},
                          {"pad_gap_mm", s.pad_gap},
                          {"max_open_mm", s.max_open},
                          {"min_close_mm", s.min_close},
                          {"soft_depth_mm", s.soft_depth},
                          {"soft_angle_rad", s.soft_angle}};
}

GripperSpec gripper_from_json(const nlohmann::json& j) {
    if (j.is_string()) return gripper_by_name(j.get<std::string>());
    GripperSpec s;
    s.n_fingers = j.value("n_fingers", 2);
    const std::string mat = j.value("material", "rigid");
    if (mat == "rigid") s.material = Material::Rigid;
    else if (mat == "soft") s.material = Material::Soft;
    else raise(ErrorCode::ConfigError, "unknown finger material: " + mat);
    s.pad_w = j.value("pad_w_mm", s.pad_w);
    s.pad_len = j.value("pad_len_mm", s.pad_len);
    s.pad_gap = j.value("pad_gap_mm", s.pad_gap);
    s.max_open = j.value("max_open_mm", s.max_open);
    s.min_close = j.value("min_close_mm", s.min_close);
    s.soft_depth = j.value("soft_depth_mm", s.material == Material::Soft ? s.soft_depth : 0.0);
    s.soft_angle = j.value("soft_angle_rad", s.material == Material::Soft ? s.soft_angle : 0.0);
    if (s.material == Material::Rigid) {
        s.soft_depth = 0.0;
        s.soft_angle = 0.0;
    }
    s.validate();
    return s;
}

GripperSpec gripper_by_name(const std::string& name) {
    GripperSpec s; // defaults model an RG6-class parallel gripper
    if (name == "precise_rigid" || name == "precise_soft") s.n_fingers = 2;
    else if (name == "power_rigid" || name == "power_soft") s.n_fingers = 4;
    else raise(ErrorCode::ConfigError, "unknown gripper preset: " + name);
    if (name == "precise_soft" || name == "power_soft") {
        s.material = Material::Soft;
    } else {
        s.material = Material::Rigid;
        s.soft_depth = 0.0;
        s.soft_angle = 0.0;
    }
    s.validate();
    return s;
}

} // namespace grasplab
