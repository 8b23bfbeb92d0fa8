#include <doctest.h>

#include <cmath>

#include "grasplab/error.hpp"
#include "grasplab/oracle.hpp"
#include "grasplab/rng.hpp"

using namespace grasplab;

namespace {

const Workspace kBin{0.0, 0.0, 400.0, 400.0};

Scene one_object_scene(const ObjectModel& m, double x, double y, double theta) {
    Scene s;
    s.workspace = kBin;
    s.objects.push_back({m, Pose2D::make(x, y, theta)});
    return s;
}

ObjectModel rigid_rect_40x20() {
    return {"rect", ShapeSpec::rect(40, 20), Material::Rigid, 50, 100, {0.6, 0.2, 0.2}};
}

} // namespace

TEST_CASE("closing across the short side of a rigid rectangle succeeds") {
    const Scene scene = one_object_scene(rigid_rect_40x20(), 200, 200, 0.0);
    const GripperSpec g = gripper_by_name("precise_rigid");

    // phi = pi/2 closes across the 20 mm width; width axis matches, so beta = 0
    const auto [ok, after] = execute_grasp(scene, g, GraspConfig{200, 200, M_PI / 2});
    CHECK(ok.kind == OutcomeKind::Success);
    CHECK(ok.object_id == "rect");
    CHECK(after.objects.empty());

    // phi = 0 closes across the 40 mm extent: 90 degrees off the width axis
    const auto [bad, unchanged] = execute_grasp(scene, g, GraspConfig{200, 200, 0.0});
    CHECK(bad.kind == OutcomeKind::Failure);
    CHECK(bad.reason == FailureReason::BadAlignment);
    CHECK(scene_hash(unchanged) == scene_hash(scene));
}

TEST_CASE("pad overlapping a tall rigid object triggers an emergency stop") {
    // object centered where a fully open pad lands: 80 mm from the grasp center
    const ObjectModel tall{"tall", ShapeSpec::circle(20), Material::Rigid, 60, 100, {0.2, 0.2, 0.6}};
    Scene scene = one_object_scene(tall, 280, 200, 0.0);
    // add a second object at the grasp center so closing would have a target
    scene.objects.push_back(
        {ObjectModel{"mid", ShapeSpec::circle(15), Material::Rigid, 40, 80, {0.6, 0.5, 0.1}},
         Pose2D::make(200, 200, 0.0)});
    const GripperSpec rigid = gripper_by_name("precise_rigid");

    const auto [stop, unchanged] = execute_grasp(scene, rigid, GraspConfig{200, 200, 0.0});
    CHECK(stop.kind == OutcomeKind::EmergencyStop);
    CHECK(scene_hash(unchanged) == scene_hash(scene));

    // soft fingers conform instead (within their depth) and the grasp proceeds
    const GripperSpec soft = gripper_by_name("precise_soft");
    const auto [go, after] = execute_grasp(scene, soft, GraspConfig{200, 200, 0.0});
    CHECK(go.kind != OutcomeKind::EmergencyStop);
}

TEST_CASE("soft toys pinch at any angle once the center is inside") {
    const ObjectModel toy{"toy", ShapeSpec::rect(60, 24), Material::Soft, 45, 90, {0.9, 0.4, 0.4}};
    for (const char* gname : {"precise_rigid", "precise_soft", "power_rigid", "power_soft"}) {
        const GripperSpec g = gripper_by_name(gname);
        for (int k = 0; k < 18; ++k) {
            const Scene scene = one_object_scene(toy, 200, 200, 0.7);
            const auto [ok, after] =
                execute_grasp(scene, g, GraspConfig{205, 198, (k + 0.5) * M_PI / 18});
            CHECK(ok.kind == OutcomeKind::Success);
        }
    }
}

TEST_CASE("empty background gives NoContact") {
    Scene scene;
    scene.workspace = kBin;
    scene.objects.push_back({rigid_rect_40x20(), Pose2D::make(100, 100, 0.0)});
    const auto [miss, unchanged] =
        execute_grasp(scene, gripper_by_name("precise_rigid"), GraspConfig{320, 320, 0.3});
    CHECK(miss.kind == OutcomeKind::Failure);
    CHECK(miss.reason == FailureReason::NoContact);
}

TEST_CASE("an object wider than the jaws is TooWide") {
    const ObjectModel wide{"wide", ShapeSpec::circle(85), Material::Rigid, 20, 500, {0.3, 0.3, 0.3}};
    const Scene scene = one_object_scene(wide, 200, 200, 0.0);
    const auto [out, unchanged] =
        execute_grasp(scene, gripper_by_name("precise_rigid"), GraspConfig{200, 200, 0.0});
    CHECK(out.kind == OutcomeKind::Failure);
    CHECK(out.reason == FailureReason::TooWide);
}

TEST_CASE("opposing jaws reaching different objects pinch neither") {
    Scene scene;
    scene.workspace = kBin;
    // two objects straddling the grasp center, each close to one jaw
    scene.objects.push_back(
        {ObjectModel{"a", ShapeSpec::circle(18), Material::Rigid, 20, 80, {0.7, 0.3, 0.1}},
         Pose2D::make(160, 200, 0.0)});
    scene.objects.push_back(
        {ObjectModel{"b", ShapeSpec::circle(18), Material::Rigid, 20, 80, {0.1, 0.3, 0.7}},
         Pose2D::make(240, 200, 0.0)});
    const auto [out, unchanged] =
        execute_grasp(scene, gripper_by_name("precise_rigid"), GraspConfig{200, 200, 0.0});
    CHECK(out.kind == OutcomeKind::Failure);
    CHECK(out.reason == FailureReason::MultiObjectPinch);
}

TEST_CASE("grasping far outside the footprint fails on purchase") {
    const ObjectModel disk{"d", ShapeSpec::circle(30), Material::Rigid, 50, 100, {0.2, 0.6, 0.2}};
    const Scene scene = one_object_scene(disk, 200, 200, 0.0);
    // center 40 mm away from the boundary along the closing axis still closes
    // on the disk, but the grasp center is 10 mm outside the footprint
    const auto [out, unchanged] =
        execute_grasp(scene, gripper_by_name("precise_rigid"), GraspConfig{240, 200, 0.0});
    CHECK(out.kind == OutcomeKind::Failure);
    CHECK(out.reason == FailureReason::InsufficientPurchase);
}

TEST_CASE("brute force map: empty scene is all false") {
    Scene scene;
    scene.workspace = kBin;
    const SuccessMap map = brute_force_success_map(scene, gripper_by_name("precise_rigid"), 5, 5, 18);
    for (const uint8_t c : map.cells) CHECK(c == 0);
}

TEST_CASE("brute force map: circle center succeeds in all 18 bins") {
    const ObjectModel disk{"d", ShapeSpec::circle(25), Material::Rigid, 50, 100, {0.2, 0.6, 0.2}};
    const Scene scene = one_object_scene(disk, 200, 200, 0.0);
    const SuccessMap map = brute_force_success_map(scene, gripper_by_name("precise_rigid"), 21, 21, 18);
    // cell (10, 10) center = (200, 200)
    for (int k = 0; k < 18; ++k) CHECK(map.at(10, 10, k));
}

TEST_CASE("brute force map: rectangle succeeds only near its width axis") {
    const Scene scene = one_object_scene(rigid_rect_40x20(), 200, 200, 0.0);
    const SuccessMap map = brute_force_success_map(scene, gripper_by_name("precise_rigid"), 21, 21, 18);
    // width axis at 90 degrees, ang_tol0 = 10 degrees: exactly bins 8 (85) and 9 (95);
    // cross-checked against a dense 1-degree sweep of execute_grasp
    for (int k = 0; k < 18; ++k) {
        const bool expected = (k == 8 || k == 9);
        CHECK(map.at(10, 10, k) == expected);
    }
    // dense 1-degree sweep; the +-10 degree endpoints sit exactly on the
    // tolerance boundary, so only the interior is pinned
    for (int deg = 0; deg < 180; ++deg) {
        const auto [out, after] = execute_grasp(scene, gripper_by_name("precise_rigid"),
                                                GraspConfig{200, 200, deg * M_PI / 180.0});
        if (deg > 80 && deg < 100) CHECK(out.success());
        if (deg < 80 || deg > 100) CHECK(!out.success());
    }
}

TEST_CASE("success map is deterministic and leaves the scene unchanged") {
    const Scene scene = one_object_scene(rigid_rect_40x20(), 180, 230, 0.4);
    const uint64_t before = scene_hash(scene);
    const SuccessMap a = brute_force_success_map(scene, gripper_by_name("power_soft"), 11, 11, 18);
    const SuccessMap b = brute_force_success_map(scene, gripper_by_name("power_soft"), 11, 11, 18);
    CHECK(a.cells == b.cells);
    CHECK(scene_hash(scene) == before);
}

TEST_CASE("taxonomy invariants on a small grid") {
    const ObjectModel rect = rigid_rect_40x20();
    const ObjectModel toy{"toy", ShapeSpec::ellipse(30, 18), Material::Soft, 45, 90, {0.9, 0.4, 0.4}};
    for (const ObjectModel& m : {rect, toy}) {
        const Scene scene = one_object_scene(m, 210, 190, 0.9);
        const SuccessMap rigid2 = brute_force_success_map(scene, gripper_by_name("precise_rigid"), 11, 11, 18);
        const SuccessMap soft2 = brute_force_success_map(scene, gripper_by_name("precise_soft"), 11, 11, 18);
        for (size_t i = 0; i < rigid2.cells.size(); ++i)
            if (rigid2.cells[i]) CHECK(soft2.cells[i]); // soft-finger region contains rigid

        if (m.material == Material::Soft) {
            // phi-invariance for soft objects
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    bool any = false, all = true;
                    for (int k = 0; k < 18; ++k) {
                        any |= soft2.at(i, j, k);
                        all &= soft2.at(i, j, k);
                    }
                    CHECK(any == all);
                }
        }
    }

    // 4-finger positional inclusion on circles
    const ObjectModel disk{"d", ShapeSpec::circle(28), Material::Rigid, 50, 100, {0.2, 0.6, 0.2}};
    const Scene scene = one_object_scene(disk, 200, 200, 0.0);
    const SuccessMap two = brute_force_success_map(scene, gripper_by_name("precise_soft"), 15, 15, 18);
    const SuccessMap four = brute_force_success_map(scene, gripper_by_name("power_soft"), 15, 15, 18);
    for (size_t i = 0; i < two.cells.size(); ++i)
        if (two.cells[i]) CHECK(four.cells[i]);
}

TEST_CASE("emergency stops only occur for rigid-rigid pairings") {
    Rng rng(23);
    auto members = level1_8().members;
    const auto toys = soft_toys_25().members;
    members.insert(members.end(), toys.begin(), toys.begin() + 4);
    for (int trial = 0; trial < 120; ++trial) {
        const Scene scene = place_randomly(members, kBin, 5, derive_seed(1000, trial), 0.15);
        const char* gname = (trial % 2) ? "precise_rigid" : "power_soft";
        const GripperSpec g = gripper_by_name(gname);
        const GraspConfig u{rng.uniform(0, 400), rng.uniform(0, 400),
                            rng.uniform(0.0, M_PI * 0.9999)};
        const auto [out, after] = execute_grasp(scene, g, u);
        if (out.kind == OutcomeKind::EmergencyStop) CHECK(g.material == Material::Rigid);
        if (out.kind == OutcomeKind::Success)
            CHECK(after.objects.size() == scene.objects.size() - 1);
        else
            CHECK(scene_hash(after) == scene_hash(scene));
    }
}

TEST_CASE("phi outside [0, pi) is rejected") {
    const Scene scene = one_object_scene(rigid_rect_40x20(), 200, 200, 0.0);
    CHECK_THROWS_AS(
        execute_grasp(scene, gripper_by_name("precise_rigid"), GraspConfig{200, 200, M_PI}),
        Error);
    CHECK_THROWS_AS(
        execute_grasp(scene, gripper_by_name("precise_rigid"), GraspConfig{200, 200, -0.1}),
        Error);
}

TEST_CASE("label flip noise stays deterministic") {
    const Scene scene = one_object_scene(rigid_rect_40x20(), 200, 200, 0.0);
    OracleConfig cfg;
    cfg.label_flip_rate = 0.5;
    cfg.label_flip_seed = 9;
    const auto [a, sa] = execute_grasp(scene, gripper_by_name("precise_rigid"),
                                       GraspConfig{200, 200, M_PI / 2}, cfg);
    const auto [b, sb] = execute_grasp(scene, gripper_by_name("precise_rigid"),
                                       GraspConfig{200, 200, M_PI / 2}, cfg);
    CHECK(outcome_name(a) == outcome_name(b));
}
