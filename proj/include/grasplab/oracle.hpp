#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "grasplab/gripper.hpp"
#include "grasplab/scene.hpp"

namespace grasplab {

enum class OutcomeKind { Success, Failure, EmergencyStop };

enum class FailureReason { NoContact, TooWide, BadAlignment, MultiObjectPinch, InsufficientPurchase };

struct GraspOutcome {
    OutcomeKind kind = OutcomeKind::Failure;
    FailureReason reason = FailureReason::NoContact; // valid when kind == Failure
    std::string object_id;                           // valid when kind == Success

    bool success() const { return kind == OutcomeKind::Success; }
    bool operator==(const GraspOutcome&) const = default;
    static GraspOutcome ok(std::string id) { return {OutcomeKind::Success, FailureReason::NoContact, std::move(id)}; }
    static GraspOutcome fail(FailureReason r) { return {OutcomeKind::Failure, r, {}}; }
    static GraspOutcome estop() { return {OutcomeKind::EmergencyStop, FailureReason::NoContact, {}}; }
};

const char* outcome_name(const GraspOutcome& o);
GraspOutcome outcome_from_name(const std::string& name);

struct OracleConfig {
    ContactConfig contact;
    // optional Bernoulli label flip for robustness studies; 0 keeps the
    // oracle exactly deterministic
    double label_flip_rate = 0.0;
    uint64_t label_flip_seed = 0;
};

struct AttemptLog {
    GraspConfig u;
    GripperSpec gripper;
    GraspOutcome outcome;
    std::optional<InteractionClass> interaction; // vs the contacted object, when any
    uint64_t scene_before_hash = 0;
    uint64_t seed = 0;

    nlohmann::json to_json() const;
};

// Executes one grasp attempt. Deterministic; the returned scene equals the
// input except that a successful grasp removes its target object.
//
// Procedure: (1) descend with pads at max_open -- a pad overlapping an object
// footprint taller than descent_clearance aborts with EmergencyStop when the
// interaction is Rigid-Rigid, is absorbed by conformation when the soft party
// allows it (soft objects squash freely; soft pads up to soft_depth), and
// otherwise retracts as Failure(NoContact); (2) close along phi -- the jaws
// sweep a band as wide as the pad span, and the target is the object they
// reach first from both sides; its width in the band must fit
// [min_close, max_open]; (3) check alignment of the closing axis against the
// target's local width axis and the grasp-center distance to the footprint
// against the tolerance budget.
std::pair<GraspOutcome, Scene> execute_grasp(const Scene& scene, const GripperSpec& gripper,
                                             const GraspConfig& u, const OracleConfig& cfg = {});

struct SuccessMap {
    int nx = 0, ny = 0, n_bins = 0;
    std::vector<uint8_t> cells; // (i * ny + j) * n_bins + k

    bool at(int i, int j, int k) const { return cells[(static_cast<size_t>(i) * ny + j) * n_bins + k] != 0; }
};

// Exhaustive success labels over a grid of grasp centers x angular bins.
// Cell (i, j, k) executes a grasp at the (i, j) cell center with
// phi = (k + 0.5) * pi / n_bins. Pure; cells may evaluate in parallel.
SuccessMap brute_force_success_map(const Scene& scene, const GripperSpec& gripper, int nx, int ny,
                                   int n_bins, const OracleConfig& cfg = {});

// Angular distance between two closing-axis angles on the pi-periodic circle.
double closing_angle_distance(double a, double b);

// Local width axis of a footprint within the grasp band: the sweep direction
// minimizing extent_along (1 degree steps; near-ties within width_tie_eps all
// count, and circles are direction-invariant so beta is 0 by symmetry).
// Returns the angular distance from phi to that axis.
double width_axis_misalignment(const PlacedShape& fp, double phi, Vec2 grasp_center,
                               double band_half_width, const ContactConfig& cfg);

} // namespace grasplab
