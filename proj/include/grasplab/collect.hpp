#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "grasplab/learn.hpp"
#include "grasplab/oracle.hpp"
#include "grasplab/policy.hpp"
#include "grasplab/render.hpp"

namespace grasplab {

struct GraspRecord {
    ImageGrid patch; // net-input-size crop around the grasp center
    int bin = 0;
    int reward = 0; // 1 iff outcome is Success
    GraspOutcome outcome;
    std::string gripper_tag;
    std::string object_set_tag;
    std::string policy_tag;
    uint64_t scene_seed = 0;

    bool operator==(const GraspRecord&) const = default;
};

struct DatasetManifest {
    size_t total = 0;      // training records (success + failure)
    size_t success = 0;
    size_t failure = 0;
    size_t estop = 0;      // logged but excluded from training records
    int patch_size = 32;
    std::string tag;
    std::string config_hash;
    uint64_t creation_seed = 0;
    nlohmann::json provenance; // per-source counts for mixed datasets
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<GraspRecord> records;
    std::vector<AttemptLog> attempts; // every attempt incl. emergency stops
};

enum class ResetRule { FreshEachAttempt, PersistUntilCleared };

struct CollectPolicy {
    enum class Kind { Random, Guided };
    Kind kind = Kind::Random;
    std::string model_path; // Guided, unless a model is passed in directly
    double epsilon = 0.2;   // Guided exploration rate
};

struct CollectConfig {
    std::string object_set = "SoftToys25";
    GripperSpec gripper;
    CollectPolicy policy;
    int n_attempts = 1000;
    int objects_per_scene = 5;
    ResetRule reset = ResetRule::FreshEachAttempt;
    double overlap_frac = 0.15;
    uint64_t seed = 1;
    int crop_px = 64;
    int net_input = 32; // stored patch side; must match the training net
    std::string tag;
    Workspace workspace{0.0, 0.0, 400.0, 400.0};
    CameraModel camera = desk_camera();
    OracleConfig oracle;

    nlohmann::json to_json() const;
    static CollectConfig from_json(const nlohmann::json& j);
};

// Self-supervised collection: per attempt, (re)build a scene, render, propose
// a grasp (random, or epsilon-greedy over the guided model's dense argmax),
// execute, and store the labeled patch. Deterministic per seed.
// `guided_model` overrides loading policy.model_path from disk.
Dataset collect(const CollectConfig& cfg, const ModelParams* guided_model = nullptr);

// One shard of the attempt range [begin, end). Every attempt derives its own
// RNG streams from (seed, attempt index), so concatenating shards of a
// partition reproduces the full run record-for-record. Requires the fresh
// scene-reset rule.
Dataset collect_range(const CollectConfig& cfg, int begin, int end,
                      const ModelParams* guided_model = nullptr);

// Largest-remainder sampling of round(p_i * total) records per source,
// without replacement, then a seeded shuffle.
Dataset mix(const std::vector<const Dataset*>& sources, const std::vector<double>& proportions,
            size_t total, uint64_t seed);

void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

std::vector<LabeledPatch> as_labeled(const Dataset& ds);
std::vector<LabeledPatch> as_labeled(const Dataset& ds, size_t prefix);

} // namespace grasplab
