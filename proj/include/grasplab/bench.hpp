#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "grasplab/collect.hpp"
#include "grasplab/learn.hpp"
#include "grasplab/oracle.hpp"
#include "grasplab/policy.hpp"

namespace grasplab {

struct Metrics {
    size_t attempts = 0;
    size_t successes = 0;
    size_t failures = 0; // includes emergency stops
    double success_rate = 0.0;
    double t_c = 0.0;  // mean grasp computation time, measured seconds
    double t_e = 10.4; // configured execution time per attempt, seconds
    double mpph = 0.0;
};

// 3600 * success_rate / (t_c + t_e); throws NonPositiveTime for t_c + t_e <= 0
double compute_mpph(double success_rate, double t_c, double t_e);

enum class EvalPolicyKind { Random, Heuristic, LearnedSampled, LearnedDense, OracleCheat };

// A grasp-selection strategy under evaluation. OracleCheat verifies candidate
// grasps against the outcome oracle itself and is the upper-bound sanity policy.
struct EvalPolicy {
    EvalPolicyKind kind = EvalPolicyKind::Random;
    const ModelParams* model = nullptr; // learned kinds
    SampleConfig sample;                // LearnedSampled

    static EvalPolicy random() { return {EvalPolicyKind::Random, nullptr, {}}; }
    static EvalPolicy heuristic() { return {EvalPolicyKind::Heuristic, nullptr, {}}; }
    static EvalPolicy dense(const ModelParams& m) { return {EvalPolicyKind::LearnedDense, &m, {}}; }
    static EvalPolicy sampled(const ModelParams& m, const SampleConfig& s) {
        return {EvalPolicyKind::LearnedSampled, &m, s};
    }
    static EvalPolicy cheat() { return {EvalPolicyKind::OracleCheat, nullptr, {}}; }

    const char* name() const;
};

struct ExperimentSpec {
    std::string name = "experiment";
    std::string recipe; // training-data provenance tag, informational
    GripperSpec test_gripper;
    std::string test_object_set = "Level1-8";
    int attempts_per_object = 10;
    int trials = 5;         // clutter removal
    int attempt_budget = 20; // clutter removal
    int clutter_size = 10;   // 5 Level-1 + 5 Level-2 members
    std::vector<uint64_t> seeds{1};
    double t_e = 10.4;
    double overlap_frac = 0.15; // clutter placement
    Workspace workspace{0.0, 0.0, 400.0, 400.0};
    CameraModel camera = desk_camera();
    OracleConfig oracle;

    nlohmann::json to_json() const;
};

struct ReportRow {
    std::string name;
    size_t attempts = 0;
    size_t successes = 0;
    double success_rate = 0.0;
    double t_c = 0.0;
    double t_e = 0.0;
    double mpph = 0.0;
};

struct BenchReport {
    std::string name;
    std::string policy;
    std::vector<ReportRow> per_object; // or per trial for the clutter task
    std::vector<ReportRow> aggregates; // per group plus "all"
    Metrics metrics;
    std::string config_hash;
    std::string model_hash;
    std::string timestamp;

    const ReportRow* aggregate(const std::string& name) const;
    nlohmann::json to_json() const;
};

// Robustness protocol: every object of the test set alone in the bin,
// `attempts_per_object` seeded scenes each; aggregates averaged per group
// (id prefix) and over all objects. seeds[0] drives scene generation.
BenchReport run_single_object_eval(const ExperimentSpec& spec, const EvalPolicy& policy);

// Full task: `trials` clutters of clutter_size objects (half Level-1, half
// Level-2), cleared until empty or the attempt budget runs out.
BenchReport run_clutter_removal(const ExperimentSpec& spec, const EvalPolicy& policy);

struct AblationPoint {
    size_t size = 0;
    double mean_success_rate = 0.0;
    double sd_success_rate = 0.0;
    std::vector<double> per_seed;
};

// Trains one model per (size, seed) on prefixes of `mixed` and evaluates the
// dense policy with run_single_object_eval.
std::vector<AblationPoint> run_ablation(const Dataset& mixed, const NetSpec& net,
                                        const TrainConfig& base_train, const ExperimentSpec& eval,
                                        const std::vector<size_t>& sizes,
                                        const std::vector<uint64_t>& seeds);

// report.json + summary.csv + config.json
void emit_report(const BenchReport& report, const ExperimentSpec& spec, const std::string& dir);

uint64_t model_hash(const ModelParams& params);

// -- experiment presets -------------------------------------------------------

struct RecipeComponent {
    std::string dataset_tag;
    double proportion = 1.0;
};

struct TestPreset {
    std::string id;             // t1 .. t7
    std::vector<RecipeComponent> recipe;
    std::string test_gripper;   // gripper preset name
    size_t total = 5000;
};

TestPreset test_preset(const std::string& id);

// Data-collection presets named like the collection configurations of the
// benchmark: 2Finger-RigidSoft-5K, 4Finger-SoftRigid-5K,
// 4Finger-SoftRigid-2.5K-Guided, 2Finger-SoftRigid-2.5K-Guided,
// 2Finger-RigidRigid-0.5K.
CollectConfig collection_preset(const std::string& tag, uint64_t seed,
                                const std::string& guided_model_path = "");

} // namespace grasplab
