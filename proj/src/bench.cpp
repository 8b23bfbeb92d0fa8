#include "grasplab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "grasplab/error.hpp"
#include "grasplab/rng.hpp"
#include "grasplab/util.hpp"

namespace grasplab {

double compute_mpph(double success_rate, double t_c, double t_e) {
    const double denom = t_c + t_e;
    if (!(denom > 0.0)) raise(ErrorCode::NonPositiveTime, "t_c + t_e must be > 0");
    return 3600.0 * success_rate / denom;
}

const char* EvalPolicy::name() const {
    switch (kind) {
        case EvalPolicyKind::Random: return "random";
        case EvalPolicyKind::Heuristic: return "heuristic";
        case EvalPolicyKind::LearnedSampled: return "learned_sampled";
        case EvalPolicyKind::LearnedDense: return "learned_dense";
        case EvalPolicyKind::OracleCheat: return "oracle_cheat";
    }
    return "?";
}

nlohmann::json ExperimentSpec::to_json() const {
    return nlohmann::json{
        {"name", name},
        {"recipe", recipe},
        {"test_gripper", gripper_to_json(test_gripper)},
        {"test_object_set", test_object_set},
        {"attempts_per_object", attempts_per_object},
        {"trials", trials},
        {"attempt_budget", attempt_budget},
        {"clutter_size", clutter_size},
        {"seeds", seeds},
        {"t_e", t_e},
        {"overlap_frac", overlap_frac},
        {"workspace", {workspace.x_min, workspace.y_min, workspace.x_max, workspace.y_max}}};
}

const ReportRow* BenchReport::aggregate(const std::string& row_name) const {
    for (const ReportRow& r : aggregates)
        if (r.name == row_name) return &r;
    return nullptr;
}

nlohmann::json BenchReport::to_json() const {
    auto row_json = [](const ReportRow& r) {
        return nlohmann::json{{"name", r.name},
                              {"attempts", r.attempts},
                              {"successes", r.successes},
                              {"success_rate", r.success_rate},
                              {"t_c", r.t_c},
                              {"t_e", r.t_e},
                              {"mpph", r.mpph}};
    };
    nlohmann::json per = nlohmann::json::array();
    for (const ReportRow& r : per_object) per.push_back(row_json(r));
    nlohmann::json agg = nlohmann::json::array();
    for (const ReportRow& r : aggregates) agg.push_back(row_json(r));
    return nlohmann::json{{"name", name},
                          {"policy", policy},
                          {"rows", std::move(per)},
                          {"aggregates", std::move(agg)},
                          {"metrics",
                           {{"attempts", metrics.attempts},
                            {"successes", metrics.successes},
                            {"failures", metrics.failures},
                            {"success_rate", metrics.success_rate},
                            {"t_c", metrics.t_c},
                            {"t_e", metrics.t_e},
                            {"mpph", metrics.mpph}}},
                          {"config_hash", config_hash},
                          {"model_hash", model_hash},
                          {"timestamp", timestamp}};
}

uint64_t model_hash(const ModelParams& params) {
    uint64_t h = fnv1a64(netspec_to_json(params.net).dump());
    for (size_t i = 0; i < params.weights.size(); ++i) {
        h ^= fnv1a64(params.weights[i].data(), params.weights[i].size() * sizeof(float));
        h ^= fnv1a64(params.biases[i].data(), params.biases[i].size() * sizeof(float)) * 0x9e3779b9ull;
    }
    return h;
}

namespace {

std::string now_timestamp() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

GraspConfig clamp_to_workspace(GraspConfig u, const Workspace& ws) {
    u.x = std::clamp(u.x, ws.x_min, ws.x_max);
    u.y = std::clamp(u.y, ws.y_min, ws.y_max);
    return u;
}

// Oracle-backed upper-bound policy: propose the first candidate grasp that
// the outcome oracle itself verifies as a success. Candidates: every bin at
// each object centroid, then local grids around each centroid.
GraspProposal cheat_policy(const Scene& scene, const ExperimentSpec& spec) {
    GraspProposal fallback;
    fallback.source = ProposalSource::Random;
    fallback.score = 1.0;
    if (scene.objects.empty()) {
        fallback.u = {scene.workspace.x_min, scene.workspace.y_min, bin_to_angle(0)};
        return fallback;
    }

    auto try_u = [&](Vec2 c, int bin) -> bool {
        if (!scene.workspace.contains(c)) return false;
        const GraspConfig u{c.x, c.y, bin_to_angle(bin)};
        const auto [outcome, after] = execute_grasp(scene, spec.test_gripper, u, spec.oracle);
        return outcome.success();
    };

    for (const auto& obj : scene.objects) {
        const Vec2 c = place_shape(obj.model.shape, obj.pose).centroid();
        for (int bin = 0; bin < 18; ++bin) {
            if (try_u(c, bin)) {
                GraspProposal p;
                p.source = ProposalSource::Random;
                p.u = {c.x, c.y, bin_to_angle(bin)};
                p.bin = bin;
                p.score = 1.0;
                return p;
            }
        }
    }
    // local grids around the centroids
    for (const auto& obj : scene.objects) {
        const Vec2 c = place_shape(obj.model.shape, obj.pose).centroid();
        for (int dy = -3; dy <= 3; ++dy) {
            for (int dx = -3; dx <= 3; ++dx) {
                const Vec2 cand = c + Vec2{dx * 8.0, dy * 8.0};
                for (int bin = 0; bin < 18; ++bin) {
                    if (try_u(cand, bin)) {
                        GraspProposal p;
                        p.u = {cand.x, cand.y, bin_to_angle(bin)};
                        p.bin = bin;
                        p.score = 1.0;
                        return p;
                    }
                }
            }
        }
    }
    const Vec2 c = place_shape(scene.objects[0].model.shape, scene.objects[0].pose).centroid();
    fallback.u = {c.x, c.y, bin_to_angle(0)};
    return fallback;
}

struct AttemptResult {
    bool success = false;
    double t_c = 0.0;
};

AttemptResult run_attempt(Scene& scene, const ExperimentSpec& spec, const EvalPolicy& policy,
                          uint64_t attempt_seed) {
    const ImageGrid image = render(scene, spec.camera);
    GraspProposal prop;
    const auto t0 = std::chrono::steady_clock::now();
    switch (policy.kind) {
        case EvalPolicyKind::Random: {
            Rng rng(derive_seed(attempt_seed, 0x6a2d0));
            prop = random_policy(spec.workspace, rng);
            break;
        }
        case EvalPolicyKind::Heuristic:
            prop = heuristic_policy(image, spec.camera);
            break;
        case EvalPolicyKind::LearnedSampled: {
            Rng rng(derive_seed(attempt_seed, 0x5a3b1));
            prop = sampled_policy(*policy.model, image, spec.camera, policy.sample, rng);
            break;
        }
        case EvalPolicyKind::LearnedDense:
            prop = dense_policy(*policy.model, image, spec.camera);
            break;
        case EvalPolicyKind::OracleCheat:
            prop = cheat_policy(scene, spec);
            break;
    }
    const auto t1 = std::chrono::steady_clock::now();

    const GraspConfig u = clamp_to_workspace(prop.u, spec.workspace);
    const auto [outcome, after] = execute_grasp(scene, spec.test_gripper, u, spec.oracle);
    AttemptResult result;
    result.success = outcome.success();
    result.t_c = std::chrono::duration<double>(t1 - t0).count();
    if (result.success) scene = after;
    return result;
}

std::string group_of(const std::string& object_id) {
    const size_t pos = object_id.find('_');
    return pos == std::string::npos ? object_id : object_id.substr(0, pos);
}

ReportRow make_row(std::string name, size_t attempts, size_t successes, double t_c_sum,
                   double t_e) {
    ReportRow row;
    row.name = std::move(name);
    row.attempts = attempts;
    row.successes = successes;
    row.success_rate = attempts ? static_cast<double>(successes) / attempts : 0.0;
    row.t_c = attempts ? t_c_sum / attempts : 0.0;
    row.t_e = t_e;
    row.mpph = compute_mpph(row.success_rate, row.t_c, t_e);
    return row;
}

Metrics metrics_from_row(const ReportRow& row) {
    Metrics m;
    m.attempts = row.attempts;
    m.successes = row.successes;
    m.failures = row.attempts - row.successes;
    m.success_rate = row.success_rate;
    m.t_c = row.t_c;
    m.t_e = row.t_e;
    m.mpph = row.mpph;
    return m;
}

} // namespace

BenchReport run_single_object_eval(const ExperimentSpec& spec, const EvalPolicy& policy) {
    if (spec.seeds.empty()) raise(ErrorCode::ConfigError, "experiment needs at least one seed");
    if (spec.attempts_per_object < 1)
        raise(ErrorCode::ConfigError, "attempts_per_object must be >= 1");
    if ((policy.kind == EvalPolicyKind::LearnedDense ||
         policy.kind == EvalPolicyKind::LearnedSampled) &&
        !policy.model)
        raise(ErrorCode::ModelLoadError, "learned policy evaluated without a model");

    const ObjectSetPreset set = object_set_by_name(spec.test_object_set);
    const uint64_t base = spec.seeds[0];

    BenchReport report;
    report.name = spec.name;
    report.policy = policy.name();
    report.config_hash = hash_hex(fnv1a64(spec.to_json().dump()));
    report.model_hash = policy.model ? hash_hex(model_hash(*policy.model)) : "";
    report.timestamp = now_timestamp();

    struct Tally {
        size_t attempts = 0, successes = 0;
        double t_c_sum = 0.0;
    };
    std::vector<Tally> tallies(set.members.size());

    for (size_t oi = 0; oi < set.members.size(); ++oi) {
        for (int a = 0; a < spec.attempts_per_object; ++a) {
            const uint64_t cell_seed = derive_seed(derive_seed(base, oi), a);
            Scene scene =
                place_randomly({set.members[oi]}, spec.workspace, 1, cell_seed, 0.0);
            const AttemptResult r = run_attempt(scene, spec, policy, cell_seed);
            tallies[oi].attempts += 1;
            tallies[oi].successes += r.success ? 1 : 0;
            tallies[oi].t_c_sum += r.t_c;
        }
    }

    struct GroupTally {
        std::string name;
        Tally tally;
    };
    std::vector<GroupTally> groups;
    Tally all;
    for (size_t oi = 0; oi < set.members.size(); ++oi) {
        report.per_object.push_back(make_row(set.members[oi].id, tallies[oi].attempts,
                                             tallies[oi].successes, tallies[oi].t_c_sum, spec.t_e));
        const std::string g = group_of(set.members[oi].id);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const GroupTally& gt) { return gt.name == g; });
        if (it == groups.end()) {
            groups.push_back({g, {}});
            it = groups.end() - 1;
        }
        it->tally.attempts += tallies[oi].attempts;
        it->tally.successes += tallies[oi].successes;
        it->tally.t_c_sum += tallies[oi].t_c_sum;
        all.attempts += tallies[oi].attempts;
        all.successes += tallies[oi].successes;
        all.t_c_sum += tallies[oi].t_c_sum;
    }
    if (groups.size() > 1) {
        for (const GroupTally& g : groups)
            report.aggregates.push_back(
                make_row(g.name, g.tally.attempts, g.tally.successes, g.tally.t_c_sum, spec.t_e));
    }
    report.aggregates.push_back(make_row("all", all.attempts, all.successes, all.t_c_sum, spec.t_e));
    report.metrics = metrics_from_row(report.aggregates.back());
    return report;
}

BenchReport run_clutter_removal(const ExperimentSpec& spec, const EvalPolicy& policy) {
    if (spec.seeds.empty()) raise(ErrorCode::ConfigError, "experiment needs at least one seed");
    if (spec.clutter_size > spec.attempt_budget)
        raise(ErrorCode::ConfigError, "clutter size exceeds the attempt budget");

    const ObjectSetPreset l1 = level1_8();
    const ObjectSetPreset l2 = level2_8();
    const uint64_t base = spec.seeds[0];

    BenchReport report;
    report.name = spec.name;
    report.policy = policy.name();
    report.config_hash = hash_hex(fnv1a64(spec.to_json().dump()));
    report.model_hash = policy.model ? hash_hex(model_hash(*policy.model)) : "";
    report.timestamp = now_timestamp();

    size_t attempts = 0, successes = 0;
    double t_c_sum = 0.0;
    for (int trial = 0; trial < spec.trials; ++trial) {
        const uint64_t trial_seed = derive_seed(base, 0x7c1 + trial);

        // half the clutter from each level, chosen per trial
        Rng pick(derive_seed(trial_seed, 0x91c));
        std::vector<ObjectModel> members;
        const int n_l1 = spec.clutter_size / 2;
        const int n_l2 = spec.clutter_size - n_l1;
        std::vector<size_t> idx1(l1.members.size()), idx2(l2.members.size());
        std::iota(idx1.begin(), idx1.end(), size_t{0});
        std::iota(idx2.begin(), idx2.end(), size_t{0});
        for (size_t k = idx1.size(); k > 1; --k) std::swap(idx1[k - 1], idx1[pick.uniform_int(k)]);
        for (size_t k = idx2.size(); k > 1; --k) std::swap(idx2[k - 1], idx2[pick.uniform_int(k)]);
        for (int k = 0; k < n_l1; ++k) members.push_back(l1.members[idx1[k]]);
        for (int k = 0; k < n_l2; ++k) members.push_back(l2.members[idx2[k]]);

        // dense clutter can defeat a particular placement seed; retry derived seeds
        Scene scene;
        bool placed = false;
        for (int retry = 0; retry < 32 && !placed; ++retry) {
            try {
                scene = place_randomly(members, spec.workspace, members.size(),
                                       derive_seed(trial_seed, retry), spec.overlap_frac);
                placed = true;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::PlacementExhausted) throw;
            }
        }
        if (!placed) raise(ErrorCode::PlacementExhausted, "clutter placement failed for a trial");

        size_t trial_attempts = 0, trial_successes = 0;
        double trial_t_c = 0.0;
        while (!scene.objects.empty() && trial_attempts < static_cast<size_t>(spec.attempt_budget)) {
            const uint64_t attempt_seed = derive_seed(trial_seed, 0xa77 + trial_attempts);
            const AttemptResult r = run_attempt(scene, spec, policy, attempt_seed);
            trial_attempts += 1;
            trial_successes += r.success ? 1 : 0;
            trial_t_c += r.t_c;
        }
        report.per_object.push_back(make_row("trial_" + std::to_string(trial + 1), trial_attempts,
                                             trial_successes, trial_t_c, spec.t_e));
        attempts += trial_attempts;
        successes += trial_successes;
        t_c_sum += trial_t_c;
    }

    report.aggregates.push_back(make_row("all", attempts, successes, t_c_sum, spec.t_e));
    report.metrics = metrics_from_row(report.aggregates.back());
    return report;
}

std::vector<AblationPoint> run_ablation(const Dataset& mixed, const NetSpec& net,
                                        const TrainConfig& base_train, const ExperimentSpec& eval,
                                        const std::vector<size_t>& sizes,
                                        const std::vector<uint64_t>& seeds) {
    if (sizes.empty() || seeds.empty())
        raise(ErrorCode::ConfigError, "ablation needs sizes and seeds");
    if (!std::is_sorted(sizes.begin(), sizes.end()))
        raise(ErrorCode::ConfigError, "ablation sizes must ascend");
    if (sizes.back() > mixed.records.size())
        raise(ErrorCode::InsufficientSource, "largest ablation size exceeds the dataset");

    std::vector<AblationPoint> curve;
    for (const size_t size : sizes) {
        AblationPoint point;
        point.size = size;
        for (const uint64_t seed : seeds) {
            TrainConfig tc = base_train;
            tc.seed = seed;
            const ModelParams start = init_params(net, derive_seed(seed, 0x1417));
            const std::vector<LabeledPatch> data = as_labeled(mixed, size);
            const TrainResult trained = train(start, data, tc);

            ExperimentSpec spec = eval;
            spec.seeds = {derive_seed(seed, 0xe7a1)};
            const EvalPolicy policy = EvalPolicy::dense(trained.params);
            const BenchReport report = run_single_object_eval(spec, policy);
            point.per_seed.push_back(report.metrics.success_rate);
        }
        const double mean = std::accumulate(point.per_seed.begin(), point.per_seed.end(), 0.0) /
                            point.per_seed.size();
        double var = 0.0;
        for (const double v : point.per_seed) var += (v - mean) * (v - mean);
        point.mean_success_rate = mean;
        point.sd_success_rate = point.per_seed.size() > 1
                                    ? std::sqrt(var / (point.per_seed.size() - 1))
                                    : 0.0;
        curve.push_back(std::move(point));
    }
    return curve;
}

void emit_report(const BenchReport& report, const ExperimentSpec& spec, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(ErrorCode::IoError, "cannot create report dir: " + dir);

    std::ofstream rj(dir + "/report.json");
    if (!rj) raise(ErrorCode::IoError, "cannot write report.json");
    rj << report.to_json().dump(2) << '\n';

    std::ofstream csv(dir + "/summary.csv");
    if (!csv) raise(ErrorCode::IoError, "cannot write summary.csv");
    csv << "name,attempts,successes,success_rate,t_c,t_e,mpph\n";
    auto emit_row = [&](const ReportRow& r) {
        csv << r.name << ',' << r.attempts << ',' << r.successes << ',' << r.success_rate << ','
            << r.t_c << ',' << r.t_e << ',' << r.mpph << '\n';
    };
    for (const ReportRow& r : report.per_object) emit_row(r);
    for (const ReportRow& r : report.aggregates) emit_row(r);

    nlohmann::json config{{"spec", spec.to_json()},
                          {"config_hash", report.config_hash},
                          {"model_hash", report.model_hash}};
    std::ofstream cj(dir + "/config.json");
    if (!cj) raise(ErrorCode::IoError, "cannot write config.json");
    cj << config.dump(2) << '\n';
}

// -- presets ---------------------------------------------------------------------

TestPreset test_preset(const std::string& id) {
    TestPreset p;
    p.id = id;
    if (id == "t1") {
        p.recipe = {{"2Finger-RigidSoft-5K", 1.0}};
        p.test_gripper = "power_soft";
    } else if (id == "t2") {
        p.recipe = {{"4Finger-SoftRigid-5K", 1.0}};
        p.test_gripper = "power_soft";
    } else if (id == "t3") {
        p.recipe = {{"2Finger-RigidSoft-5K", 0.5}, {"4Finger-SoftRigid-5K", 0.5}};
        p.test_gripper = "power_soft";
    } else if (id == "t4") {
        p.recipe = {{"2Finger-RigidSoft-5K", 0.5}, {"4Finger-SoftRigid-2.5K-Guided", 0.5}};
        p.test_gripper = "power_soft";
    } else if (id == "t5") {
        p.recipe = {{"2Finger-RigidSoft-5K", 0.5}, {"2Finger-SoftRigid-2.5K-Guided", 0.5}};
        p.test_gripper = "power_soft";
    } else if (id == "t6") {
        p.recipe = {{"2Finger-RigidSoft-5K", 0.5}, {"4Finger-SoftRigid-2.5K-Guided", 0.5}};
        p.test_gripper = "precise_soft";
    } else if (id == "t7") {
        p.recipe = {{"2Finger-RigidSoft-5K", 0.5}, {"2Finger-SoftRigid-2.5K-Guided", 0.5}};
        p.test_gripper = "precise_soft";
    } else {
        raise(ErrorCode::ConfigError, "unknown test preset: " + id + " (expected t1..t7)");
    }
    return p;
}

CollectConfig collection_preset(const std::string& tag, uint64_t seed,
                                const std::string& guided_model_path) {
    CollectConfig cfg;
    cfg.seed = seed;
    cfg.tag = tag;
    if (tag == "2Finger-RigidSoft-5K") {
        cfg.gripper = gripper_by_name("precise_rigid");
        cfg.object_set = "SoftToys25";
        cfg.n_attempts = 5000;
    } else if (tag == "4Finger-SoftRigid-5K") {
        cfg.gripper = gripper_by_name("power_soft");
        cfg.object_set = "Levels-16";
        cfg.n_attempts = 5000;
    } else if (tag == "2Finger-RigidRigid-0.5K") {
        cfg.gripper = gripper_by_name("precise_rigid");
        cfg.object_set = "Levels-16";
        cfg.n_attempts = 500;
    } else if (tag == "4Finger-SoftRigid-2.5K-Guided" || tag == "2Finger-SoftRigid-2.5K-Guided") {
        cfg.gripper = gripper_by_name(tag[0] == '4' ? "power_soft" : "precise_soft");
        cfg.object_set = "Levels-16";
        cfg.n_attempts = 2500;
        cfg.policy.kind = CollectPolicy::Kind::Guided;
        cfg.policy.model_path = guided_model_path;
        cfg.policy.epsilon = 0.2;
    } else {
        raise(ErrorCode::ConfigError, "unknown collection preset: " + tag);
    }
    return cfg;
}

} // namespace grasplab
