#include "grasplab/collect.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "grasplab/error.hpp"
#include "grasplab/rng.hpp"
#include "grasplab/util.hpp"

namespace grasplab {

namespace {

// independent sub-streams so that epsilon = 1 reproduces a pure random run
constexpr uint64_t kSceneStream = 0x5ce2e;
constexpr uint64_t kGateStream = 0x6a7e;
constexpr uint64_t kProposalStream = 0x9209;

GraspConfig clamp_to_workspace(GraspConfig u, const Workspace& ws) {
    u.x = std::clamp(u.x, ws.x_min, ws.x_max);
    u.y = std::clamp(u.y, ws.y_min, ws.y_max);
    return u;
}

} // namespace

nlohmann::json CollectConfig::to_json() const {
    nlohmann::json j{{"object_set", object_set},
                     {"gripper", gripper_to_json(gripper)},
                     {"n_attempts", n_attempts},
                     {"objects_per_scene", objects_per_scene},
                     {"reset", reset == ResetRule::FreshEachAttempt ? "fresh" : "persist"},
                     {"overlap_frac", overlap_frac},
                     {"seed", seed},
                     {"crop_px", crop_px},
                     {"net_input", net_input},
                     {"tag", tag},
                     {"workspace", {workspace.x_min, workspace.y_min, workspace.x_max, workspace.y_max}}};
    if (policy.kind == CollectPolicy::Kind::Random) {
        j["policy"] = "random";
    } else {
        j["policy"] = {{"guided", {{"model", policy.model_path}, {"epsilon", policy.epsilon}}}};
    }
    return j;
}

CollectConfig CollectConfig::from_json(const nlohmann::json& j) {
    CollectConfig cfg;
    cfg.object_set = j.value("object_set", cfg.object_set);
    if (j.contains("gripper")) cfg.gripper = gripper_from_json(j.at("gripper"));
    if (j.contains("policy")) {
        const auto& p = j.at("policy");
        if (p.is_string() && p.get<std::string>() == "random") {
            cfg.policy.kind = CollectPolicy::Kind::Random;
        } else if (p.is_object() && p.contains("guided")) {
            cfg.policy.kind = CollectPolicy::Kind::Guided;
            cfg.policy.model_path = p.at("guided").value("model", "");
            cfg.policy.epsilon = p.at("guided").value("epsilon", 0.2);
            if (cfg.policy.epsilon < 0.0 || cfg.policy.epsilon > 1.0)
                raise(ErrorCode::ConfigError, "epsilon must lie in [0, 1]");
        } else {
            raise(ErrorCode::ConfigError, "policy must be \"random\" or {\"guided\": ...}");
        }
    }
    cfg.n_attempts = j.value("n_attempts", cfg.n_attempts);
    if (cfg.n_attempts < 1) raise(ErrorCode::ConfigError, "n_attempts must be >= 1");
    cfg.objects_per_scene = j.value("objects_per_scene", cfg.objects_per_scene);
    if (j.contains("reset")) {
        const std::string r = j.at("reset").get<std::string>();
        if (r == "fresh") cfg.reset = ResetRule::FreshEachAttempt;
        else if (r == "persist") cfg.reset = ResetRule::PersistUntilCleared;
        else raise(ErrorCode::ConfigError, "reset must be fresh or persist");
    }
    cfg.overlap_frac = j.value("overlap_frac", cfg.overlap_frac);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.crop_px = j.value("crop_px", cfg.crop_px);
    cfg.net_input = j.value("net_input", cfg.net_input);
    cfg.tag = j.value("tag", cfg.tag);
    if (j.contains("workspace")) {
        const auto& w = j.at("workspace");
        cfg.workspace = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>(),
                         w.at(3).get<double>()};
    }
    return cfg;
}

Dataset collect(const CollectConfig& cfg, const ModelParams* guided_model) {
    return collect_range(cfg, 0, cfg.n_attempts, guided_model);
}

Dataset collect_range(const CollectConfig& cfg, int begin, int end,
                      const ModelParams* guided_model) {
    cfg.gripper.validate();
    if (cfg.n_attempts < 1) raise(ErrorCode::ConfigError, "n_attempts must be >= 1");
    if (begin < 0 || end > cfg.n_attempts || begin > end)
        raise(ErrorCode::ConfigError, "attempt range outside [0, n_attempts]");
    if (cfg.reset == ResetRule::PersistUntilCleared && !(begin == 0 && end == cfg.n_attempts))
        raise(ErrorCode::ConfigError, "persistent scenes cannot be sharded");
    const ObjectSetPreset set = object_set_by_name(cfg.object_set);
    const size_t per_scene = std::min<size_t>(cfg.objects_per_scene, set.members.size());

    ModelParams loaded_model;
    const ModelParams* model = guided_model;
    if (cfg.policy.kind == CollectPolicy::Kind::Guided && !model) {
        try {
            loaded_model = load_model(cfg.policy.model_path);
        } catch (const Error& e) {
            raise(ErrorCode::ModelLoadError, std::string("guided policy: ") + e.what());
        }
        model = &loaded_model;
    }

    Dataset ds;
    ds.manifest.tag = cfg.tag.empty() ? cfg.gripper.tag() + "-" + cfg.object_set : cfg.tag;
    ds.manifest.patch_size = cfg.net_input;
    ds.manifest.creation_seed = cfg.seed;
    ds.manifest.config_hash = hash_hex(fnv1a64(cfg.to_json().dump()));
    ds.records.reserve(end - begin);
    ds.attempts.reserve(end - begin);

    Scene scene;
    bool have_scene = false;
    for (int attempt = begin; attempt < end; ++attempt) {
        const uint64_t scene_seed = derive_seed(derive_seed(cfg.seed, kSceneStream), attempt);
        if (cfg.reset == ResetRule::FreshEachAttempt || !have_scene || scene.objects.empty()) {
            // a dense clutter draw can defeat one placement seed; retry with
            // derived seeds so the run stays deterministic
            bool placed = false;
            for (int retry = 0; retry < 32 && !placed; ++retry) {
                try {
                    scene = place_randomly(set.members, cfg.workspace, per_scene,
                                           retry == 0 ? scene_seed : derive_seed(scene_seed, retry),
                                           cfg.overlap_frac);
                    placed = true;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::PlacementExhausted) throw;
                }
            }
            if (!placed)
                raise(ErrorCode::PlacementExhausted,
                      "no scene placement after 32 seed retries");
            have_scene = true;
        }
        const ImageGrid image = render(scene, cfg.camera);

        // per-attempt streams keep shards independent of each other
        Rng gate(derive_seed(derive_seed(cfg.seed, kGateStream), attempt));
        Rng proposal(derive_seed(derive_seed(cfg.seed, kProposalStream), attempt));

        GraspProposal prop;
        std::string policy_tag = "random";
        if (cfg.policy.kind == CollectPolicy::Kind::Random) {
            prop = random_policy(cfg.workspace, proposal);
        } else {
            const bool explore = gate.uniform() < cfg.policy.epsilon;
            if (explore) {
                prop = random_policy(cfg.workspace, proposal);
                policy_tag = "guided/explore";
            } else {
                prop = dense_policy(*model, image, cfg.camera);
                policy_tag = "guided/dense";
            }
        }
        const GraspConfig u = clamp_to_workspace(prop.u, cfg.workspace);

        const auto [outcome, after] = execute_grasp(scene, cfg.gripper, u, cfg.oracle);

        AttemptLog log;
        log.u = u;
        log.gripper = cfg.gripper;
        log.outcome = outcome;
        log.scene_before_hash = scene_hash(scene);
        log.seed = scene_seed;
        if (outcome.success()) {
            const PlacedObject* obj = scene.find(outcome.object_id);
            log.interaction = classify_interaction(cfg.gripper.material, obj->model.material);
        } else if (!scene.objects.empty()) {
            log.interaction =
                classify_interaction(cfg.gripper.material, scene.objects.front().model.material);
        }
        ds.attempts.push_back(log);

        if (outcome.kind == OutcomeKind::EmergencyStop) {
            ds.manifest.estop += 1; // no training label for aborted attempts
        } else {
            GraspRecord rec;
            rec.patch = resize(crop_patch(image, world_to_pixel(cfg.camera, u.center()), cfg.crop_px),
                               cfg.net_input);
            rec.bin = angle_to_bin(u.phi);
            rec.reward = outcome.success() ? 1 : 0;
            rec.outcome = outcome;
            rec.gripper_tag = cfg.gripper.tag();
            rec.object_set_tag = cfg.object_set;
            rec.policy_tag = policy_tag;
            rec.scene_seed = scene_seed;
            ds.manifest.total += 1;
            (rec.reward ? ds.manifest.success : ds.manifest.failure) += 1;
            ds.records.push_back(std::move(rec));
        }

        if (cfg.reset == ResetRule::PersistUntilCleared) scene = after;
    }
    return ds;
}

Dataset mix(const std::vector<const Dataset*>& sources, const std::vector<double>& proportions,
            size_t total, uint64_t seed) {
    if (sources.empty() || sources.size() != proportions.size())
        raise(ErrorCode::ConfigError, "mix requires matching sources and proportions");
    const double sum = std::accumulate(proportions.begin(), proportions.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9)
        raise(ErrorCode::ConfigError, "mix proportions must sum to 1");

    // largest-remainder quotas; remainder ties favor the lower source index
    std::vector<size_t> quota(sources.size());
    std::vector<std::pair<double, size_t>> rem;
    size_t assigned = 0;
    for (size_t i = 0; i < sources.size(); ++i) {
        const double q = proportions[i] * static_cast<double>(total);
        quota[i] = static_cast<size_t>(std::floor(q));
        assigned += quota[i];
        rem.emplace_back(q - std::floor(q), i);
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (size_t k = 0; k < total - assigned; ++k) quota[rem[k % rem.size()].second] += 1;

    Dataset out;
    out.manifest.creation_seed = seed;
    out.manifest.tag = "mix";
    out.manifest.patch_size = sources[0]->manifest.patch_size;
    nlohmann::json prov = nlohmann::json::array();
    for (size_t i = 0; i < sources.size(); ++i) {
        const Dataset& src = *sources[i];
        if (quota[i] > src.records.size())
            raise(ErrorCode::InsufficientSource,
                  "source " + std::to_string(i) + " has " + std::to_string(src.records.size()) +
                      " records, needs " + std::to_string(quota[i]));
        if (src.manifest.patch_size != out.manifest.patch_size)
            raise(ErrorCode::ConfigError, "mixed sources must share the patch size");
        std::vector<size_t> idx(src.records.size());
        std::iota(idx.begin(), idx.end(), size_t{0});
        Rng rng(derive_seed(seed, 0xa110c + i));
        for (size_t k = idx.size(); k > 1; --k) std::swap(idx[k - 1], idx[rng.uniform_int(k)]);
        for (size_t k = 0; k < quota[i]; ++k) out.records.push_back(src.records[idx[k]]);
        prov.push_back({{"tag", src.manifest.tag},
                        {"count", quota[i]},
                        {"config_hash", src.manifest.config_hash}});
    }
    out.manifest.provenance = std::move(prov);

    Rng rng(derive_seed(seed, 0x50f));
    for (size_t k = out.records.size(); k > 1; --k)
        std::swap(out.records[k - 1], out.records[rng.uniform_int(k)]);

    for (const GraspRecord& r : out.records) {
        out.manifest.total += 1;
        (r.reward ? out.manifest.success : out.manifest.failure) += 1;
    }
    out.manifest.config_hash = hash_hex(fnv1a64("mix:" + std::to_string(seed) + ":" +
                                                std::to_string(total)));
    return out;
}

// -- persistence -----------------------------------------------------------------

void save_dataset(const Dataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(ErrorCode::IoError, "cannot create dataset dir: " + dir);

    // patches.bin: concatenated raw float payloads
    std::ofstream patches(dir + "/patches.bin", std::ios::binary);
    std::ofstream records(dir + "/records.jsonl");
    if (!patches || !records) raise(ErrorCode::IoError, "cannot open dataset files in " + dir);

    std::vector<float> all;
    size_t offset = 0;
    for (const GraspRecord& r : ds.records) {
        const size_t bytes = r.patch.values.size() * sizeof(float);
        patches.write(reinterpret_cast<const char*>(r.patch.values.data()),
                      static_cast<std::streamsize>(bytes));
        all.insert(all.end(), r.patch.values.begin(), r.patch.values.end());
        nlohmann::json line{{"bin", r.bin},
                            {"reward", r.reward},
                            {"outcome", outcome_name(r.outcome)},
                            {"object_id", r.outcome.object_id},
                            {"gripper", r.gripper_tag},
                            {"object_set", r.object_set_tag},
                            {"policy", r.policy_tag},
                            {"scene_seed", r.scene_seed},
                            {"patch_offset", offset},
                            {"patch_len", bytes}};
        records << line.dump() << '\n';
        offset += bytes;
    }
    if (!patches || !records) raise(ErrorCode::IoError, "dataset write failed in " + dir);
    patches.close();
    records.close();

    std::ofstream attempts(dir + "/attempts.jsonl");
    for (const AttemptLog& log : ds.attempts) attempts << log.to_json().dump() << '\n';

    nlohmann::json manifest{{"total", ds.manifest.total},
                            {"success", ds.manifest.success},
                            {"failure", ds.manifest.failure},
                            {"estop", ds.manifest.estop},
                            {"patch_size", ds.manifest.patch_size},
                            {"tag", ds.manifest.tag},
                            {"config_hash", ds.manifest.config_hash},
                            {"creation_seed", ds.manifest.creation_seed},
                            {"provenance", ds.manifest.provenance},
                            {"patches_bytes", offset},
                            {"patches_crc32", crc32(all.data(), all.size() * sizeof(float))}};
    std::ofstream mf(dir + "/manifest.json");
    if (!mf) raise(ErrorCode::IoError, "cannot write manifest in " + dir);
    mf << manifest.dump(2) << '\n';
}

Dataset load_dataset(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) raise(ErrorCode::IoError, "cannot open manifest in " + dir);
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::IoError, std::string("bad manifest: ") + e.what());
    }

    Dataset ds;
    ds.manifest.total = manifest.at("total").get<size_t>();
    ds.manifest.success = manifest.at("success").get<size_t>();
    ds.manifest.failure = manifest.at("failure").get<size_t>();
    ds.manifest.estop = manifest.at("estop").get<size_t>();
    ds.manifest.patch_size = manifest.at("patch_size").get<int>();
    ds.manifest.tag = manifest.at("tag").get<std::string>();
    ds.manifest.config_hash = manifest.at("config_hash").get<std::string>();
    ds.manifest.creation_seed = manifest.at("creation_seed").get<uint64_t>();
    ds.manifest.provenance = manifest.value("provenance", nlohmann::json());

    std::ifstream patches(dir + "/patches.bin", std::ios::binary | std::ios::ate);
    if (!patches) raise(ErrorCode::IoError, "cannot open patches.bin in " + dir);
    const size_t patch_bytes = static_cast<size_t>(patches.tellg());
    if (patch_bytes != manifest.at("patches_bytes").get<size_t>())
        raise(ErrorCode::ManifestMismatch, "patches.bin size differs from the manifest");
    patches.seekg(0);
    std::vector<float> all(patch_bytes / sizeof(float));
    patches.read(reinterpret_cast<char*>(all.data()), static_cast<std::streamsize>(patch_bytes));
    if (!patches) raise(ErrorCode::IoError, "patches.bin read failed");
    if (crc32(all.data(), patch_bytes) != manifest.at("patches_crc32").get<uint32_t>())
        raise(ErrorCode::ManifestMismatch, "patches.bin checksum mismatch");

    std::ifstream records(dir + "/records.jsonl");
    if (!records) raise(ErrorCode::IoError, "cannot open records.jsonl in " + dir);
    const int side = ds.manifest.patch_size;
    std::string line;
    size_t success = 0, failure = 0;
    while (std::getline(records, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::IoError, std::string("bad record line: ") + e.what());
        }
        GraspRecord r;
        r.bin = j.at("bin").get<int>();
        r.reward = j.at("reward").get<int>();
        r.outcome = outcome_from_name(j.at("outcome").get<std::string>());
        r.outcome.object_id = j.value("object_id", "");
        r.gripper_tag = j.at("gripper").get<std::string>();
        r.object_set_tag = j.at("object_set").get<std::string>();
        r.policy_tag = j.at("policy").get<std::string>();
        r.scene_seed = j.at("scene_seed").get<uint64_t>();
        const size_t off = j.at("patch_offset").get<size_t>() / sizeof(float);
        const size_t len = j.at("patch_len").get<size_t>() / sizeof(float);
        if (off + len > all.size() || len != static_cast<size_t>(side) * side * 3)
            raise(ErrorCode::ManifestMismatch, "record patch span outside patches.bin");
        r.patch = ImageGrid(side, side);
        std::copy(all.begin() + off, all.begin() + off + len, r.patch.values.begin());
        (r.reward ? success : failure) += 1;
        ds.records.push_back(std::move(r));
    }
    if (ds.records.size() != ds.manifest.total || success != ds.manifest.success ||
        failure != ds.manifest.failure)
        raise(ErrorCode::ManifestMismatch, "record counts differ from the manifest");
    return ds;
}

std::vector<LabeledPatch> as_labeled(const Dataset& ds) { return as_labeled(ds, ds.records.size()); }

std::vector<LabeledPatch> as_labeled(const Dataset& ds, size_t prefix) {
    std::vector<LabeledPatch> out;
    const size_t n = std::min(prefix, ds.records.size());
    out.reserve(n);
    for (size_t i = 0; i < n; ++i)
        out.push_back(LabeledPatch{&ds.records[i].patch, ds.records[i].bin, ds.records[i].reward});
    return out;
}

} // namespace grasplab
