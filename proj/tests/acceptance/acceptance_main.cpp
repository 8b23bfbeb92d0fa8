// Acceptance suite: one pass/fail line per criterion. Runs everything by
// default; `--only 1,3,5` restricts to a subset, `--quick` shrinks the heavy
// learning criteria for smoke runs (and marks them as such).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grasplab/bench.hpp"
#include "grasplab/collect.hpp"
#include "grasplab/error.hpp"
#include "grasplab/learn.hpp"
#include "grasplab/policy.hpp"
#include "grasplab/rng.hpp"
#include "grasplab/util.hpp"

#include "independent_oracle.hpp"

using namespace grasplab;

namespace {

bool g_quick = false;

struct Criterion {
    int id;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

const Workspace kBin{0.0, 0.0, 400.0, 400.0};

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

// random scene from the rigid presets plus optional toys
Scene random_scene(uint64_t seed, int max_objects, const Workspace& ws, bool include_toys) {
    auto members = level1_8().members;
    const auto l2 = level2_8().members;
    members.insert(members.end(), l2.begin(), l2.end());
    if (include_toys) {
        const auto toys = soft_toys_25().members;
        members.insert(members.end(), toys.begin(), toys.begin() + 8);
    }
    Rng rng(derive_seed(seed, 0x5cee));
    const int count = 1 + static_cast<int>(rng.uniform_int(max_objects));
    return place_randomly(members, ws, count, derive_seed(seed, 0x91a), 0.1);
}

// ---------------------------------------------------------------------------
// criterion 1: FCN dense/sliding-window equivalence

Criterion criterion_1() {
    Criterion c{1, "FCN equivalence: dense cells match predict_q crops (1e-5)"};
    double max_err = 0.0;
    int n_scenes = 0;
    for (int s = 0; s < 20; ++s) {
        // mostly 200 mm scenes (13x13 cells), a few full-bin ones
        const bool big = s % 5 == 0;
        const Workspace ws = big ? kBin : Workspace{0, 0, 200, 200};
        CameraModel cam = desk_camera();
        cam.image_height = cam.image_width = big ? 256 : 128;
        const Scene scene = random_scene(1000 + s, 3, ws, true);
        const ImageGrid image = render(scene, cam);
        const ModelParams params = init_params(desk_net(), derive_seed(7, s % 3));
        const DensePrediction dense = dense_predict(params, image);
        for (int i = 0; i < dense.scores.height; ++i) {
            for (int j = 0; j < dense.scores.width; ++j) {
                const ImageGrid patch = crop_patch(
                    image, {dense.offset + j * dense.stride, dense.offset + i * dense.stride}, 32);
                // one forward per crop; per-bin scores are predict_q's own math
                const TensorMap logits = forward(params, image_to_tensor(patch));
                for (int k = 0; k < 18; ++k)
                    max_err = std::max(
                        max_err, std::abs(success_probability(logits.v[2 * k], logits.v[2 * k + 1]) -
                                          dense.scores.at(i, j, k)));
            }
        }
        ++n_scenes;
    }
    c.pass = max_err <= 1e-5;
    c.detail = "max |dense - predict_q| = " + fmt(max_err, 9) + " over " +
               std::to_string(n_scenes) + " scenes";
    return c;
}

// ---------------------------------------------------------------------------
// criterion 2: gradient correctness and the loss mask

Criterion criterion_2() {
    Criterion c{2, "gradient correctness: fd check 1e-6 (f64) / 1e-3 (f32), mask exact"};
    const ModelParams params = init_params(desk_net(), 11);

    // one rendered patch, one synthetic patch; several bins and both rewards
    const Scene scene = random_scene(42, 2, kBin, false);
    const ImageGrid image = render(scene, desk_camera());
    const Vec2 center = world_to_pixel(desk_camera(), {scene.objects[0].pose.x,
                                                       scene.objects[0].pose.y});
    const ImageGrid rendered = resize(crop_patch(image, center, 40), 32);
    Rng rng(9);
    ImageGrid synthetic(32, 32, 0.0f);
    for (float& v : synthetic.values) v = static_cast<float>(rng.uniform());

    double worst64 = 0.0, worst32 = 0.0, worst_mask = 0.0;
    int checked = 0;
    const struct { const ImageGrid* patch; int bin; int reward; } cases[] = {
        {&rendered, 3, 1}, {&rendered, 12, 0}, {&synthetic, 0, 1}, {&synthetic, 17, 0}};
    for (const auto&[patch, bin, reward] : cases) {
        const GradCheckResult g64 =
            gradient_check(params, *patch, bin, reward, 1e-5, Precision::Float64, 200, 100 + bin);
        const GradCheckResult g32 =
            gradient_check(params, *patch, bin, reward, 1e-3, Precision::Float32, 200, 200 + bin);
        worst64 = std::max(worst64, g64.max_rel_error);
        worst32 = std::max(worst32, g32.max_rel_error);
        worst_mask = std::max({worst_mask, g64.max_nonactive_grad, g32.max_nonactive_grad});
        checked += g64.n_checked + g32.n_checked;
    }
    c.pass = worst64 < 1e-6 && worst32 < 1e-3 && worst_mask == 0.0;
    c.detail = "f64 max rel " + fmt(worst64, 9) + ", f32 max rel " + fmt(worst32, 7) +
               ", nonactive |grad| " + fmt(worst_mask, 1) + ", " + std::to_string(checked) +
               " weights";
    return c;
}

// ---------------------------------------------------------------------------
// criteria 3 and 4: oracle equivalence and taxonomy properties

struct OracleScene {
    Scene scene;
    std::string kind; // rigid-mix | soft-single | circle-single
};

std::vector<OracleScene> oracle_scene_set() {
    std::vector<OracleScene> scenes;
    const auto l1 = level1_8().members;
    const auto l2 = level2_8().members;
    const auto toys = soft_toys_25().members;

    // six rigid scenes of 1-3 objects
    auto rigid = l1;
    rigid.insert(rigid.end(), l2.begin(), l2.end());
    for (int s = 0; s < 6; ++s)
        scenes.push_back(
            {place_randomly(rigid, kBin, 1 + s % 3, derive_seed(0xace, s), 0.1), "rigid-mix"});
    // two single soft-toy scenes (the pinch taxonomy cases)
    for (int s = 0; s < 2; ++s)
        scenes.push_back({place_randomly({toys[s * 3], toys[s * 3 + 1]}, kBin, 1,
                                         derive_seed(0xbee, s), 0.0),
                          "soft-single"});
    // two single-circle scenes (the 4-finger inclusion cases)
    const ObjectModel circles[2] = {l1[0], l1[2]};
    for (int s = 0; s < 2; ++s)
        scenes.push_back(
            {place_randomly({circles[s]}, kBin, 1, derive_seed(0xca11, s), 0.0), "circle-single"});
    return scenes;
}

Criterion criterion_3() {
    Criterion c{3, "oracle equivalence: independent reimplementation, cell-for-cell"};
    const auto scenes = oracle_scene_set();
    const ContactConfig contact;
    const char* grippers[4] = {"precise_rigid", "power_soft", "precise_soft", "power_rigid"};
    size_t cells = 0, mismatches = 0;
    for (size_t s = 0; s < scenes.size(); ++s) {
        const GripperSpec g = gripper_by_name(grippers[s % 4]);
        const SuccessMap mine = brute_force_success_map(scenes[s].scene, g, 21, 21, 18);
        std::vector<uint8_t> theirs(static_cast<size_t>(21) * 21 * 18, 0);
        parallel_for(21 * 21, [&](size_t cell) {
            const int i = static_cast<int>(cell) / 21;
            const int j = static_cast<int>(cell) % 21;
            const double x = kBin.x_min + (i + 0.5) * kBin.width() / 21;
            const double y = kBin.y_min + (j + 0.5) * kBin.height() / 21;
            for (int k = 0; k < 18; ++k) {
                const GraspConfig u{x, y, (k + 0.5) * M_PI / 18};
                theirs[cell * 18 + k] =
                    indep::decide(scenes[s].scene, g, u, contact).success() ? 1 : 0;
            }
        });
        for (size_t i = 0; i < theirs.size(); ++i) {
            ++cells;
            if (theirs[i] != mine.cells[i]) ++mismatches;
        }
    }
    c.pass = mismatches == 0 && scenes.size() >= 10;
    c.detail = std::to_string(cells) + " cells over " + std::to_string(scenes.size()) +
               " scenes, " + std::to_string(mismatches) + " mismatches";
    return c;
}

Criterion criterion_4() {
    Criterion c{4, "taxonomy: e-stop rigid-rigid only; soft/4f inclusions; phi invariance"};
    const auto scenes = oracle_scene_set();
    bool estop_ok = true, inclusion_ok = true, phi_ok = true, four_ok = true;

    for (const OracleScene& os : scenes) {
        // (a) e-stops only under rigid fingers with some rigid object present
        for (const char* gname : {"precise_rigid", "power_rigid", "precise_soft", "power_soft"}) {
            const GripperSpec g = gripper_by_name(gname);
            bool any_rigid_object = false;
            for (const auto& o : os.scene.objects)
                if (o.model.material == Material::Rigid) any_rigid_object = true;
            for (int i = 0; i < 11; ++i) {
                for (int j = 0; j < 11; ++j) {
                    const double x = (i + 0.5) * 400.0 / 11, y = (j + 0.5) * 400.0 / 11;
                    const auto [out, after] =
                        execute_grasp(os.scene, g, GraspConfig{x, y, bin_to_angle(i % 18)});
                    if (out.kind == OutcomeKind::EmergencyStop &&
                        !(g.material == Material::Rigid && any_rigid_object))
                        estop_ok = false;
                }
            }
        }
        // (b) soft-finger success set contains the rigid-finger one
        for (const char* pair : {"precise", "power"}) {
            const std::string base = pair;
            const SuccessMap rigid =
                brute_force_success_map(os.scene, gripper_by_name(base + "_rigid"), 21, 21, 18);
            const SuccessMap soft =
                brute_force_success_map(os.scene, gripper_by_name(base + "_soft"), 21, 21, 18);
            for (size_t i = 0; i < rigid.cells.size(); ++i)
                if (rigid.cells[i] && !soft.cells[i]) inclusion_ok = false;
        }
        // (c) soft-object phi invariance on the pinch scenes
        if (os.kind == "soft-single") {
            for (const char* gname : {"precise_rigid", "power_soft"}) {
                const SuccessMap map =
                    brute_force_success_map(os.scene, gripper_by_name(gname), 21, 21, 18);
                for (int i = 0; i < 21; ++i)
                    for (int j = 0; j < 21; ++j) {
                        bool any = false, all = true;
                        for (int k = 0; k < 18; ++k) {
                            any |= map.at(i, j, k);
                            all &= map.at(i, j, k);
                        }
                        if (any != all) phi_ok = false;
                    }
            }
        }
        // (d) 4-finger positional inclusion on circles
        if (os.kind == "circle-single") {
            for (const char* mat : {"rigid", "soft"}) {
                const std::string m = mat;
                const SuccessMap two =
                    brute_force_success_map(os.scene, gripper_by_name("precise_" + m), 21, 21, 18);
                const SuccessMap four =
                    brute_force_success_map(os.scene, gripper_by_name("power_" + m), 21, 21, 18);
                for (size_t i = 0; i < two.cells.size(); ++i)
                    if (two.cells[i] && !four.cells[i]) four_ok = false;
            }
        }
    }
    c.pass = estop_ok && inclusion_ok && phi_ok && four_ok;
    c.detail = std::string("estop:") + (estop_ok ? "ok" : "FAIL") +
               " softset:" + (inclusion_ok ? "ok" : "FAIL") +
               " phi:" + (phi_ok ? "ok" : "FAIL") + " 4finger:" + (four_ok ? "ok" : "FAIL");
    return c;
}

// ---------------------------------------------------------------------------
// criterion 5: the throughput metric

Criterion criterion_5() {
    Criterion c{5, "MPPH identity, exact example, published-table proportionality"};
    const bool exact = compute_mpph(0.5, 8.0, 10.0) == 100.0;

    // every emitted report row satisfies the identity
    ExperimentSpec spec;
    spec.test_gripper = gripper_by_name("power_soft");
    spec.test_object_set = "Levels-16";
    spec.attempts_per_object = 2;
    spec.seeds = {77};
    const BenchReport report = run_single_object_eval(spec, EvalPolicy::heuristic());
    const std::string dir = "/tmp/grasplab_acceptance_report";
    emit_report(report, spec, dir);
    std::ifstream rj(dir + "/report.json");
    nlohmann::json j;
    rj >> j;
    bool identity = true;
    int rows = 0;
    for (const auto& section : {"rows", "aggregates"}) {
        for (const auto& row : j.at(section)) {
            const double sr = row.at("success_rate").get<double>();
            const double tc = row.at("t_c").get<double>();
            const double te = row.at("t_e").get<double>();
            const double mpph = row.at("mpph").get<double>();
            if (std::abs(mpph - 3600.0 * sr / (tc + te)) > 1e-9) identity = false;
            ++rows;
        }
    }

    const double table[4][4] = {{10.3, 11.2, 0.3505, 104.34},
                                {10.1, 10.4, 0.6667, 208.13},
                                {10.2, 10.3, 0.8197, 255.90},
                                {0.16, 10.4, 0.7463, 452.28}};
    double lo = 1e300, hi = 0.0;
    for (const auto& r : table) {
        const double ratio = r[3] / (r[2] / (r[0] + r[1]));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    const bool proportional = hi / lo - 1.0 < 0.01;

    c.pass = exact && identity && proportional;
    c.detail = std::string("mpph(0.5,8,10)=100: ") + (exact ? "ok" : "FAIL") + "; identity over " +
               std::to_string(rows) + " rows: " + (identity ? "ok" : "FAIL") +
               "; table spread " + fmt((hi / lo - 1.0) * 100, 4) + "%";
    return c;
}

// ---------------------------------------------------------------------------
// shared learning recipe for criteria 6-8 and 10

struct TrainedModel {
    ModelParams params;
    Dataset mixed;
};

Dataset collect_precise_mixed(uint64_t seed, int total) {
    // half rigid-finger picks on the soft toys, half soft-finger picks on the
    // level objects; precise (2-finger) gripper throughout
    // a crowded collection bin keeps the random-grasp hit rate useful
    const Workspace collect_bin{40.0, 40.0, 360.0, 360.0};
    CollectConfig toys;
    toys.workspace = collect_bin;
    toys.object_set = "SoftToys25";
    toys.gripper = gripper_by_name("precise_rigid");
    toys.n_attempts = total / 2;
    toys.objects_per_scene = 8;
    toys.seed = derive_seed(seed, 0x701);
    toys.tag = "2F-RigidSoft";

    CollectConfig levels;
    levels.workspace = collect_bin;
    levels.object_set = "Levels-16";
    levels.gripper = gripper_by_name("precise_soft");
    levels.n_attempts = total / 2;
    levels.objects_per_scene = 6;
    levels.seed = derive_seed(seed, 0x702);
    levels.tag = "2F-SoftRigid";

    const Dataset a = collect(toys);
    const Dataset b = collect(levels);
    return mix({&a, &b}, {0.5, 0.5}, total, derive_seed(seed, 0x703));
}

TrainConfig accept_train_config(uint64_t seed) {
    TrainConfig tc;
    tc.epochs = g_quick ? 8 : 32;
    tc.seed = seed;
    return tc;
}

TrainedModel train_recipe(uint64_t seed, int total) {
    TrainedModel tm;
    tm.mixed = collect_precise_mixed(seed, total);
    const TrainResult r =
        train(init_params(desk_net(), derive_seed(seed, 0x1e17)), as_labeled(tm.mixed),
              accept_train_config(seed));
    tm.params = r.params;
    return tm;
}

ExperimentSpec level1_eval_spec(uint64_t seed) {
    ExperimentSpec spec;
    spec.name = "level1_eval";
    spec.test_gripper = gripper_by_name("power_soft");
    spec.test_object_set = "Level1-8";
    spec.attempts_per_object = 10;
    spec.seeds = {derive_seed(seed, 0xe7a1)};
    spec.workspace = {40.0, 40.0, 360.0, 360.0}; // same bin as collection
    return spec;
}

// ---------------------------------------------------------------------------
// criterion 6: end-to-end learning beats the heuristic baseline

Criterion criterion_6() {
    Criterion c{6, "end-to-end: trained dense >= heuristic + 10pts and >= 80% on level-1"};
    const int total = g_quick ? 1000 : 4000;
    const int n_seeds = 3;
    int passes = 0;
    std::string details;
    for (uint64_t seed = 1; seed <= n_seeds; ++seed) {
        const double t0 = now_s();
        const TrainedModel tm = train_recipe(seed, total);
        const double train_minutes = (now_s() - t0) / 60.0;

        const ExperimentSpec spec = level1_eval_spec(seed);
        const BenchReport dense = run_single_object_eval(spec, EvalPolicy::dense(tm.params));
        const BenchReport heuristic = run_single_object_eval(spec, EvalPolicy::heuristic());
        const BenchReport random = run_single_object_eval(spec, EvalPolicy::random());

        const double sd = dense.metrics.success_rate;
        const double sh = heuristic.metrics.success_rate;
        const bool ordering_ok = sd >= random.metrics.success_rate; // cheat is 1.0 by criterion 10
        const bool ok = sd >= sh + 0.10 && sd >= 0.80 && train_minutes < 30.0 && ordering_ok;
        passes += ok ? 1 : 0;
        details += " s" + std::to_string(seed) + ":dense=" + fmt(sd, 3) + ",heur=" + fmt(sh, 3) +
                   (ok ? "(ok)" : "(miss)");
    }
    c.pass = passes * 2 > n_seeds;
    c.detail = std::to_string(passes) + "/" + std::to_string(n_seeds) + " seeds" + details +
               (g_quick ? " [quick]" : "");
    return c;
}

// ---------------------------------------------------------------------------
// criterion 7: data-size ablation shape

Criterion criterion_7() {
    Criterion c{7, "ablation: non-decreasing within noise, <= 5pt change at the plateau"};
    const std::vector<size_t> sizes =
        g_quick ? std::vector<size_t>{250, 500, 1000} : std::vector<size_t>{250, 500, 1000, 2000, 4000};
    const std::vector<uint64_t> seeds = {1, 2, 3};

    const Dataset mixed = collect_precise_mixed(901, g_quick ? 1000 : 4000);
    ExperimentSpec spec = level1_eval_spec(901);
    const auto curve =
        run_ablation(mixed, desk_net(), accept_train_config(901), spec, sizes, seeds);

    std::string pts;
    for (const AblationPoint& p : curve)
        pts += " " + std::to_string(p.size) + ":" + fmt(p.mean_success_rate, 3);

    const double first2 = 0.5 * (curve[0].mean_success_rate + curve[1].mean_success_rate);
    const double last2 = 0.5 * (curve[curve.size() - 1].mean_success_rate +
                                curve[curve.size() - 2].mean_success_rate);
    const double plateau_gap = std::abs(curve[curve.size() - 1].mean_success_rate -
                                        curve[curve.size() - 2].mean_success_rate);
    c.pass = last2 >= first2 && plateau_gap <= 0.05;
    c.detail = "curve:" + pts + "; mean(last2)=" + fmt(last2, 3) + " vs mean(first2)=" +
               fmt(first2, 3) + ", plateau gap " + fmt(plateau_gap, 3) + (g_quick ? " [quick]" : "");
    return c;
}

// ---------------------------------------------------------------------------
// criterion 8: transfer ordering across gripper pairings

Criterion criterion_8() {
    Criterion c{8, "transfer: precise-collect/power-test wins in >= 3 of 5 seeds"};
    const int total = g_quick ? 1000 : 4000;
    const int n_seeds = 5;
    int wins = 0;
    std::string details;

    for (uint64_t seed = 1; seed <= n_seeds; ++seed) {
        auto collect_levels = [&](const char* gripper, uint64_t stream) {
            CollectConfig cfg;
            cfg.workspace = {40.0, 40.0, 360.0, 360.0};
            cfg.object_set = "Levels-16";
            cfg.gripper = gripper_by_name(gripper);
            cfg.n_attempts = total;
            cfg.objects_per_scene = 6;
            cfg.seed = derive_seed(seed, stream);
            return collect(cfg);
        };
        const Dataset ds_precise = collect_levels("precise_soft", 0x801);
        const Dataset ds_power = collect_levels("power_soft", 0x802);
        const ModelParams m_precise =
            train(init_params(desk_net(), derive_seed(seed, 0x1e17)), as_labeled(ds_precise),
                  accept_train_config(seed))
                .params;
        const ModelParams m_power =
            train(init_params(desk_net(), derive_seed(seed, 0x1e18)), as_labeled(ds_power),
                  accept_train_config(seed))
                .params;

        ExperimentSpec spec;
        spec.test_object_set = "Levels-16";
        spec.attempts_per_object = 10;
        spec.seeds = {derive_seed(seed, 0xe7a2)};
        spec.workspace = {40.0, 40.0, 360.0, 360.0};

        spec.test_gripper = gripper_by_name("power_soft");
        const double precise_power =
            run_single_object_eval(spec, EvalPolicy::dense(m_precise)).metrics.success_rate;
        const double power_power =
            run_single_object_eval(spec, EvalPolicy::dense(m_power)).metrics.success_rate;
        spec.test_gripper = gripper_by_name("precise_soft");
        const double precise_precise =
            run_single_object_eval(spec, EvalPolicy::dense(m_precise)).metrics.success_rate;

        const bool win = precise_power > power_power && precise_power > precise_precise;
        wins += win ? 1 : 0;
        details += " s" + std::to_string(seed) + ":[pp=" + fmt(precise_power, 3) +
                   ",ww=" + fmt(power_power, 3) + ",cc=" + fmt(precise_precise, 3) +
                   (win ? " win]" : " -]");
    }
    c.pass = wins >= 3;
    c.detail = std::to_string(wins) + "/5 wins" + details + (g_quick ? " [quick]" : "");
    return c;
}

// ---------------------------------------------------------------------------
// criterion 9: dense inference speedup

Criterion criterion_9() {
    Criterion c{9, "dense t_c <= sampled(n=1000) t_c / 10 on 256x256 (median of 20)"};
    const ModelParams params = init_params(desk_net(), 31);
    const Scene scene = random_scene(77, 6, kBin, false);
    const ImageGrid image = render(scene, desk_camera());

    std::vector<double> dense_t, sampled_t;
    for (int run = 0; run < 20; ++run) {
        double t0 = now_s();
        dense_policy(params, image, desk_camera());
        dense_t.push_back(now_s() - t0);

        SampleConfig sc;
        sc.n_samples = 1000;
        Rng rng(run + 1);
        t0 = now_s();
        sampled_policy(params, image, desk_camera(), sc, rng);
        sampled_t.push_back(now_s() - t0);
    }
    std::sort(dense_t.begin(), dense_t.end());
    std::sort(sampled_t.begin(), sampled_t.end());
    const double dense_med = dense_t[dense_t.size() / 2];
    const double sampled_med = sampled_t[sampled_t.size() / 2];
    c.pass = dense_med <= sampled_med / 10.0;
    c.detail = "dense " + fmt(dense_med * 1e3, 2) + " ms vs sampled " + fmt(sampled_med * 1e3, 2) +
               " ms (" + fmt(sampled_med / dense_med, 1) + "x)";
    return c;
}

// ---------------------------------------------------------------------------
// criterion 10: clutter accounting

Criterion criterion_10() {
    Criterion c{10, "clutter: cheat clears 10-in-10; trained accounting holds over 5x20"};
    ExperimentSpec spec;
    spec.test_gripper = gripper_by_name("power_soft");
    spec.trials = 5;
    spec.attempt_budget = 20;
    spec.seeds = {13};
    spec.workspace = {40.0, 40.0, 360.0, 360.0};

    const BenchReport cheat = run_clutter_removal(spec, EvalPolicy::cheat());
    bool cheat_ok = true;
    for (const ReportRow& t : cheat.per_object)
        if (t.attempts != 10 || t.successes != 10) cheat_ok = false;

    const TrainedModel tm = train_recipe(5, g_quick ? 800 : 3000);
    const BenchReport trained = run_clutter_removal(spec, EvalPolicy::dense(tm.params));
    bool accounting = true;
    for (const ReportRow& t : trained.per_object) {
        if (t.successes > t.attempts || t.attempts > 20) accounting = false;
        if (std::abs(t.mpph - 3600.0 * t.success_rate / (t.t_c + t.t_e)) > 1e-9) accounting = false;
    }
    if (trained.metrics.failures != trained.metrics.attempts - trained.metrics.successes)
        accounting = false;

    c.pass = cheat_ok && accounting;
    c.detail = std::string("cheat 10-in-10: ") + (cheat_ok ? "ok" : "FAIL") +
               "; trained sr=" + fmt(trained.metrics.success_rate, 3) + " attempts=" +
               std::to_string(trained.metrics.attempts) + (accounting ? "" : " accounting FAIL") +
               (g_quick ? " [quick]" : "");
    return c;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) g_quick = true;
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        }
    }

    using CriterionFn = Criterion (*)();
    const CriterionFn fns[] = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                               criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

    int failures = 0;
    for (int i = 0; i < 10; ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        const double t0 = now_s();
        Criterion c;
        try {
            c = fns[i]();
        } catch (const std::exception& e) {
            c.id = i + 1;
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        c.seconds = now_s() - t0;
        std::printf("[%s] criterion %2d (%7.1fs): %s -- %s\n", c.pass ? "PASS" : "FAIL", i + 1,
                    c.seconds, c.name.c_str(), c.detail.c_str());
        std::fflush(stdout);
        failures += c.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
