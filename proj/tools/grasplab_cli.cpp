#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grasplab/bench.hpp"
#include "grasplab/collect.hpp"
#include "grasplab/error.hpp"
#include "grasplab/learn.hpp"
#include "grasplab/util.hpp"

using namespace grasplab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct GlobalOpts {
    uint64_t seed = 1;
    std::string out_dir = "out";
    std::string preset = "desk";
};

struct Pipeline {
    CameraModel camera;
    NetSpec net;
    int crop_px = 40;
};

Pipeline pipeline_for(const std::string& preset) {
    if (preset == "desk") return {desk_camera(), desk_net(), 64};
    if (preset == "paper") return {paper_camera(), paper_net(), 160};
    raise(ErrorCode::ConfigError, "unknown preset: " + preset + " (expected desk or paper)");
}

std::vector<uint64_t> parse_u64_list(const std::string& csv) {
    std::vector<uint64_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    return out;
}

std::vector<size_t> parse_size_list(const std::string& csv) {
    std::vector<size_t> out;
    for (const uint64_t v : parse_u64_list(csv)) out.push_back(static_cast<size_t>(v));
    return out;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(ErrorCode::IoError, "cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ConfigError, path + ": " + e.what());
    }
    return j;
}

ExperimentSpec eval_spec_for(const std::string& test_id, const GlobalOpts& g, const Pipeline& p) {
    const TestPreset preset = test_preset(test_id);
    ExperimentSpec spec;
    spec.name = test_id;
    for (const RecipeComponent& c : preset.recipe) {
        if (!spec.recipe.empty()) spec.recipe += " + ";
        spec.recipe += std::to_string(static_cast<int>(c.proportion * 100)) + "% " + c.dataset_tag;
    }
    spec.test_gripper = gripper_by_name(preset.test_gripper);
    spec.test_object_set = "Levels-16";
    spec.attempts_per_object = 10;
    spec.seeds = {g.seed};
    spec.camera = p.camera;
    return spec;
}

void print_report(const BenchReport& report) {
    std::printf("%-16s %8s %9s %12s %10s %8s %10s\n", "name", "attempts", "successes",
                "success_rate", "t_c", "t_e", "mpph");
    auto line = [](const ReportRow& r) {
        std::printf("%-16s %8zu %9zu %12.4f %10.4f %8.2f %10.2f\n", r.name.c_str(), r.attempts,
                    r.successes, r.success_rate, r.t_c, r.t_e, r.mpph);
    };
    for (const ReportRow& r : report.per_object) line(r);
    for (const ReportRow& r : report.aggregates) line(r);
}

int cmd_collect(const GlobalOpts& g, const Pipeline& p, const std::string& config_path,
                const std::string& preset_tag, const std::string& guided_model) {
    CollectConfig cfg;
    if (!preset_tag.empty()) {
        cfg = collection_preset(preset_tag, g.seed, guided_model);
    } else if (!config_path.empty()) {
        cfg = CollectConfig::from_json(load_json_file(config_path));
    } else {
        raise(ErrorCode::ConfigError, "collect needs --config or --preset-tag");
    }
    if (cfg.seed == 1 && g.seed != 1) cfg.seed = g.seed;
    cfg.camera = p.camera;
    cfg.crop_px = p.crop_px;
    cfg.net_input = p.net.input_size;

    const Dataset ds = collect(cfg);
    const std::string dir = g.out_dir + "/" + (cfg.tag.empty() ? "dataset" : cfg.tag);
    save_dataset(ds, dir);
    std::printf("collected %zu records (%zu success, %zu failure, %zu e-stops) -> %s\n",
                ds.manifest.total, ds.manifest.success, ds.manifest.failure, ds.manifest.estop,
                dir.c_str());
    return kExitOk;
}

int cmd_train(const GlobalOpts& g, const Pipeline& p, const std::string& dataset_dir,
              const std::string& out_path, TrainConfig tc) {
    const Dataset ds = load_dataset(dataset_dir);
    if (ds.manifest.patch_size != p.net.input_size)
        raise(ErrorCode::ConfigError, "dataset patch size " + std::to_string(ds.manifest.patch_size) +
                                          " does not match the net input " +
                                          std::to_string(p.net.input_size));
    tc.seed = g.seed;
    const ModelParams start = init_params(p.net, derive_seed(g.seed, 0x1417));
    const TrainResult result = train(start, as_labeled(ds), tc);
    save_model(result.params, out_path);
    write_loss_curve_csv(result.curve, out_path + ".curve.csv");
    std::printf("trained %d epochs on %zu records; final loss %.4f acc %.4f -> %s\n", tc.epochs,
                ds.records.size(), result.curve.back().mean_loss,
                result.curve.back().train_accuracy, out_path.c_str());
    return kExitOk;
}

int cmd_eval(const GlobalOpts& g, const Pipeline& p, const std::string& model_path,
             const std::string& test_id, const std::string& policy_name, int n_samples) {
    const ModelParams model = load_model(model_path);
    ExperimentSpec spec = eval_spec_for(test_id, g, p);
    EvalPolicy policy = EvalPolicy::dense(model);
    if (policy_name == "sampled") {
        SampleConfig sc;
        sc.n_samples = n_samples;
        sc.crop_px = p.crop_px;
        policy = EvalPolicy::sampled(model, sc);
    } else if (policy_name != "dense") {
        raise(ErrorCode::ConfigError, "eval policy must be dense or sampled");
    }
    const BenchReport report = run_single_object_eval(spec, policy);
    emit_report(report, spec, g.out_dir + "/eval_" + test_id);
    print_report(report);
    return kExitOk;
}

int cmd_baseline(const GlobalOpts& g, const Pipeline& p, const std::string& test_id) {
    ExperimentSpec spec = eval_spec_for(test_id, g, p);
    spec.name = test_id + "_baseline";
    const BenchReport report = run_single_object_eval(spec, EvalPolicy::heuristic());
    emit_report(report, spec, g.out_dir + "/baseline_" + test_id);
    print_report(report);
    return kExitOk;
}

int cmd_ablate(const GlobalOpts& g, const Pipeline& p, const std::string& dataset_dir,
               const std::string& sizes_csv, const std::string& seeds_csv, TrainConfig tc) {
    const Dataset ds = load_dataset(dataset_dir);
    const std::vector<size_t> sizes = parse_size_list(sizes_csv);
    std::vector<uint64_t> seeds = parse_u64_list(seeds_csv);
    if (seeds.empty()) seeds = {g.seed, g.seed + 1, g.seed + 2};

    ExperimentSpec spec;
    spec.name = "ablation";
    spec.test_gripper = gripper_by_name("power_soft");
    spec.test_object_set = "Level1-8";
    spec.attempts_per_object = 10;
    spec.camera = p.camera;

    const auto curve = run_ablation(ds, p.net, tc, spec, sizes, seeds);
    std::error_code ec;
    std::filesystem::create_directories(g.out_dir, ec);
    std::ofstream csv(g.out_dir + "/ablation.csv");
    if (!csv) raise(ErrorCode::IoError, "cannot write ablation.csv");
    csv << "size,mean_success_rate,sd_success_rate\n";
    std::printf("%8s %18s %16s\n", "size", "mean_success_rate", "sd_success_rate");
    for (const AblationPoint& pt : curve) {
        csv << pt.size << ',' << pt.mean_success_rate << ',' << pt.sd_success_rate << '\n';
        std::printf("%8zu %18.4f %16.4f\n", pt.size, pt.mean_success_rate, pt.sd_success_rate);
    }
    return kExitOk;
}

int cmd_clutter(const GlobalOpts& g, const Pipeline& p, const std::string& model_path, int trials,
                int budget, const std::string& policy_name, int n_samples) {
    ExperimentSpec spec;
    spec.name = "clutter";
    spec.test_gripper = gripper_by_name("power_soft");
    spec.trials = trials;
    spec.attempt_budget = budget;
    spec.seeds = {g.seed};
    spec.camera = p.camera;

    ModelParams model;
    EvalPolicy policy = EvalPolicy::heuristic();
    if (!model_path.empty()) {
        model = load_model(model_path);
        if (policy_name == "sampled") {
            SampleConfig sc;
            sc.n_samples = n_samples;
            sc.crop_px = p.crop_px;
            policy = EvalPolicy::sampled(model, sc);
        } else {
            policy = EvalPolicy::dense(model);
        }
    }
    const BenchReport report = run_clutter_removal(spec, policy);
    emit_report(report, spec, g.out_dir + "/clutter");
    print_report(report);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grasplab: planar grasp-learning laboratory"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--preset", g.preset, "desk or paper scale")->capture_default_str();

    auto* collect_cmd = app.add_subcommand("collect", "run self-supervised data collection");
    std::string config_path, preset_tag, guided_model;
    collect_cmd->add_option("--config", config_path, "collection config JSON");
    collect_cmd->add_option("--preset-tag", preset_tag,
                            "named collection setup, e.g. 2Finger-RigidSoft-5K");
    collect_cmd->add_option("--guided-model", guided_model, "model path for guided presets");

    auto* train_cmd = app.add_subcommand("train", "train the angular-bin classifier");
    std::string dataset_dir, model_out = "model.bin";
    TrainConfig tc;
    train_cmd->add_option("--dataset", dataset_dir, "dataset directory")->required();
    train_cmd->add_option("--out", model_out, "output model path")->capture_default_str();
    train_cmd->add_option("--epochs", tc.epochs)->capture_default_str();
    train_cmd->add_option("--lr", tc.learning_rate)->capture_default_str();
    train_cmd->add_option("--batch", tc.batch_size)->capture_default_str();
    train_cmd->add_flag("--no-balance", [&tc](size_t) { tc.class_balance = false; },
                        "disable 1:1 class-balanced minibatches");

    auto* eval_cmd = app.add_subcommand("eval", "single-object robustness test");
    std::string model_path, test_id = "t4", eval_policy = "dense";
    int n_samples = 1000;
    eval_cmd->add_option("--model", model_path, "trained model")->required();
    eval_cmd->add_option("--test", test_id, "test preset t1..t7")->capture_default_str();
    eval_cmd->add_option("--policy", eval_policy, "dense or sampled")->capture_default_str();
    eval_cmd->add_option("--samples", n_samples, "sampled-policy candidates")->capture_default_str();

    auto* baseline_cmd = app.add_subcommand("baseline", "heuristic bounding-box baseline");
    std::string baseline_test = "t4";
    baseline_cmd->add_option("--test", baseline_test, "test preset t1..t7")->capture_default_str();

    auto* ablate_cmd = app.add_subcommand("ablate", "data-size ablation");
    std::string sizes_csv = "250,500,1000,2000,4000", seeds_csv, ablate_dataset;
    TrainConfig ablate_tc;
    ablate_cmd->add_option("--dataset", ablate_dataset, "mixed dataset directory")->required();
    ablate_cmd->add_option("--sizes", sizes_csv, "comma-separated sizes")->capture_default_str();
    ablate_cmd->add_option("--seeds", seeds_csv, "comma-separated training seeds");
    ablate_cmd->add_option("--epochs", ablate_tc.epochs)->capture_default_str();

    auto* clutter_cmd = app.add_subcommand("clutter", "clutter-removal full task");
    std::string clutter_model, clutter_policy = "dense";
    int trials = 5, budget = 20, clutter_samples = 1000;
    clutter_cmd->add_option("--model", clutter_model, "trained model (omit for the heuristic)");
    clutter_cmd->add_option("--trials", trials)->capture_default_str();
    clutter_cmd->add_option("--budget", budget)->capture_default_str();
    clutter_cmd->add_option("--policy", clutter_policy, "dense or sampled")->capture_default_str();
    clutter_cmd->add_option("--samples", clutter_samples)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        const Pipeline p = pipeline_for(g.preset);
        if (collect_cmd->parsed()) return cmd_collect(g, p, config_path, preset_tag, guided_model);
        if (train_cmd->parsed()) return cmd_train(g, p, dataset_dir, model_out, tc);
        if (eval_cmd->parsed()) return cmd_eval(g, p, model_path, test_id, eval_policy, n_samples);
        if (baseline_cmd->parsed()) return cmd_baseline(g, p, baseline_test);
        if (ablate_cmd->parsed())
            return cmd_ablate(g, p, ablate_dataset, sizes_csv, seeds_csv, ablate_tc);
        if (clutter_cmd->parsed())
            return cmd_clutter(g, p, clutter_model, trials, budget, clutter_policy, clutter_samples);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.code()) {
            case ErrorCode::IoError:
            case ErrorCode::ChecksumMismatch:
            case ErrorCode::VersionMismatch:
            case ErrorCode::ManifestMismatch:
                return kExitIo;
            default:
                return kExitConfig;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
