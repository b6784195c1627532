// Command-line experiment runner: full studies, single trials, reconstruction
// exports, regressor cross-validation, and map export.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tofloc/config.hpp"
#include "tofloc/io.hpp"
#include "tofloc/study.hpp"

namespace {

using namespace tofloc;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value pairs
    std::string out_dir;
    std::string mode;
    std::string samples;
    int trials = -1;
    double noise = -1.0;
    long long seed = -1;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "settings file (key = value lines)");
    cmd->add_option("--set", args.overrides, "extra key=value override (repeatable)");
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--mode", args.mode, "tip-pose source: knn|truth|both");
    cmd->add_option("--samples", args.samples, "sample counts (study: list, else single)");
    cmd->add_option("--trials", args.trials, "trials per sample count");
    cmd->add_option("--noise", args.noise, "range noise sigma as a fraction of distance");
    cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
}

StudyConfig assemble(const CommonArgs& args, bool samples_is_list) {
    StudyConfig cfg;
    if (!args.config_path.empty()) load_config_file(cfg, args.config_path);
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(args.seed);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (!args.mode.empty()) apply_setting(cfg, "study.mode", args.mode);
    if (!args.samples.empty()) {
        if (samples_is_list)
            cfg.sample_counts = parse_int_list("--samples", args.samples);
        else
            apply_setting(cfg, "trial.samples", args.samples);
    }
    if (args.trials >= 0) cfg.trials_per_count = args.trials;
    if (args.noise >= 0.0) cfg.trial.noise.sigma_fraction = args.noise;
    if (args.threads >= 0) cfg.threads = args.threads;
    return cfg;
}

void print_summary(const StudySummary& summary) {
    std::printf("%-6s %-4s %7s %12s %12s %14s %14s\n", "mode", "k", "trials", "mean_e_x[m]",
                "std_e_x[m]", "mean_e_g[deg]", "std_e_g[deg]");
    auto print_row = [](const ConditionStats& c) {
        const std::string k = c.sample_count < 0 ? "all" : std::to_string(c.sample_count);
        std::printf("%-6s %-4s %7d %12.4f %12.4f %14.3f %14.3f\n", format_mode(c.mode).c_str(),
                    k.c_str(), c.trials, c.mean_ex, c.std_ex, c.mean_eg_deg, c.std_eg_deg);
    };
    for (const auto& c : summary.conditions) print_row(c);
    for (const auto& g : summary.grand) print_row(g);
}

int cmd_study(const CommonArgs& args) {
    StudyConfig cfg = assemble(args, true);
    const StudySummary summary = run_study(cfg);
    print_summary(summary);
    if (cfg.run_knn && cfg.run_truth) {
        const ModeComparison cmp = compare_modes(summary);
        std::printf("\nmode comparison (mean e_x):\n");
        std::printf("%-4s %12s %12s %10s %8s %s\n", "k", "knn[m]", "truth[m]", "|delta|", "t",
                    "flag");
        for (const auto& row : cmp.rows)
            std::printf("%-4d %12.4f %12.4f %10.4f %8.2f %s\n", row.sample_count, row.mean_ex_knn,
                        row.mean_ex_truth, row.abs_delta, row.welch_t,
                        row.flagged ? "DELTA>0.01m" : "");
        std::printf("grand |delta| = %.4f m\n", cmp.grand_delta);
    }
    std::printf("\nwall time: %.1f s\noutputs in %s: trials.csv summary.csv errors.svg\n",
                summary.wall_seconds, cfg.out_dir.c_str());
    return 0;
}

int cmd_trial(const CommonArgs& args, const std::string& dump_dir,
              const std::string& frames_dir) {
    StudyConfig cfg = assemble(args, false);
    StudyWorkspace ws = build_workspace(cfg);
    TrialConfig tc = ws.base_trial;
    tc.seed = derive_seed(cfg.master_seed, kSeedTagTrial, static_cast<std::uint64_t>(tc.n_samples), 0);
    if (cfg.run_knn && !cfg.run_truth) tc.tip_source = TipPoseSource::KnnModel;
    if (cfg.run_truth && !cfg.run_knn) tc.tip_source = TipPoseSource::GroundTruth;
    tc.particle_dump_dir = dump_dir;
    tc.frame_dump_dir = frames_dir;

    const TrialResult result = run_trial(ws.context(), tc);
    std::printf("%-3s %8s %8s %8s %12s %12s %s\n", "k", "sample", "merged", "scored", "mean_score",
                "max_score", "flags");
    for (const auto& it : result.iterations)
        std::printf("%-3d %8zu %8zu %8zu %12.4f %12.4f %s%s\n", it.k, it.sample_points,
                    it.merged_points, it.scored_points, it.mean_score, it.max_score,
                    it.degenerate ? "degenerate " : "", it.skipped ? "skipped" : "");
    std::printf("\ntrue pose:  x=%.4f m  y=%.4f m  gamma=%.3f deg\n", tc.true_base_pose.x,
                tc.true_base_pose.y, rad2deg(tc.true_base_pose.gamma));
    std::printf("estimate:   x=%.4f m  y=%.4f m  gamma=%.3f deg\n", result.estimate.x,
                result.estimate.y, rad2deg(result.estimate.gamma));
    std::printf("errors:     e_x=%.4f m  e_gamma=%.3f deg\n", result.e_x, rad2deg(result.e_gamma));
    return 0;
}

int cmd_reconstruct(const CommonArgs& args, int k_samples) {
    StudyConfig cfg = assemble(args, false);
    StudyWorkspace ws = build_workspace(cfg);
    TrialConfig tc = ws.base_trial;
    tc.seed = derive_seed(cfg.master_seed, kSeedTagTrial, static_cast<std::uint64_t>(k_samples), 0);
    export_reconstruction(ws.context(), tc, k_samples, cfg.out_dir);
    std::printf("wrote reconstruction_k%d.txt and map.txt to %s\n", k_samples, cfg.out_dir.c_str());
    return 0;
}

int cmd_knn_cv(const CommonArgs& args, int k_max) {
    StudyConfig cfg = assemble(args, false);
    const auto dataset = generate_dataset(cfg.dataset, cfg.arm, derive_seed(cfg.master_seed, kSeedTagDataset));
    std::printf("dataset: %zu postures\n", dataset.size());

    std::vector<int> candidates;
    for (int k = 1; k <= k_max; ++k) candidates.push_back(k);
    const CvResult cv =
        kfold_select_k(dataset, cfg.knn_folds, candidates, derive_seed(cfg.master_seed, kSeedTagCv));
    std::printf("%-4s %14s\n", "k", "cv_mse[m^2]");
    for (const auto& [k, mse] : cv.mse_by_k) std::printf("%-4d %14.6e\n", k, mse);
    std::printf("best k = %d (%d-fold cross-validation)\n", cv.best_k, cfg.knn_folds);

    const auto [train, val] =
        train_validation_split(dataset, 0.8, derive_seed(cfg.master_seed, kSeedTagSplit));
    const KnnModel model(train, cv.best_k);
    std::printf("80/20 split with k=%d: train MSE %.6e m^2, validation MSE %.6e m^2\n", cv.best_k,
                position_mse(model, train), position_mse(model, val));
    return 0;
}

int cmd_map(const CommonArgs& args) {
    StudyConfig cfg = assemble(args, false);
    const EnvironmentMap map = build_cuboid_map(cfg.env.dims, cfg.env.open_faces,
                                                cfg.env.map_points, derive_seed(cfg.master_seed, kSeedTagMap));
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = (std::filesystem::path(cfg.out_dir) / "map.txt").string();
    write_point_list(path, map.model_cloud);
    std::printf("wrote %zu map points to %s\n", map.model_cloud.size(), path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soft-arm self-localization testbed: simulated multizone ToF sensing,"
                 " point-cloud reconstruction, and particle-filter pose estimation"};
    app.require_subcommand(1);

    CommonArgs study_args, trial_args, rec_args, cv_args, map_args;
    std::string dump_dir, frames_dir;
    int rec_samples = 50;
    int cv_kmax = 15;

    CLI::App* study = app.add_subcommand("study", "run the full sample-count x trials grid");
    add_common(study, study_args);

    CLI::App* trial = app.add_subcommand("trial", "run one localization trial, verbose");
    add_common(trial, trial_args);
    trial->add_option("--dump-particles", dump_dir, "directory for per-iteration particle dumps");
    trial->add_option("--dump-frames", frames_dir, "directory for raw depth-frame dumps");

    CLI::App* rec = app.add_subcommand("reconstruct", "export a merged reconstruction point list");
    add_common(rec, rec_args);
    rec->add_option("--k", rec_samples, "number of merged samples")->capture_default_str();

    CLI::App* cv = app.add_subcommand("knn-cv", "cross-validate the pressure->pose regressor");
    add_common(cv, cv_args);
    cv->add_option("--k-max", cv_kmax, "largest neighbor count to try")->capture_default_str();

    CLI::App* map_cmd = app.add_subcommand("map", "export the environment model point list");
    add_common(map_cmd, map_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (study->parsed()) return cmd_study(study_args);
        if (trial->parsed()) return cmd_trial(trial_args, dump_dir, frames_dir);
        if (rec->parsed()) return cmd_reconstruct(rec_args, rec_samples);
        if (cv->parsed()) return cmd_knn_cv(cv_args, cv_kmax);
        if (map_cmd->parsed()) return cmd_map(map_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
