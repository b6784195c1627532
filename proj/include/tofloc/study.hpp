#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tofloc/localizer.hpp"

namespace tofloc {

// child-stream tags under the master seed
inline constexpr std::uint64_t kSeedTagMap = 101;
inline constexpr std::uint64_t kSeedTagDataset = 102;
inline constexpr std::uint64_t kSeedTagTrial = 103;
inline constexpr std::uint64_t kSeedTagCv = 104;
inline constexpr std::uint64_t kSeedTagSplit = 105;

struct EnvironmentConfig {
    Eigen::Vector3d dims = kDefaultCuboidDims;
    std::vector<Face> open_faces = kDefaultOpenFaces;
    int map_points = kDefaultMapPointCount;
};

struct RigConfig {
    double azimuth_offset = deg2rad(90.0);
    double radial_offset = 0.02;  // m
    double pitch = 0.0;           // rad, positive tilts below horizontal
};

// Full experiment description: environment, data collection, regressor, and
// the study grid (sample counts x trials x tip-pose modes).
struct StudyConfig {
    EnvironmentConfig env;
    DatasetSpec dataset;
    std::string dataset_file;  // nonempty: load recorded samples instead of generating
    ArmParams arm;
    int knn_k = 6;
    int knn_folds = 5;
    RigConfig rig;
    TrialConfig trial;  // base trial settings; n_samples/tip_source/seed set per job
    std::vector<int> sample_counts = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int trials_per_count = 50;
    bool run_knn = true;
    bool run_truth = true;
    std::string out_dir = "out";
    std::uint64_t master_seed = 1;
    int threads = 0;  // 0: hardware concurrency
};

// Everything trials share: the map and its index, the dataset, the fitted model.
struct StudyWorkspace {
    EnvironmentMap map;
    std::unique_ptr<NnIndex> map_index;
    std::vector<TipSample> dataset;
    std::unique_ptr<KnnModel> knn;
    ArmParams arm;
    TrialConfig base_trial;

    TrialContext context() const { return {&map, map_index.get(), &dataset, knn.get(), arm}; }
};

StudyWorkspace build_workspace(const StudyConfig& cfg);

struct TrialRecord {
    TipPoseSource mode;
    int sample_count = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double e_x = 0.0;            // m
    double e_gamma = 0.0;        // rad
    double final_score_mean = 0.0;
};

struct ConditionStats {
    TipPoseSource mode;
    int sample_count = 0;  // -1 for the per-mode grand row
    int trials = 0;
    double mean_ex = 0.0, std_ex = 0.0;
    double mean_eg_deg = 0.0, std_eg_deg = 0.0;
};

struct StudySummary {
    std::vector<TrialRecord> records;      // ordered by (mode, k, trial)
    std::vector<ConditionStats> conditions;
    std::vector<ConditionStats> grand;     // one row per mode
    double wall_seconds = 0.0;
};

// Run the whole grid and write trials.csv, summary.csv, and errors.svg into
// cfg.out_dir. Fails before any compute if the output directory is unusable.
// Trial seeds do not depend on the tip-pose mode, so the two modes see
// identical measurements and differ only in the assumed tip poses.
StudySummary run_study(const StudyConfig& cfg);

const ConditionStats* find_condition(const StudySummary& s, TipPoseSource mode, int k);
const ConditionStats* find_grand(const StudySummary& s, TipPoseSource mode);

struct ModeComparisonRow {
    int sample_count = 0;
    double mean_ex_knn = 0.0, mean_ex_truth = 0.0;
    double abs_delta = 0.0;
    double welch_t = 0.0;
    bool flagged = false;  // |delta| > 0.01 m
};

struct ModeComparison {
    std::vector<ModeComparisonRow> rows;
    double grand_delta = 0.0;
};

// Per-k difference between the two tip-pose modes. Throws if the summary does
// not contain both.
ModeComparison compare_modes(const StudySummary& summary);

std::string format_mode(TipPoseSource mode);

// Render the per-k mean +/- std bars for each mode and metric.
void write_error_chart(const std::string& path, const StudySummary& summary);

// Accumulate n_samples postures (no filtering step) and write the merged cloud
// and the map as point lists for overlay plots. The cloud file is in the map
// frame via the true base pose.
void export_reconstruction(const TrialContext& ctx, const TrialConfig& cfg, int n_samples,
                           const std::string& out_dir);

}  // namespace tofloc
