#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tofloc/arm_model.hpp"
#include "tofloc/cloud_pipeline.hpp"
#include "tofloc/environment.hpp"
#include "tofloc/particle_filter.hpp"
#include "tofloc/registration.hpp"
#include "tofloc/tof_sensor.hpp"

namespace tofloc {

// Where the tip pose used to assemble clouds in the base frame comes from:
// the pressure->pose regressor, or the simulator's exact tip pose.
enum class TipPoseSource { KnnModel, GroundTruth };

// Score particles against the accumulated (merged, downsampled) cloud, or
// against the current sample only.
enum class ScoreSource { MergedCloud, PerSample };

// Whether downsampling happens on the merged cloud each iteration or on each
// sample before it is merged.
enum class PipelineOrder { MergeThenDownsample, DownsampleThenMerge };

struct SensorMount {
    Pose3 pose_in_tip;
    int id = 0;
};

// Three sensors spaced 120 degrees around the tip axis, optical axes radially
// outward; pitch > 0 tilts them below the horizontal.
std::vector<SensorMount> default_sensor_rig(double azimuth_offset = deg2rad(90.0),
                                            double radial_offset = 0.02, double pitch = 0.0);

struct TrialConfig {
    Pose2 true_base_pose{0.0, 0.0, 0.0};
    double z_offset = 0.2;  // known base mounting height
    int n_samples = 10;
    TipPoseSource tip_source = TipPoseSource::KnnModel;
    ScoreSource score_source = ScoreSource::MergedCloud;
    PipelineOrder pipeline_order = PipelineOrder::MergeThenDownsample;
    // Draw the actual prior deviations per trial, uniform over (0, configured value].
    bool vary_init_dev = true;
    std::vector<PressureCommand> postures;  // empty: drawn from the dataset, seeded
    std::vector<SensorMount> rig = default_sensor_rig();
    SensorIntrinsics intrinsics;
    NoiseModel noise;
    PfConfig pf;
    ScoreParams score;
    VoxelGrid voxel;
    std::optional<Aabb> crop_box;    // default: map bounds inflated by one voxel
    std::string particle_dump_dir;   // empty: no per-iteration dump
    std::string frame_dump_dir;      // empty: no raw depth-frame dump
    std::uint64_t seed = 0;
};

struct IterationStats {
    int k = 0;
    std::size_t sample_points = 0;
    std::size_t merged_points = 0;
    std::size_t scored_points = 0;
    double mean_score = 0.0;
    double max_score = 0.0;
    bool degenerate = false;
    bool skipped = false;
};

struct TrialResult {
    Pose2 estimate;
    double e_x = 0.0;      // m, planar norm
    double e_gamma = 0.0;  // rad, wrapped absolute difference, in [0, pi]
    std::vector<IterationStats> iterations;
};

// Shared immutable inputs for a batch of trials.
struct TrialContext {
    const EnvironmentMap* map = nullptr;
    const NnIndex* map_index = nullptr;
    const std::vector<TipSample>* dataset = nullptr;
    const KnnModel* knn = nullptr;
    ArmParams arm;
};

// One simulated device: its noise stream plus the systematic gain offset it
// keeps for the whole trial.
struct SensorChannel {
    RngStream rng;
    double range_bias = 0.0;
};

// One channel per rig sensor; the bias is the first draw of the channel stream,
// scaled by noise.bias_fraction.
std::vector<SensorChannel> make_sensor_channels(const TrialConfig& cfg, std::uint64_t trial_seed);

// Simulate one posture: cast frames from the true sensor poses, convert to
// points, assemble in the base frame using the configured tip-pose source, and
// crop against the map box. Returned cloud is in the base frame. When
// frames_out is given, the raw depth frames are appended to it.
PointCloud acquire_sample(const TrialContext& ctx, const TrialConfig& cfg,
                          const PressureCommand& cmd, std::vector<SensorChannel>& channels,
                          std::vector<DepthFrame>* frames_out = nullptr);

// One full localization run: init particles, then for each sample merge,
// downsample, weight, resample (skipped after the final update), and estimate.
TrialResult run_trial(const TrialContext& ctx, const TrialConfig& cfg);

}  // namespace tofloc
