#include <doctest.h>

#include <cmath>

#include "tofloc/localizer.hpp"
#include "tofloc/study.hpp"

using namespace tofloc;

namespace {

StudyConfig quick_config() {
    StudyConfig cfg;
    cfg.env.map_points = 2000;
    cfg.master_seed = 2024;
    return cfg;
}

void zero_noise(StudyConfig& cfg) {
    cfg.trial.noise.sigma_fraction = 0.0;
    cfg.trial.noise.bias_fraction = 0.0;
}

double face_distance(const EnvironmentMap& map, const Eigen::Vector3d& p) {
    double best = 1e9;
    for (const auto& f : map.surfaces) {
        if (p[f.u_axis] < f.u_lo - 1e-9 || p[f.u_axis] > f.u_hi + 1e-9) continue;
        if (p[f.v_axis] < f.v_lo - 1e-9 || p[f.v_axis] > f.v_hi + 1e-9) continue;
        best = std::min(best, std::abs(p[f.axis] - f.coord));
    }
    return best;
}

}  // namespace

TEST_SUITE("localizer") {

TEST_CASE("default rig points the optical axes outward and level") {
    const auto rig = default_sensor_rig(0.0, 0.02, 0.0);
    REQUIRE(rig.size() == 3);
    for (std::size_t i = 0; i < rig.size(); ++i) {
        const Eigen::Vector3d axis = rig[i].pose_in_tip.rotation * Eigen::Vector3d::UnitZ();
        CHECK(std::abs(axis.z()) < 1e-12);  // level
        const Eigen::Vector3d radial = rig[i].pose_in_tip.translation.normalized();
        CHECK(axis.dot(radial) == doctest::Approx(1.0).epsilon(1e-12));  // outward
        CHECK(rig[i].pose_in_tip.is_rigid());
    }
    // 120 degrees apart
    const Eigen::Vector3d a0 = rig[0].pose_in_tip.rotation * Eigen::Vector3d::UnitZ();
    const Eigen::Vector3d a1 = rig[1].pose_in_tip.rotation * Eigen::Vector3d::UnitZ();
    CHECK(a0.dot(a1) == doctest::Approx(std::cos(2.0 * kPi / 3.0)).epsilon(1e-12));
}

TEST_CASE("noiseless samples land on closed faces and stay within the size cap") {
    StudyConfig cfg = quick_config();
    zero_noise(cfg);
    cfg.trial.tip_source = TipPoseSource::GroundTruth;
    const StudyWorkspace ws = build_workspace(cfg);
    const TrialContext ctx = ws.context();

    TrialConfig tc = ws.base_trial;
    tc.tip_source = TipPoseSource::GroundTruth;
    std::vector<SensorChannel> channels = make_sensor_channels(tc, 9);

    const PressureCommand cmd{9.0, 3.0, 0.0};
    const PointCloud sample = acquire_sample(ctx, tc, cmd, channels);
    CHECK(sample.frame == Frame::Base);
    CHECK(sample.size() <= 192);
    CHECK(sample.size() > 30);

    const Pose3 base = pose2_to_pose3(tc.true_base_pose, tc.z_offset);
    for (const auto& p : sample.points) CHECK(face_distance(ws.map, base.apply(p)) < 1e-9);
}

TEST_CASE("knn-assembled clouds differ from truth-assembled ones by the rigid-chain bound") {
    StudyConfig cfg = quick_config();
    zero_noise(cfg);
    const StudyWorkspace ws = build_workspace(cfg);
    const TrialContext ctx = ws.context();
    const PressureCommand cmd = ws.dataset[321].command;

    TrialConfig tc = ws.base_trial;
    tc.tip_source = TipPoseSource::GroundTruth;
    std::vector<SensorChannel> channels_a = make_sensor_channels(tc, 5);
    std::vector<SensorChannel> channels_b = make_sensor_channels(tc, 5);
    const PointCloud truth_cloud = acquire_sample(ctx, tc, cmd, channels_a);
    tc.tip_source = TipPoseSource::KnnModel;
    const PointCloud knn_cloud = acquire_sample(ctx, tc, cmd, channels_b);

    REQUIRE(truth_cloud.size() == knn_cloud.size());  // same measurements, same crop
    const Pose3 true_tip = synthetic_tip_pose(cmd, ws.arm);
    const Pose3 knn_tip = ws.knn->predict(cmd);
    const double dt = (true_tip.translation - knn_tip.translation).norm();
    const double dr = (true_tip.rotation - knn_tip.rotation).norm();  // Frobenius
    for (std::size_t i = 0; i < truth_cloud.size(); ++i) {
        const double moved = (truth_cloud.points[i] - knn_cloud.points[i]).norm();
        // the sensor-frame point has norm <= max_range + mount offset
        const double reach = 4.0 + 0.02;
        CHECK(moved <= dt + dr * reach + 1e-9);
    }
}

TEST_CASE("filter pinned at the truth reports near-zero errors") {
    StudyConfig cfg = quick_config();
    zero_noise(cfg);
    const StudyWorkspace ws = build_workspace(cfg);

    TrialConfig tc = ws.base_trial;
    tc.tip_source = TipPoseSource::GroundTruth;
    tc.n_samples = 3;
    tc.vary_init_dev = false;
    tc.pf.init_dev_pos = 0.0;
    tc.pf.init_dev_ang = 0.0;
    tc.pf.jitter_pos = 0.0;
    tc.pf.jitter_ang = 0.0;
    tc.pf.particle_count = 50;
    tc.seed = 31;

    const TrialResult r = run_trial(ws.context(), tc);
    CHECK(r.e_x < 1e-9);
    CHECK(r.e_gamma < 1e-9);
}

TEST_CASE("trials are bit-reproducible for an identical config") {
    StudyConfig cfg = quick_config();
    const StudyWorkspace ws = build_workspace(cfg);
    TrialConfig tc = ws.base_trial;
    tc.n_samples = 3;
    tc.pf.particle_count = 150;
    tc.seed = 77;

    const TrialResult a = run_trial(ws.context(), tc);
    const TrialResult b = run_trial(ws.context(), tc);
    CHECK(a.estimate.x == b.estimate.x);
    CHECK(a.estimate.y == b.estimate.y);
    CHECK(a.estimate.gamma == b.estimate.gamma);
    CHECK(a.e_x == b.e_x);
    CHECK(a.e_gamma == b.e_gamma);
    REQUIRE(a.iterations.size() == b.iterations.size());
    for (std::size_t i = 0; i < a.iterations.size(); ++i)
        CHECK(a.iterations[i].mean_score == b.iterations[i].mean_score);
}

TEST_CASE("a perfect regressor makes both tip-pose modes identical") {
    StudyConfig cfg = quick_config();
    cfg.dataset.record_noise_pos = 0.0;
    cfg.dataset.record_noise_ang = 0.0;
    cfg.knn_k = 1;  // exact lookup at training commands
    const StudyWorkspace ws = build_workspace(cfg);

    TrialConfig tc = ws.base_trial;
    tc.n_samples = 2;
    tc.pf.particle_count = 100;
    tc.seed = 55;

    tc.tip_source = TipPoseSource::KnnModel;
    const TrialResult knn = run_trial(ws.context(), tc);
    tc.tip_source = TipPoseSource::GroundTruth;
    const TrialResult truth = run_trial(ws.context(), tc);

    CHECK(knn.estimate.x == truth.estimate.x);
    CHECK(knn.estimate.y == truth.estimate.y);
    CHECK(knn.estimate.gamma == truth.estimate.gamma);
}

TEST_CASE("per-sample scoring and downsample-first merging are usable modes") {
    StudyConfig cfg = quick_config();
    const StudyWorkspace ws = build_workspace(cfg);

    TrialConfig tc = ws.base_trial;
    tc.n_samples = 3;
    tc.pf.particle_count = 120;
    tc.seed = 91;

    tc.score_source = ScoreSource::PerSample;
    const TrialResult per_sample = run_trial(ws.context(), tc);
    for (const auto& it : per_sample.iterations) {
        CHECK(it.scored_points <= it.sample_points);  // only the current sample is scored
        CHECK(it.merged_points >= it.sample_points);
    }
    const TrialResult per_sample_again = run_trial(ws.context(), tc);
    CHECK(per_sample.estimate.x == per_sample_again.estimate.x);

    tc.score_source = ScoreSource::MergedCloud;
    tc.pipeline_order = PipelineOrder::DownsampleThenMerge;
    const TrialResult downsample_first = run_trial(ws.context(), tc);
    REQUIRE(downsample_first.iterations.size() == 3);
    // accumulated cloud already holds per-sample downsampled points
    CHECK(downsample_first.iterations.back().scored_points ==
          downsample_first.iterations.back().merged_points);
    CHECK(downsample_first.e_x < 0.5);
}

TEST_CASE("orientation error is symmetric and bounded by pi") {
    CHECK(angular_distance(0.3, -0.2) == angular_distance(-0.2, 0.3));
    CHECK(angular_distance(kPi - 0.01, -kPi + 0.01) == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(angular_distance(2.5, -2.5) <= kPi);
}

TEST_CASE("noiseless convergence reaches voxel-level accuracy") {
    StudyConfig cfg = quick_config();
    zero_noise(cfg);
    const StudyWorkspace ws = build_workspace(cfg);

    TrialConfig tc = ws.base_trial;
    tc.tip_source = TipPoseSource::GroundTruth;
    tc.n_samples = 10;
    tc.seed = 2;

    const TrialResult r = run_trial(ws.context(), tc);
    CHECK(r.e_x <= 0.05);
}

}  // TEST_SUITE
