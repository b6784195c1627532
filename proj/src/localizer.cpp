#include "tofloc/localizer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "tofloc/io.hpp"

namespace tofloc {

namespace {

// child-stream tags under a trial seed
constexpr std::uint64_t kStreamSetup = 1;
constexpr std::uint64_t kStreamPf = 2;
constexpr std::uint64_t kStreamSensor = 16;

void dump_frames(const std::string& dir, int iteration, const std::vector<DepthFrame>& frames) {
    std::filesystem::create_directories(dir);
    for (const auto& frame : frames) {
        char name[48];
        std::snprintf(name, sizeof(name), "frame_%03d_s%d.txt", iteration, frame.sensor_id);
        std::ofstream os(std::filesystem::path(dir) / name);
        write_depth_frame(os, frame);
    }
}

void dump_particles(const std::string& dir, int iteration, const ParticleSet& set) {
    std::filesystem::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof(name), "particles_%03d.txt", iteration);
    std::ofstream os(std::filesystem::path(dir) / name);
    os.precision(17);
    for (const auto& p : set.particles)
        os << p.pose.x << ' ' << p.pose.y << ' ' << p.pose.gamma << ' ' << p.weight << '\n';
}

}  // namespace

std::vector<SensorMount> default_sensor_rig(double azimuth_offset, double radial_offset,
                                            double pitch) {
    std::vector<SensorMount> rig;
    for (int i = 0; i < 3; ++i) {
        const double psi = azimuth_offset + i * 2.0 * kPi / 3.0;
        SensorMount m;
        m.id = i;
        m.pose_in_tip.rotation = rot_z(psi) * rot_y(kPi / 2.0 + pitch);
        m.pose_in_tip.translation =
            Eigen::Vector3d(radial_offset * std::cos(psi), radial_offset * std::sin(psi), 0.0);
        rig.push_back(m);
    }
    return rig;
}

std::vector<SensorChannel> make_sensor_channels(const TrialConfig& cfg, std::uint64_t trial_seed) {
    std::vector<SensorChannel> channels;
    channels.reserve(cfg.rig.size());
    for (std::size_t i = 0; i < cfg.rig.size(); ++i) {
        SensorChannel ch{RngStream(derive_seed(trial_seed, kStreamSensor, i)), 0.0};
        ch.range_bias = ch.rng.normal(0.0, cfg.noise.bias_fraction);
        channels.push_back(ch);
    }
    return channels;
}

PointCloud acquire_sample(const TrialContext& ctx, const TrialConfig& cfg,
                          const PressureCommand& cmd, std::vector<SensorChannel>& channels,
                          std::vector<DepthFrame>* frames_out) {
    if (!ctx.map || !ctx.map_index) throw std::invalid_argument("acquire_sample: missing map");
    if (channels.size() != cfg.rig.size())
        throw std::invalid_argument("acquire_sample: one channel per sensor required");

    const Pose3 true_base = pose2_to_pose3(cfg.true_base_pose, cfg.z_offset);
    const Pose3 true_tip = synthetic_tip_pose(cmd, ctx.arm);
    Pose3 assumed_tip = true_tip;
    if (cfg.tip_source == TipPoseSource::KnnModel) {
        if (!ctx.knn) throw std::invalid_argument("acquire_sample: knn model required");
        assumed_tip = ctx.knn->predict(cmd);
    }
    const Aabb box = cfg.crop_box.value_or(inflate(ctx.map->bounds(), cfg.voxel.voxel_size));

    PointCloud out(Frame::Base);
    for (std::size_t i = 0; i < cfg.rig.size(); ++i) {
        const SensorMount& mount = cfg.rig[i];
        const Pose3 true_sensor = true_base.compose(true_tip).compose(mount.pose_in_tip);
        const Pose3 assumed_sensor = assumed_tip.compose(mount.pose_in_tip);

        DepthFrame frame = simulate_frame(*ctx.map, true_sensor, cfg.intrinsics, cfg.noise,
                                          channels[i].rng, channels[i].range_bias);
        frame.sensor_id = mount.id;
        const PointCloud pts = depth_to_points(frame, cfg.intrinsics);
        if (frames_out) frames_out->push_back(frame);
        for (const auto& p : pts.points) {
            // crop against the physical location; the simulator knows the true chain
            if (box.contains(true_sensor.apply(p))) out.points.push_back(assumed_sensor.apply(p));
        }
    }
    return out;
}

TrialResult run_trial(const TrialContext& ctx, const TrialConfig& cfg) {
    if (cfg.n_samples < 1) throw std::invalid_argument("run_trial: n_samples must be >= 1");

    RngStream setup_rng(derive_seed(cfg.seed, kStreamSetup));
    RngStream pf_rng(derive_seed(cfg.seed, kStreamPf));
    std::vector<SensorChannel> channels = make_sensor_channels(cfg, cfg.seed);

    PfConfig pf = cfg.pf;
    pf.init_center = cfg.true_base_pose;  // prior centered on the true pose
    if (cfg.vary_init_dev) {
        pf.init_dev_pos = setup_rng.uniform_open_closed(cfg.pf.init_dev_pos);
        pf.init_dev_ang = setup_rng.uniform_open_closed(cfg.pf.init_dev_ang);
    }

    std::vector<PressureCommand> postures = cfg.postures;
    if (postures.empty()) {
        if (!ctx.dataset || ctx.dataset->empty())
            throw std::invalid_argument("run_trial: no postures and no dataset to draw from");
        if (static_cast<std::size_t>(cfg.n_samples) > ctx.dataset->size())
            throw std::invalid_argument("run_trial: n_samples exceeds dataset size");
        // partial Fisher-Yates: first n_samples entries drawn without replacement
        std::vector<std::size_t> idx(ctx.dataset->size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (int i = 0; i < cfg.n_samples; ++i) {
            const std::size_t j = i + setup_rng.index(idx.size() - static_cast<std::size_t>(i));
            std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
            postures.push_back((*ctx.dataset)[idx[static_cast<std::size_t>(i)]].command);
        }
    } else if (postures.size() < static_cast<std::size_t>(cfg.n_samples)) {
        throw std::invalid_argument("run_trial: fewer postures than n_samples");
    }

    ParticleSet particles = init_particles(pf, pf_rng);
    PointCloud accumulated(Frame::Base);
    TrialResult result;

    for (int k = 1; k <= cfg.n_samples; ++k) {
        std::vector<DepthFrame> frames;
        const PointCloud sample =
            acquire_sample(ctx, cfg, postures[static_cast<std::size_t>(k - 1)], channels,
                           cfg.frame_dump_dir.empty() ? nullptr : &frames);
        if (!cfg.frame_dump_dir.empty()) dump_frames(cfg.frame_dump_dir, k, frames);

        PointCloud scored(Frame::Base);
        if (cfg.pipeline_order == PipelineOrder::MergeThenDownsample) {
            accumulated = merge(accumulated, sample);
            scored = voxel_downsample(accumulated, cfg.voxel);
        } else {
            accumulated = merge(accumulated, voxel_downsample(sample, cfg.voxel));
            scored = accumulated;
        }
        if (cfg.score_source == ScoreSource::PerSample) scored = voxel_downsample(sample, cfg.voxel);

        WeightUpdate upd =
            update_weights(particles, scored, *ctx.map_index, cfg.score, cfg.z_offset);
        particles = std::move(upd.set);

        IterationStats stats;
        stats.k = k;
        stats.sample_points = sample.size();
        stats.merged_points = accumulated.size();
        stats.scored_points = scored.size();
        stats.mean_score = upd.mean_score;
        stats.max_score = upd.max_score;
        stats.degenerate = upd.degenerate;
        stats.skipped = upd.skipped;
        result.iterations.push_back(stats);

        if (!cfg.particle_dump_dir.empty()) dump_particles(cfg.particle_dump_dir, k, particles);

        if (k < cfg.n_samples) particles = resample(particles, pf, pf_rng);
    }

    result.estimate = estimate(particles);
    result.e_x = std::hypot(result.estimate.x - cfg.true_base_pose.x,
                            result.estimate.y - cfg.true_base_pose.y);
    result.e_gamma = angular_distance(result.estimate.gamma, cfg.true_base_pose.gamma);
    return result;
}

}  // namespace tofloc
