#include "tofloc/tof_sensor.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace tofloc {

int DepthFrame::valid_count() const {
    int n = 0;
    for (double r : ranges)
        if (std::isfinite(r)) ++n;
    return n;
}

std::vector<Eigen::Vector3d> zone_directions(const SensorIntrinsics& intr) {
    if (intr.rows != 8 || intr.cols != 8)
        throw std::invalid_argument("zone_directions: expected an 8x8 device");
    if (!(intr.diagonal_fov > 0.0 && intr.diagonal_fov < kPi))
        throw std::invalid_argument("zone_directions: diagonal_fov out of (0, pi)");

    const double tan_a = std::tan(intr.diagonal_fov / 2.0) / std::sqrt(2.0);
    std::vector<Eigen::Vector3d> dirs;
    dirs.reserve(static_cast<std::size_t>(intr.rows) * intr.cols);
    for (int r = 0; r < intr.rows; ++r) {
        for (int c = 0; c < intr.cols; ++c) {
            const double u = (c + 0.5) / intr.cols * 2.0 - 1.0;
            const double v = (r + 0.5) / intr.rows * 2.0 - 1.0;
            dirs.push_back(Eigen::Vector3d(u * tan_a, v * tan_a, 1.0).normalized());
        }
    }
    return dirs;
}

DepthFrame simulate_frame(const EnvironmentMap& map, const Pose3& sensor_pose_in_map,
                          const SensorIntrinsics& intr, const NoiseModel& noise, RngStream& rng,
                          double range_bias) {
    if (noise.common_fraction < 0.0 || noise.common_fraction > 1.0)
        throw std::invalid_argument("simulate_frame: common_fraction out of [0, 1]");
    const auto dirs = zone_directions(intr);
    DepthFrame frame(intr.rows, intr.cols);

    const double common_sigma = noise.sigma_fraction * std::sqrt(noise.common_fraction);
    const double zone_sigma = noise.sigma_fraction * std::sqrt(1.0 - noise.common_fraction);
    const double eps_frame = rng.normal(0.0, common_sigma);

    for (std::size_t z = 0; z < dirs.size(); ++z) {
        const Eigen::Vector3d dir_map = sensor_pose_in_map.rotation * dirs[z];
        const auto hit = ray_cast(map, sensor_pose_in_map.translation, dir_map, intr.max_range);
        const double drop = rng.uniform();
        if (!hit || drop < noise.dropout_prob) continue;  // stays NaN
        double r;
        if (noise.outlier_prob > 0.0 && rng.uniform() < noise.outlier_prob) {
            r = rng.uniform_open_closed(intr.max_range);
        } else {
            r = hit->distance * (1.0 + range_bias + eps_frame + rng.normal(0.0, zone_sigma));
        }
        frame.ranges[z] = std::clamp(r, 1e-6, intr.max_range);
    }
    return frame;
}

PointCloud depth_to_points(const DepthFrame& frame, const SensorIntrinsics& intr) {
    const auto dirs = zone_directions(intr);
    if (dirs.size() != frame.ranges.size())
        throw std::invalid_argument("depth_to_points: frame/intrinsics shape mismatch");
    PointCloud cloud(Frame::Sensor);
    for (std::size_t z = 0; z < dirs.size(); ++z) {
        const double r = frame.ranges[z];
        if (std::isfinite(r)) cloud.points.push_back(r * dirs[z]);
    }
    return cloud;
}

void write_depth_frame(std::ostream& os, const DepthFrame& frame) {
    for (int r = 0; r < frame.rows; ++r) {
        for (int c = 0; c < frame.cols; ++c) {
            if (c) os << ' ';
            const double v = frame.at(r, c);
            if (std::isfinite(v))
                os << v;
            else
                os << "nan";
        }
        os << '\n';
    }
}

}  // namespace tofloc
