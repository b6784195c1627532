#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace tofloc {

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wrap an angle to (-pi, pi].
double wrap_angle(double angle);

// |wrapped difference| between two angles, in [0, pi].
double angular_distance(double a, double b);

Eigen::Matrix3d rot_z(double angle);
Eigen::Matrix3d rot_y(double angle);

// Planar pose: position on the horizontal plane plus rotation about the vertical axis.
// gamma is stored wrapped to (-pi, pi].
struct Pose2 {
    double x = 0.0;      // m
    double y = 0.0;      // m
    double gamma = 0.0;  // rad

    Pose2() = default;
    Pose2(double x_, double y_, double gamma_);
};

// Rigid transform in 3-D. rotation must stay orthonormal with det +1.
struct Pose3 {
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
    Pose3 compose(const Pose3& other) const;
    Pose3 inverse() const;
    Eigen::Matrix4d homogeneous() const;
    bool is_rigid(double tol = 1e-9) const;
};

enum class Frame { Sensor, Base, Map };
std::string frame_name(Frame f);

struct PointCloud {
    std::vector<Eigen::Vector3d> points;
    Frame frame = Frame::Map;

    PointCloud() = default;
    explicit PointCloud(Frame f) : frame(f) {}
    PointCloud(Frame f, std::vector<Eigen::Vector3d> pts);

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

// Lift a planar pose to a 3-D transform: rotation about the vertical axis,
// translation (x, y, z_offset). z_offset is the known mounting height.
Pose3 pose2_to_pose3(const Pose2& pose, double z_offset);

// Extract (x, y, yaw); inverse of pose2_to_pose3 up to the z component.
Pose2 pose3_to_pose2(const Pose3& pose);

PointCloud transform_cloud(const PointCloud& cloud, const Pose3& t, Frame new_frame);

// Weighted mean direction: atan2(sum w sin, sum w cos), wrapped to (-pi, pi].
// Throws if the weights sum to zero (degenerate set).
double circular_mean(std::span<const double> angles, std::span<const double> weights);

}  // namespace tofloc
