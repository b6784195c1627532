#include "tofloc/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace tofloc {

double wrap_angle(double angle) {
    double r = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

double angular_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

Eigen::Matrix3d rot_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d m;
    m << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return m;
}

Eigen::Matrix3d rot_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d m;
    m << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
    return m;
}

Pose2::Pose2(double x_, double y_, double gamma_) : x(x_), y(y_), gamma(wrap_angle(gamma_)) {}

Pose3 Pose3::compose(const Pose3& other) const {
    Pose3 out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
}

Pose3 Pose3::inverse() const {
    Pose3 out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
}

Eigen::Matrix4d Pose3::homogeneous() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = rotation;
    m.block<3, 1>(0, 3) = translation;
    return m;
}

bool Pose3::is_rigid(double tol) const {
    const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol;
}

std::string frame_name(Frame f) {
    switch (f) {
        case Frame::Sensor: return "sensor";
        case Frame::Base: return "base";
        case Frame::Map: return "map";
    }
    return "?";
}

PointCloud::PointCloud(Frame f, std::vector<Eigen::Vector3d> pts) : points(std::move(pts)), frame(f) {
    for (const auto& p : points) {
        if (!p.allFinite()) throw std::invalid_argument("PointCloud: non-finite coordinate");
    }
}

Pose3 pose2_to_pose3(const Pose2& pose, double z_offset) {
    Pose3 out;
    out.rotation = rot_z(pose.gamma);
    out.translation = Eigen::Vector3d(pose.x, pose.y, z_offset);
    return out;
}

Pose2 pose3_to_pose2(const Pose3& pose) {
    return Pose2(pose.translation.x(), pose.translation.y(),
                 std::atan2(pose.rotation(1, 0), pose.rotation(0, 0)));
}

PointCloud transform_cloud(const PointCloud& cloud, const Pose3& t, Frame new_frame) {
    PointCloud out(new_frame);
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
    return out;
}

double circular_mean(std::span<const double> angles, std::span<const double> weights) {
    if (angles.size() != weights.size())
        throw std::invalid_argument("circular_mean: size mismatch");
    double s = 0.0, c = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double w = weights[i];
        if (w < 0.0) throw std::invalid_argument("circular_mean: negative weight");
        s += w * std::sin(angles[i]);
        c += w * std::cos(angles[i]);
        wsum += w;
    }
    if (wsum <= 0.0) throw std::invalid_argument("circular_mean: degenerate weights");
    return wrap_angle(std::atan2(s, c));
}

}  // namespace tofloc
