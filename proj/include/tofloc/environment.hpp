#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tofloc/geometry.hpp"

namespace tofloc {

enum class Face { XMin, XMax, YMin, YMax, ZMin, ZMax };

std::string face_name(Face f);
std::optional<Face> face_from_name(const std::string& name);

// One bounded axis-aligned rectangle (a closed cuboid face).
struct FaceRect {
    Face id;
    int axis;      // normal axis: 0 = x, 1 = y, 2 = z
    double coord;  // plane coordinate on that axis
    int u_axis, v_axis;
    double u_lo, u_hi, v_lo, v_hi;

    double area() const { return (u_hi - u_lo) * (v_hi - v_lo); }
};

struct Aabb {
    Eigen::Vector3d min = Eigen::Vector3d::Zero();
    Eigen::Vector3d max = Eigen::Vector3d::Zero();

    bool contains(const Eigen::Vector3d& p) const {
        return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y() &&
               p.z() >= min.z() && p.z() <= max.z();
    }
};

Aabb inflate(const Aabb& box, double margin);

// Known environment: analytic closed faces for ray casting plus the sampled
// model cloud used as the registration target. Origin at the cuboid's bottom
// center, z up. Immutable after construction.
struct EnvironmentMap {
    Eigen::Vector3d dims = Eigen::Vector3d::Zero();
    std::vector<Face> open_faces;
    std::vector<FaceRect> surfaces;  // closed faces only
    PointCloud model_cloud;          // map frame, on closed faces

    Aabb bounds() const;
};

inline const Eigen::Vector3d kDefaultCuboidDims{0.7, 0.7, 0.6};
inline const std::vector<Face> kDefaultOpenFaces{Face::XMin, Face::XMax};
inline constexpr int kDefaultMapPointCount = 2000;

// Sample n_points uniformly by area over the closed faces. Deterministic per seed.
// Throws if every face is open or n_points < 1.
EnvironmentMap build_cuboid_map(const Eigen::Vector3d& dims, const std::vector<Face>& open_faces,
                                int n_points, std::uint64_t seed);

struct RayHit {
    double distance;
    Face face;
};

// Smallest positive hit distance on a closed face, or nullopt (miss). Rays
// leaving through an open face miss. direction must be unit length.
std::optional<RayHit> ray_cast(const EnvironmentMap& map, const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& direction, double max_range);

// Keep exactly the points inside box (inclusive bounds), original order.
PointCloud crop(const PointCloud& cloud, const Aabb& box);

}  // namespace tofloc
