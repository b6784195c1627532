#include "tofloc/environment.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tofloc/rng.hpp"

namespace tofloc {

std::string face_name(Face f) {
    switch (f) {
        case Face::XMin: return "xmin";
        case Face::XMax: return "xmax";
        case Face::YMin: return "ymin";
        case Face::YMax: return "ymax";
        case Face::ZMin: return "zmin";
        case Face::ZMax: return "zmax";
    }
    return "?";
}

std::optional<Face> face_from_name(const std::string& name) {
    for (Face f : {Face::XMin, Face::XMax, Face::YMin, Face::YMax, Face::ZMin, Face::ZMax}) {
        if (face_name(f) == name) return f;
    }
    return std::nullopt;
}

Aabb inflate(const Aabb& box, double margin) {
    Aabb out;
    out.min = box.min.array() - margin;
    out.max = box.max.array() + margin;
    return out;
}

Aabb EnvironmentMap::bounds() const {
    Aabb box;
    box.min = Eigen::Vector3d(-dims.x() / 2.0, -dims.y() / 2.0, 0.0);
    box.max = Eigen::Vector3d(dims.x() / 2.0, dims.y() / 2.0, dims.z());
    return box;
}

namespace {

FaceRect make_face(Face id, const Eigen::Vector3d& dims) {
    const double hx = dims.x() / 2.0, hy = dims.y() / 2.0, dz = dims.z();
    switch (id) {
        case Face::XMin: return {id, 0, -hx, 1, 2, -hy, hy, 0.0, dz};
        case Face::XMax: return {id, 0, hx, 1, 2, -hy, hy, 0.0, dz};
        case Face::YMin: return {id, 1, -hy, 0, 2, -hx, hx, 0.0, dz};
        case Face::YMax: return {id, 1, hy, 0, 2, -hx, hx, 0.0, dz};
        case Face::ZMin: return {id, 2, 0.0, 0, 1, -hx, hx, -hy, hy};
        case Face::ZMax: return {id, 2, dz, 0, 1, -hx, hx, -hy, hy};
    }
    throw std::logic_error("make_face: bad face id");
}

bool is_open(Face f, const std::vector<Face>& open_faces) {
    for (Face o : open_faces)
        if (o == f) return true;
    return false;
}

}  // namespace

EnvironmentMap build_cuboid_map(const Eigen::Vector3d& dims, const std::vector<Face>& open_faces,
                                int n_points, std::uint64_t seed) {
    if (n_points < 1) throw std::invalid_argument("build_cuboid_map: n_points must be >= 1");
    if (!(dims.minCoeff() > 0.0)) throw std::invalid_argument("build_cuboid_map: dims must be positive");

    EnvironmentMap map;
    map.dims = dims;
    map.open_faces = open_faces;
    for (Face f : {Face::XMin, Face::XMax, Face::YMin, Face::YMax, Face::ZMin, Face::ZMax}) {
        if (!is_open(f, open_faces)) map.surfaces.push_back(make_face(f, dims));
    }
    if (map.surfaces.empty()) throw std::invalid_argument("build_cuboid_map: all faces open");

    double total_area = 0.0;
    std::vector<double> cum;
    for (const auto& f : map.surfaces) {
        total_area += f.area();
        cum.push_back(total_area);
    }

    RngStream rng(seed);
    map.model_cloud.frame = Frame::Map;
    map.model_cloud.points.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double pick = rng.uniform() * total_area;
        std::size_t fi = 0;
        while (fi + 1 < cum.size() && pick >= cum[fi]) ++fi;
        const FaceRect& f = map.surfaces[fi];
        Eigen::Vector3d p;
        p[f.axis] = f.coord;
        p[f.u_axis] = rng.uniform(f.u_lo, f.u_hi);
        p[f.v_axis] = rng.uniform(f.v_lo, f.v_hi);
        map.model_cloud.points.push_back(p);
    }
    return map;
}

std::optional<RayHit> ray_cast(const EnvironmentMap& map, const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& direction, double max_range) {
    if (std::abs(direction.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("ray_cast: direction must be unit length");

    double best_t = std::numeric_limits<double>::infinity();
    Face best_face = Face::XMin;
    for (const FaceRect& f : map.surfaces) {
        const double denom = direction[f.axis];
        if (std::abs(denom) < 1e-15) continue;  // ray parallel to the face plane
        const double t = (f.coord - origin[f.axis]) / denom;
        if (t <= 1e-12 || t > max_range || t >= best_t) continue;
        const Eigen::Vector3d p = origin + t * direction;
        if (p[f.u_axis] >= f.u_lo && p[f.u_axis] <= f.u_hi && p[f.v_axis] >= f.v_lo &&
            p[f.v_axis] <= f.v_hi) {
            best_t = t;
            best_face = f.id;
        }
    }
    if (!std::isfinite(best_t)) return std::nullopt;
    return RayHit{best_t, best_face};
}

PointCloud crop(const PointCloud& cloud, const Aabb& box) {
    if (!(box.min.x() <= box.max.x() && box.min.y() <= box.max.y() && box.min.z() <= box.max.z()))
        throw std::invalid_argument("crop: invalid box (min > max)");
    PointCloud out(cloud.frame);
    for (const auto& p : cloud.points)
        if (box.contains(p)) out.points.push_back(p);
    return out;
}

}  // namespace tofloc
