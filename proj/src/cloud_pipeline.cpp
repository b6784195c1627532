#include "tofloc/cloud_pipeline.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace tofloc {

PointCloud merge(const PointCloud& accumulated, const PointCloud& sample) {
    if (accumulated.frame != sample.frame)
        throw std::invalid_argument("merge: frame mismatch (" + frame_name(accumulated.frame) +
                                    " vs " + frame_name(sample.frame) + ")");
    PointCloud out(accumulated.frame);
    out.points.reserve(accumulated.size() + sample.size());
    out.points.insert(out.points.end(), accumulated.points.begin(), accumulated.points.end());
    out.points.insert(out.points.end(), sample.points.begin(), sample.points.end());
    return out;
}

namespace {

struct VoxelKey {
    std::int64_t x, y, z;
    bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::int64_t v : {k.x, k.y, k.z}) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, const VoxelGrid& grid) {
    if (!(grid.voxel_size > 0.0))
        throw std::invalid_argument("voxel_downsample: voxel_size must be > 0");

    struct Accum {
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        int count = 0;
    };
    std::unordered_map<VoxelKey, int, VoxelKeyHash> slot_of;
    std::vector<Accum> accums;  // first-occurrence order

    for (const auto& p : cloud.points) {
        if (!p.allFinite()) throw std::invalid_argument("voxel_downsample: non-finite point");
        const VoxelKey key{
            static_cast<std::int64_t>(std::floor((p.x() - grid.origin.x()) / grid.voxel_size)),
            static_cast<std::int64_t>(std::floor((p.y() - grid.origin.y()) / grid.voxel_size)),
            static_cast<std::int64_t>(std::floor((p.z() - grid.origin.z()) / grid.voxel_size))};
        auto [it, inserted] = slot_of.try_emplace(key, static_cast<int>(accums.size()));
        if (inserted) accums.emplace_back();
        Accum& a = accums[static_cast<std::size_t>(it->second)];
        a.sum += p;
        a.count += 1;
    }

    PointCloud out(cloud.frame);
    out.points.reserve(accums.size());
    for (const auto& a : accums) out.points.push_back(a.sum / a.count);
    return out;
}

}  // namespace tofloc
