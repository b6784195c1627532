#pragma once

#include "tofloc/geometry.hpp"

namespace tofloc {

struct VoxelGrid {
    double voxel_size = 0.05;  // m
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
};

// Concatenate sample onto accumulated (accumulated first, order preserved).
// Both clouds must carry the same frame tag.
PointCloud merge(const PointCloud& accumulated, const PointCloud& sample);

// One centroid per occupied voxel. Points are bucketed by
// floor((p - origin) / voxel_size) per axis; output order is the first
// occurrence of each voxel in the input.
PointCloud voxel_downsample(const PointCloud& cloud, const VoxelGrid& grid);

}  // namespace tofloc
