#include <doctest.h>

#include <cmath>
#include <map>
#include <tuple>

#include "tofloc/cloud_pipeline.hpp"
#include "tofloc/rng.hpp"

using namespace tofloc;

TEST_SUITE("cloud_pipeline") {

TEST_CASE("merging with an empty cloud is the identity") {
    PointCloud sample(Frame::Base);
    sample.points = {{1, 2, 3}, {4, 5, 6}};
    const PointCloud a = merge(PointCloud(Frame::Base), sample);
    REQUIRE(a.size() == 2);
    CHECK(a.points[0] == sample.points[0]);

    const PointCloud b = merge(sample, PointCloud(Frame::Base));
    REQUIRE(b.size() == 2);
    CHECK(b.points[1] == sample.points[1]);
}

TEST_CASE("merge concatenates in order, accumulated first") {
    PointCloud acc(Frame::Base), sample(Frame::Base);
    acc.points = {{1, 0, 0}};
    sample.points = {{2, 0, 0}, {3, 0, 0}};
    const PointCloud out = merge(acc, sample);
    REQUIRE(out.size() == 3);
    CHECK(out.points[0].x() == 1);
    CHECK(out.points[1].x() == 2);
    CHECK(out.points[2].x() == 3);
}

TEST_CASE("merge rejects mismatched frames") {
    CHECK_THROWS_AS(merge(PointCloud(Frame::Base), PointCloud(Frame::Map)),
                    std::invalid_argument);
}

TEST_CASE("merge is associative in content") {
    RngStream rng(2);
    PointCloud a(Frame::Base), b(Frame::Base), c(Frame::Base);
    for (int i = 0; i < 10; ++i) a.points.emplace_back(rng.uniform(0, 1), 0, 0);
    for (int i = 0; i < 7; ++i) b.points.emplace_back(rng.uniform(0, 1), 0, 0);
    for (int i = 0; i < 4; ++i) c.points.emplace_back(rng.uniform(0, 1), 0, 0);
    const PointCloud left = merge(merge(a, b), c);
    const PointCloud right = merge(a, merge(b, c));
    REQUIRE(left.size() == right.size());
    for (std::size_t i = 0; i < left.size(); ++i) CHECK(left.points[i] == right.points[i]);
}

TEST_CASE("points within one voxel collapse to their centroid") {
    PointCloud c(Frame::Base);
    c.points = {{0.01, 0.01, 0.01}, {0.02, 0.02, 0.02}, {0.03, 0.03, 0.03}};
    const PointCloud out = voxel_downsample(c, {0.05, Eigen::Vector3d::Zero()});
    REQUIRE(out.size() == 1);
    CHECK((out.points[0] - Eigen::Vector3d(0.02, 0.02, 0.02)).norm() < 1e-15);
}

TEST_CASE("points coarser than the grid pass through") {
    PointCloud c(Frame::Base);
    for (int i = 0; i < 5; ++i) c.points.emplace_back(0.075 + 0.1 * i, 0.025, 0.025);
    const PointCloud out = voxel_downsample(c, {0.05, Eigen::Vector3d::Zero()});
    REQUIRE(out.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK((out.points[i] - c.points[i]).norm() == 0.0);
}

TEST_CASE("downsampling matches a hash-map oracle") {
    RngStream rng(3);
    PointCloud c(Frame::Base);
    for (int i = 0; i < 1920; ++i)
        c.points.emplace_back(rng.uniform(-0.35, 0.35), rng.uniform(-0.35, 0.35),
                              rng.uniform(0.0, 0.6));
    const VoxelGrid grid{0.05, Eigen::Vector3d::Zero()};
    const PointCloud out = voxel_downsample(c, grid);

    // oracle: ordered map keyed by integer voxel coordinates
    std::map<std::tuple<long, long, long>, std::pair<Eigen::Vector3d, int>> buckets;
    for (const auto& p : c.points) {
        const auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / grid.voxel_size)),
                                         static_cast<long>(std::floor(p.y() / grid.voxel_size)),
                                         static_cast<long>(std::floor(p.z() / grid.voxel_size)));
        auto& [sum, count] = buckets[key];
        if (count == 0) sum = Eigen::Vector3d::Zero();
        sum += p;
        count += 1;
    }
    REQUIRE(out.size() == buckets.size());

    const double half_diag = grid.voxel_size * std::sqrt(3.0) / 2.0;
    for (const auto& q : out.points) {
        const auto key = std::make_tuple(static_cast<long>(std::floor(q.x() / grid.voxel_size)),
                                         static_cast<long>(std::floor(q.y() / grid.voxel_size)),
                                         static_cast<long>(std::floor(q.z() / grid.voxel_size)));
        const auto it = buckets.find(key);
        REQUIRE(it != buckets.end());
        const Eigen::Vector3d centroid = it->second.first / it->second.second;
        CHECK((q - centroid).norm() < 1e-12);
        // centroid is within half a voxel diagonal of its cell center
        const Eigen::Vector3d cell_center =
            grid.voxel_size * (Eigen::Vector3d(static_cast<double>(std::get<0>(key)),
                                               static_cast<double>(std::get<1>(key)),
                                               static_cast<double>(std::get<2>(key))) +
                               Eigen::Vector3d::Constant(0.5));
        CHECK((q - cell_center).norm() <= half_diag + 1e-12);
    }
}

TEST_CASE("output order is the first occurrence of each voxel") {
    PointCloud c(Frame::Base);
    c.points = {{0.26, 0.0, 0.0}, {0.01, 0.0, 0.0}, {0.27, 0.0, 0.0}, {0.12, 0.0, 0.0}};
    const PointCloud out = voxel_downsample(c, {0.05, Eigen::Vector3d::Zero()});
    REQUIRE(out.size() == 3);
    CHECK(out.points[0].x() == doctest::Approx(0.265));  // voxel of the first point
    CHECK(out.points[1].x() == doctest::Approx(0.01));
    CHECK(out.points[2].x() == doctest::Approx(0.12));
}

TEST_CASE("downsampling a grid-aligned cloud is idempotent") {
    // centroids of symmetric pairs stay in their source voxel
    PointCloud c(Frame::Base);
    for (int i = 0; i < 8; ++i) {
        const double base = 0.1 * i;
        c.points.emplace_back(base + 0.02, 0.02, 0.02);
        c.points.emplace_back(base + 0.03, 0.03, 0.03);
    }
    const VoxelGrid grid{0.05, Eigen::Vector3d::Zero()};
    const PointCloud once = voxel_downsample(c, grid);
    const PointCloud twice = voxel_downsample(once, grid);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(once.points[i] == twice.points[i]);
}

TEST_CASE("each centroid stays inside its inputs' bounding box") {
    RngStream rng(5);
    PointCloud c(Frame::Base);
    for (int i = 0; i < 300; ++i)
        c.points.emplace_back(rng.uniform(0, 0.3), rng.uniform(0, 0.3), rng.uniform(0, 0.3));
    const VoxelGrid grid{0.05, Eigen::Vector3d::Zero()};
    const PointCloud out = voxel_downsample(c, grid);
    for (const auto& q : out.points) {
        Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e9), hi = -lo;
        for (const auto& p : c.points) {
            const bool same_voxel =
                std::floor(p.x() / 0.05) == std::floor(q.x() / 0.05) &&
                std::floor(p.y() / 0.05) == std::floor(q.y() / 0.05) &&
                std::floor(p.z() / 0.05) == std::floor(q.z() / 0.05);
            if (same_voxel) {
                lo = lo.cwiseMin(p);
                hi = hi.cwiseMax(p);
            }
        }
        CHECK((q.array() >= lo.array() - 1e-12).all());
        CHECK((q.array() <= hi.array() + 1e-12).all());
    }
}

TEST_CASE("voxel size must be positive") {
    CHECK_THROWS_AS(voxel_downsample(PointCloud(Frame::Base), {0.0, Eigen::Vector3d::Zero()}),
                    std::invalid_argument);
}

}  // TEST_SUITE
