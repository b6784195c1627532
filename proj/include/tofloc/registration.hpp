#pragma once

#include <vector>

#include "tofloc/geometry.hpp"

namespace tofloc {

struct ScoreParams {
    double max_correspondence_distance = 0.05;  // m, inlier radius
};

// Static KD-tree over a point cloud. Queries are exact: same nearest neighbor
// as a linear scan, ties broken by the smallest point index.
class NnIndex {
public:
    explicit NnIndex(const PointCloud& cloud);

    struct Neighbor {
        int index;
        double distance;
    };

    Neighbor nearest(const Eigen::Vector3d& query) const;

    // True if any indexed point lies within radius (inclusive) of query.
    // Early-exits, so much cheaper than nearest() for scoring.
    bool has_neighbor_within(const Eigen::Vector3d& query, double radius) const;

    std::size_t size() const { return points_.size(); }
    Frame frame() const { return frame_; }

private:
    struct Node {
        int begin, end;       // range into order_
        int axis = -1;        // -1 for leaves
        double split = 0.0;
        int left = -1, right = -1;
    };

    int build(int begin, int end);

    std::vector<Eigen::Vector3d> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
    Frame frame_ = Frame::Map;
};

NnIndex build_index(const PointCloud& cloud);

// Fraction of source points whose transformed position has a target neighbor
// within the correspondence radius; the transform t maps the source frame into
// the target's. Always in [0, 1]; an empty source scores 0.
double registration_score(const PointCloud& source, const NnIndex& target, const Pose3& t,
                          const ScoreParams& params);

}  // namespace tofloc
