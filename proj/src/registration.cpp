#include "tofloc/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tofloc {

namespace {
constexpr int kLeafSize = 8;
}

NnIndex::NnIndex(const PointCloud& cloud) : points_(cloud.points), frame_(cloud.frame) {
    if (points_.empty()) throw std::invalid_argument("NnIndex: empty cloud");
    for (const auto& p : points_)
        if (!p.allFinite()) throw std::invalid_argument("NnIndex: non-finite point");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(points_.size()));
}

int NnIndex::build(int begin, int end) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return node_id;

    // split the widest extent axis at the median
    Eigen::Vector3d lo = points_[static_cast<std::size_t>(order_[begin])];
    Eigen::Vector3d hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        const auto& p = points_[static_cast<std::size_t>(order_[i])];
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         const double ca = points_[static_cast<std::size_t>(a)][axis];
                         const double cb = points_[static_cast<std::size_t>(b)][axis];
                         return ca < cb || (ca == cb && a < b);
                     });

    nodes_[static_cast<std::size_t>(node_id)].axis = axis;
    nodes_[static_cast<std::size_t>(node_id)].split =
        points_[static_cast<std::size_t>(order_[mid])][axis];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[static_cast<std::size_t>(node_id)].left = left;
    nodes_[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
}

NnIndex::Neighbor NnIndex::nearest(const Eigen::Vector3d& query) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    int best_idx = std::numeric_limits<int>::max();

    // explicit stack; near child first
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[static_cast<std::size_t>(i)];
                const double d2 = (points_[static_cast<std::size_t>(idx)] - query).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
                    best_d2 = d2;
                    best_idx = idx;
                }
            }
            continue;
        }
        const double delta = query[node.axis] - node.split;
        const int near = delta <= 0.0 ? node.left : node.right;
        const int far = delta <= 0.0 ? node.right : node.left;
        if (delta * delta <= best_d2) stack[top++] = far;  // <=: keep exact tie-breaks
        stack[top++] = near;
    }
    return {best_idx, std::sqrt(best_d2)};
}

bool NnIndex::has_neighbor_within(const Eigen::Vector3d& query, double radius) const {
    const double r2 = radius * radius;
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[static_cast<std::size_t>(i)];
                if ((points_[static_cast<std::size_t>(idx)] - query).squaredNorm() <= r2)
                    return true;
            }
            continue;
        }
        const double delta = query[node.axis] - node.split;
        const int near = delta <= 0.0 ? node.left : node.right;
        const int far = delta <= 0.0 ? node.right : node.left;
        if (delta * delta <= r2) stack[top++] = far;
        stack[top++] = near;
    }
    return false;
}

NnIndex build_index(const PointCloud& cloud) { return NnIndex(cloud); }

double registration_score(const PointCloud& source, const NnIndex& target, const Pose3& t,
                          const ScoreParams& params) {
    if (!(params.max_correspondence_distance > 0.0))
        throw std::invalid_argument("registration_score: correspondence distance must be > 0");
    if (source.empty()) return 0.0;
    int inliers = 0;
    for (const auto& p : source.points)
        if (target.has_neighbor_within(t.apply(p), params.max_correspondence_distance)) ++inliers;
    return static_cast<double>(inliers) / static_cast<double>(source.size());
}

}  // namespace tofloc
