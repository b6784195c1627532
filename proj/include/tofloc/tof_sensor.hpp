#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "tofloc/environment.hpp"
#include "tofloc/geometry.hpp"
#include "tofloc/rng.hpp"

namespace tofloc {

// Multizone ToF ranging device: 8x8 zones over a pyramidal field of view.
// diagonal_fov is the full corner-to-corner opening angle.
struct SensorIntrinsics {
    int rows = 8;
    int cols = 8;
    double diagonal_fov = deg2rad(65.0);
    double max_range = 4.0;        // m
    double frame_rate_hz = 15.0;   // metadata only
};

// Range error model, all components proportional to the true distance.
//
// sigma_fraction is the per-measurement 1-sigma relative spread. Part of that
// variance (common_fraction) is drawn once per frame and shared by all zones,
// the frame common-mode of the real device; the remainder is independent per
// zone. The marginal sigma of repeated measurements is sigma_fraction either way.
//
// bias_fraction is a separate systematic component: a per-sensor relative gain
// offset, fixed for the lifetime of a sensor channel (one trial). It models the
// device accuracy/calibration residual, which shifts ranges without widening
// the repeated-measurement spread. dropout drops otherwise-valid zones;
// outliers replace the range with a uniform draw.
struct NoiseModel {
    double sigma_fraction = 0.11;
    double common_fraction = 0.5;
    double bias_fraction = 0.10;
    double dropout_prob = 0.0;
    double outlier_prob = 0.0;
    std::uint64_t seed = 0;
};

struct DepthFrame {
    int rows = 8;
    int cols = 8;
    std::vector<double> ranges;  // row-major, NaN = invalid
    int sensor_id = 0;

    DepthFrame() : ranges(64, std::numeric_limits<double>::quiet_NaN()) {}
    DepthFrame(int r, int c)
        : rows(r), cols(c), ranges(static_cast<std::size_t>(r) * c,
                                   std::numeric_limits<double>::quiet_NaN()) {}

    double at(int r, int c) const { return ranges[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return ranges[static_cast<std::size_t>(r) * cols + c]; }
    bool valid(int r, int c) const { return std::isfinite(at(r, c)); }
    int valid_count() const;
};

// Unit ray directions for all zones, row-major, in the sensor frame (+z optical axis).
// Zone (r, c) maps to normalize((u tan_a, v tan_a, 1)) with u, v the zone-center
// offsets in [-1, 1] and tan_a = tan(diagonal_fov / 2) / sqrt(2).
std::vector<Eigen::Vector3d> zone_directions(const SensorIntrinsics& intr);

// Cast all zone rays against the map; ranges carry the multiplicative noise
// model plus the caller-supplied fixed gain offset, and are clamped to
// (0, max_range]. Misses and dropouts become invalid zones. Deterministic per
// rng stream state.
DepthFrame simulate_frame(const EnvironmentMap& map, const Pose3& sensor_pose_in_map,
                          const SensorIntrinsics& intr, const NoiseModel& noise, RngStream& rng,
                          double range_bias = 0.0);

// One point per valid zone: range times the zone direction, sensor frame.
PointCloud depth_to_points(const DepthFrame& frame, const SensorIntrinsics& intr);

// Plain-text dump: one line per row, "nan" for invalid zones.
void write_depth_frame(std::ostream& os, const DepthFrame& frame);

}  // namespace tofloc
