#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "tofloc/geometry.hpp"

namespace tofloc {

// Chamber pressures of the three-bellows actuator, kPa.
struct PressureCommand {
    double p1 = 0.0;
    double p2 = 0.0;
    double p3 = 0.0;

    Eigen::Vector3d vec() const { return {p1, p2, p3}; }
};

struct TipSample {
    PressureCommand command;
    Pose3 tip_pose;  // tip frame relative to the robot base
};

// Single-arc bending surrogate for the bellows arm. curvature_gain is chosen
// so a single chamber at 18 kPa bends the arm by about 40 degrees.
struct ArmParams {
    double length = 0.10;                                        // m
    double curvature_gain = deg2rad(40.0) / (18.0 * 0.10);       // 1/(kPa*m)
};

// Constant-curvature tip pose for a pressure command. Antagonistic bending
// components: a = p1 - (p2+p3)/2, b = sqrt(3)/2 (p2 - p3); curvature
// kappa = gain * |(a, b)|, bending plane phi = atan2(b, a). Zero curvature
// gives the straight arm, tip at (0, 0, length).
Pose3 synthetic_tip_pose(const PressureCommand& cmd, const ArmParams& arm);

// Actuation grid plus the scatter applied to the recorded tip poses, standing
// in for tracking noise and robot repeatability in a real capture session.
struct DatasetSpec {
    double p_min = 3.0;   // kPa
    double p_max = 18.0;  // kPa
    double p_step = 1.0;  // kPa
    double record_noise_pos = 0.005;          // m, 1-sigma on recorded tip position
    double record_noise_ang = deg2rad(0.5);   // rad, 1-sigma on recorded tip rotation
};

// Enumerate the actuation protocol: one chamber at a time over the full sweep,
// then every pressure combination for each chamber pair. Deterministic per seed.
std::vector<TipSample> generate_dataset(const DatasetSpec& spec, const ArmParams& arm,
                                        std::uint64_t seed);

// k-NN regressor in pressure space: position is the unweighted neighbor mean,
// orientation the chordal mean of neighbor rotations. Ties broken by dataset order.
class KnnModel {
public:
    KnnModel(std::vector<TipSample> samples, int k);

    Pose3 predict(const PressureCommand& cmd) const;

    int neighbor_count() const { return k_; }
    const std::vector<TipSample>& samples() const { return samples_; }

private:
    std::vector<TipSample> samples_;
    int k_;
};

KnnModel knn_fit(std::vector<TipSample> samples, int k);
Pose3 knn_predict(const KnnModel& model, const PressureCommand& cmd);

// Mean squared tip-position error of the model over a query set, m^2.
double position_mse(const KnnModel& model, const std::vector<TipSample>& queries);

struct CvResult {
    int best_k = 0;
    std::vector<std::pair<int, double>> mse_by_k;  // candidate k -> mean validation MSE
};

// k-fold cross validation over candidate neighbor counts. Folds assigned
// round-robin over a seeded shuffle; best k minimizes mean validation MSE.
CvResult kfold_select_k(const std::vector<TipSample>& data, int folds,
                        const std::vector<int>& candidates, std::uint64_t seed);

// Seeded shuffle split; first fraction goes to training.
std::pair<std::vector<TipSample>, std::vector<TipSample>> train_validation_split(
    const std::vector<TipSample>& data, double train_fraction, std::uint64_t seed);

// Delimited text: p1,p2,p3,tx,ty,tz,qw,qx,qy,qz per row. Lines starting with '#'
// are comments. Lets recorded datasets replace the surrogate.
void write_dataset(std::ostream& os, const std::vector<TipSample>& samples);
std::vector<TipSample> read_dataset(std::istream& is);

}  // namespace tofloc
