#pragma once

#include <cstdint>
#include <vector>

#include "tofloc/geometry.hpp"
#include "tofloc/registration.hpp"
#include "tofloc/rng.hpp"

namespace tofloc {

struct Particle {
    Pose2 pose;
    double weight = 0.0;
};

struct ParticleSet {
    std::vector<Particle> particles;
    int iteration = 0;

    std::size_t size() const { return particles.size(); }
};

struct PfConfig {
    int particle_count = 1000;
    Pose2 init_center{};
    double init_dev_pos = 0.2;            // m, 1-sigma of the initial position prior
    double init_dev_ang = deg2rad(20.0);  // rad, 1-sigma of the initial angle prior
    double jitter_pos = 0.02;             // m, resampling noise
    double jitter_ang = deg2rad(2.0);     // rad, resampling noise
    std::uint64_t seed = 0;
};

// Gaussian prior around init_center, uniform weights 1/M.
ParticleSet init_particles(const PfConfig& cfg, RngStream& rng);

struct WeightUpdate {
    ParticleSet set;
    bool skipped = false;     // empty cloud: weights left untouched
    bool degenerate = false;  // every raw score was zero: reset to uniform
    double mean_score = 0.0;  // raw (unnormalized) registration scores
    double max_score = 0.0;
};

// Weight each particle by the registration score of the base-frame cloud under
// that particle's lifted pose, then normalize weights to sum to 1.
WeightUpdate update_weights(const ParticleSet& set, const PointCloud& cloud_in_base,
                            const NnIndex& map_index, const ScoreParams& params, double z_offset);

// Multinomial draw of M parents proportional to weight, Gaussian jitter on each
// child, weights reset to 1/M, iteration incremented.
ParticleSet resample(const ParticleSet& set, const PfConfig& cfg, RngStream& rng);

// Weight-normalized mean: linear components averaged directly, the angle via
// circular_mean. Throws on a degenerate (all-zero-weight) set.
Pose2 estimate(const ParticleSet& set);

}  // namespace tofloc
