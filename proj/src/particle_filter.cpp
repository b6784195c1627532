#include "tofloc/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tofloc {

ParticleSet init_particles(const PfConfig& cfg, RngStream& rng) {
    if (cfg.particle_count < 1) throw std::invalid_argument("init_particles: particle_count < 1");
    ParticleSet set;
    set.particles.reserve(static_cast<std::size_t>(cfg.particle_count));
    const double w = 1.0 / cfg.particle_count;
    for (int i = 0; i < cfg.particle_count; ++i) {
        Particle p;
        p.pose = Pose2(rng.normal(cfg.init_center.x, cfg.init_dev_pos),
                       rng.normal(cfg.init_center.y, cfg.init_dev_pos),
                       rng.normal(cfg.init_center.gamma, cfg.init_dev_ang));
        p.weight = w;
        set.particles.push_back(p);
    }
    return set;
}

WeightUpdate update_weights(const ParticleSet& set, const PointCloud& cloud_in_base,
                            const NnIndex& map_index, const ScoreParams& params, double z_offset) {
    if (set.particles.empty()) throw std::invalid_argument("update_weights: empty particle set");
    if (cloud_in_base.frame != Frame::Base)
        throw std::invalid_argument("update_weights: cloud must be in the base frame");

    WeightUpdate out;
    out.set = set;
    if (cloud_in_base.empty()) {
        out.skipped = true;  // first samples can be fully cropped away
        return out;
    }

    double sum = 0.0;
    std::vector<double> raw(set.particles.size());
    for (std::size_t i = 0; i < set.particles.size(); ++i) {
        raw[i] = registration_score(cloud_in_base, map_index,
                                    pose2_to_pose3(set.particles[i].pose, z_offset), params);
        sum += raw[i];
        out.max_score = std::max(out.max_score, raw[i]);
    }
    out.mean_score = sum / static_cast<double>(set.particles.size());

    if (sum <= 0.0) {
        out.degenerate = true;
        const double w = 1.0 / static_cast<double>(set.particles.size());
        for (auto& p : out.set.particles) p.weight = w;
        return out;
    }
    for (std::size_t i = 0; i < set.particles.size(); ++i)
        out.set.particles[i].weight = raw[i] / sum;
    return out;
}

ParticleSet resample(const ParticleSet& set, const PfConfig& cfg, RngStream& rng) {
    if (set.particles.empty()) throw std::invalid_argument("resample: empty particle set");
    double wsum = 0.0;
    std::vector<double> cum(set.particles.size());
    for (std::size_t i = 0; i < set.particles.size(); ++i) {
        const double w = set.particles[i].weight;
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("resample: invalid weight");
        wsum += w;
        cum[i] = wsum;
    }
    if (wsum <= 0.0) throw std::invalid_argument("resample: degenerate weights");
    if (std::abs(wsum - 1.0) > 1e-6)
        throw std::invalid_argument("resample: weights must be normalized");

    ParticleSet out;
    out.iteration = set.iteration + 1;
    out.particles.reserve(set.particles.size());
    const double child_w = 1.0 / static_cast<double>(set.particles.size());
    for (std::size_t m = 0; m < set.particles.size(); ++m) {
        const double u = rng.uniform() * wsum;
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        const std::size_t parent =
            std::min(static_cast<std::size_t>(it - cum.begin()), set.particles.size() - 1);
        const Pose2& pp = set.particles[parent].pose;
        Particle child;
        child.pose = Pose2(pp.x + rng.normal(0.0, cfg.jitter_pos),
                           pp.y + rng.normal(0.0, cfg.jitter_pos),
                           pp.gamma + rng.normal(0.0, cfg.jitter_ang));
        child.weight = child_w;
        out.particles.push_back(child);
    }
    return out;
}

Pose2 estimate(const ParticleSet& set) {
    if (set.particles.empty()) throw std::invalid_argument("estimate: empty particle set");
    double wsum = 0.0, x = 0.0, y = 0.0;
    std::vector<double> angles(set.particles.size()), weights(set.particles.size());
    for (std::size_t i = 0; i < set.particles.size(); ++i) {
        const Particle& p = set.particles[i];
        if (p.weight < 0.0 || !std::isfinite(p.weight))
            throw std::invalid_argument("estimate: invalid weight");
        wsum += p.weight;
        x += p.weight * p.pose.x;
        y += p.weight * p.pose.y;
        angles[i] = p.pose.gamma;
        weights[i] = p.weight;
    }
    if (wsum <= 0.0) throw std::invalid_argument("estimate: degenerate particle set");
    return Pose2(x / wsum, y / wsum, circular_mean(angles, weights));
}

}  // namespace tofloc
