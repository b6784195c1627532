#include "tofloc/arm_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tofloc/rng.hpp"

namespace tofloc {

Pose3 synthetic_tip_pose(const PressureCommand& cmd, const ArmParams& arm) {
    if (cmd.p1 < 0.0 || cmd.p2 < 0.0 || cmd.p3 < 0.0)
        throw std::invalid_argument("synthetic_tip_pose: negative pressure");

    const double a = cmd.p1 - 0.5 * (cmd.p2 + cmd.p3);
    const double b = std::sqrt(3.0) / 2.0 * (cmd.p2 - cmd.p3);
    const double kappa = arm.curvature_gain * std::hypot(a, b);
    const double theta = kappa * arm.length;  // total bend angle

    Pose3 tip;
    if (theta < 1e-12) {
        tip.translation = Eigen::Vector3d(0.0, 0.0, arm.length);
        return tip;
    }
    const double phi = std::atan2(b, a);  // bending-plane azimuth
    const double d = (1.0 - std::cos(theta)) / kappa;
    const double z = std::sin(theta) / kappa;
    tip.translation = Eigen::Vector3d(std::cos(phi) * d, std::sin(phi) * d, z);
    tip.rotation = rot_z(phi) * rot_y(theta) * rot_z(-phi);
    return tip;
}

namespace {

Eigen::Matrix3d project_to_rotation(const Eigen::Matrix3d& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1.0;
        r = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    return r;
}

Pose3 perturb_recorded_pose(const Pose3& pose, const DatasetSpec& spec, RngStream& rng) {
    Pose3 out = pose;
    const Eigen::Vector3d dp(rng.normal(0.0, spec.record_noise_pos),
                             rng.normal(0.0, spec.record_noise_pos),
                             rng.normal(0.0, spec.record_noise_pos));
    Eigen::Vector3d axis(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
    const double angle = rng.normal(0.0, spec.record_noise_ang);
    out.translation += dp;
    if (axis.norm() > 1e-12 && std::abs(angle) > 0.0) {
        axis.normalize();
        out.rotation = pose.rotation * Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    }
    return out;
}

}  // namespace

std::vector<TipSample> generate_dataset(const DatasetSpec& spec, const ArmParams& arm,
                                        std::uint64_t seed) {
    if (!(spec.p_step > 0.0) || spec.p_max < spec.p_min)
        throw std::invalid_argument("generate_dataset: bad pressure grid");

    const int steps = static_cast<int>(std::llround((spec.p_max - spec.p_min) / spec.p_step)) + 1;
    std::vector<PressureCommand> commands;

    // one chamber at a time
    for (int ch = 0; ch < 3; ++ch) {
        for (int i = 0; i < steps; ++i) {
            const double p = spec.p_min + i * spec.p_step;
            PressureCommand cmd;
            (ch == 0 ? cmd.p1 : ch == 1 ? cmd.p2 : cmd.p3) = p;
            commands.push_back(cmd);
        }
    }
    // every combination for each chamber pair
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pair : pairs) {
        for (int i = 0; i < steps; ++i) {
            for (int j = 0; j < steps; ++j) {
                PressureCommand cmd;
                (pair[0] == 0 ? cmd.p1 : pair[0] == 1 ? cmd.p2 : cmd.p3) = spec.p_min + i * spec.p_step;
                (pair[1] == 0 ? cmd.p1 : pair[1] == 1 ? cmd.p2 : cmd.p3) = spec.p_min + j * spec.p_step;
                commands.push_back(cmd);
            }
        }
    }

    RngStream rng(seed);
    std::vector<TipSample> samples;
    samples.reserve(commands.size());
    for (const auto& cmd : commands) {
        const Pose3 truth = synthetic_tip_pose(cmd, arm);
        samples.push_back({cmd, perturb_recorded_pose(truth, spec, rng)});
    }
    return samples;
}

KnnModel::KnnModel(std::vector<TipSample> samples, int k) : samples_(std::move(samples)), k_(k) {
    if (k_ < 1) throw std::invalid_argument("KnnModel: k must be >= 1");
    if (static_cast<std::size_t>(k_) > samples_.size())
        throw std::invalid_argument("KnnModel: k exceeds training set size");
}

Pose3 KnnModel::predict(const PressureCommand& cmd) const {
    const Eigen::Vector3d q = cmd.vec();
    std::vector<std::pair<double, int>> order(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i)
        order[i] = {(samples_[i].command.vec() - q).squaredNorm(), static_cast<int>(i)};
    std::partial_sort(order.begin(), order.begin() + k_, order.end());

    Eigen::Vector3d pos = Eigen::Vector3d::Zero();
    Eigen::Matrix3d rot_sum = Eigen::Matrix3d::Zero();
    for (int n = 0; n < k_; ++n) {
        const TipSample& s = samples_[static_cast<std::size_t>(order[n].second)];
        pos += s.tip_pose.translation;
        rot_sum += s.tip_pose.rotation;
    }
    Pose3 out;
    out.translation = pos / k_;
    out.rotation = project_to_rotation(rot_sum);
    return out;
}

KnnModel knn_fit(std::vector<TipSample> samples, int k) { return KnnModel(std::move(samples), k); }

Pose3 knn_predict(const KnnModel& model, const PressureCommand& cmd) { return model.predict(cmd); }

double position_mse(const KnnModel& model, const std::vector<TipSample>& queries) {
    if (queries.empty()) throw std::invalid_argument("position_mse: empty query set");
    double sum = 0.0;
    for (const auto& s : queries)
        sum += (model.predict(s.command).translation - s.tip_pose.translation).squaredNorm();
    return sum / static_cast<double>(queries.size());
}

namespace {

std::vector<std::size_t> seeded_shuffle(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RngStream rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.index(i)]);
    return idx;
}

}  // namespace

CvResult kfold_select_k(const std::vector<TipSample>& data, int folds,
                        const std::vector<int>& candidates, std::uint64_t seed) {
    const auto n = data.size();
    if (folds < 2 || static_cast<std::size_t>(folds) > n)
        throw std::invalid_argument("kfold_select_k: folds out of range");
    if (candidates.empty()) throw std::invalid_argument("kfold_select_k: no candidates");

    const auto shuffled = seeded_shuffle(n, seed);
    std::vector<int> fold_of(n);
    for (std::size_t pos = 0; pos < n; ++pos)
        fold_of[shuffled[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));

    CvResult result;
    double best_mse = std::numeric_limits<double>::infinity();
    for (int k : candidates) {
        double mse_sum = 0.0;
        int usable_folds = 0;
        for (int f = 0; f < folds; ++f) {
            std::vector<TipSample> train, val;
            for (std::size_t i = 0; i < n; ++i)
                (fold_of[i] == f ? val : train).push_back(data[i]);
            if (val.empty() || static_cast<std::size_t>(k) > train.size()) continue;
            mse_sum += position_mse(KnnModel(train, k), val);
            ++usable_folds;
        }
        const double mse = usable_folds > 0 ? mse_sum / usable_folds
                                            : std::numeric_limits<double>::infinity();
        result.mse_by_k.emplace_back(k, mse);
        if (mse < best_mse) {
            best_mse = mse;
            result.best_k = k;
        }
    }
    if (!std::isfinite(best_mse))
        throw std::invalid_argument("kfold_select_k: no feasible candidate");
    return result;
}

std::pair<std::vector<TipSample>, std::vector<TipSample>> train_validation_split(
    const std::vector<TipSample>& data, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_validation_split: fraction out of (0,1)");
    const auto shuffled = seeded_shuffle(data.size(), seed);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(data.size())));
    std::pair<std::vector<TipSample>, std::vector<TipSample>> out;
    for (std::size_t pos = 0; pos < shuffled.size(); ++pos)
        (pos < n_train ? out.first : out.second).push_back(data[shuffled[pos]]);
    return out;
}

void write_dataset(std::ostream& os, const std::vector<TipSample>& samples) {
    os << "# p1,p2,p3,tx,ty,tz,qw,qx,qy,qz\n";
    os.precision(17);
    for (const auto& s : samples) {
        const Eigen::Quaterniond q(s.tip_pose.rotation);
        os << s.command.p1 << ',' << s.command.p2 << ',' << s.command.p3 << ','
           << s.tip_pose.translation.x() << ',' << s.tip_pose.translation.y() << ','
           << s.tip_pose.translation.z() << ',' << q.w() << ',' << q.x() << ',' << q.y() << ','
           << q.z() << '\n';
    }
}

std::vector<TipSample> read_dataset(std::istream& is) {
    std::vector<TipSample> samples;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<double> v;
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
        if (v.size() != 10) throw std::invalid_argument("read_dataset: expected 10 fields");
        TipSample s;
        s.command = {v[0], v[1], v[2]};
        s.tip_pose.translation = Eigen::Vector3d(v[3], v[4], v[5]);
        s.tip_pose.rotation =
            Eigen::Quaterniond(v[6], v[7], v[8], v[9]).normalized().toRotationMatrix();
        samples.push_back(s);
    }
    return samples;
}

}  // namespace tofloc
