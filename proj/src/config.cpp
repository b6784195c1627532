#include "tofloc/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tofloc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::uint64_t i = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

std::vector<Face> parse_faces(const std::string& key, const std::string& v) {
    std::vector<Face> faces;
    if (trim(v) == "none") return faces;
    for (const auto& name : split(v, ',')) {
        const auto f = face_from_name(name);
        if (!f) throw std::invalid_argument("config: unknown face for " + key + ": '" + name + "'");
        faces.push_back(*f);
    }
    return faces;
}

}  // namespace

// "1,2,5" or "1-10"
std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const auto& tok : split(v, ',')) {
        const auto dash = tok.find('-', 1);
        if (dash != std::string::npos) {
            const int lo = to_int(key, tok.substr(0, dash));
            const int hi = to_int(key, tok.substr(dash + 1));
            if (hi < lo) throw std::invalid_argument("config: bad range for " + key);
            for (int i = lo; i <= hi; ++i) out.push_back(i);
        } else {
            out.push_back(to_int(key, tok));
        }
    }
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_settings_text(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: missing '=' on line " + std::to_string(lineno));
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

void apply_setting(StudyConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "env.dim_x") cfg.env.dims.x() = to_double(key, value);
    else if (key == "env.dim_y") cfg.env.dims.y() = to_double(key, value);
    else if (key == "env.dim_z") cfg.env.dims.z() = to_double(key, value);
    else if (key == "env.open_faces") cfg.env.open_faces = parse_faces(key, value);
    else if (key == "env.map_points") cfg.env.map_points = to_int(key, value);
    else if (key == "sensor.fov_deg") cfg.trial.intrinsics.diagonal_fov = deg2rad(to_double(key, value));
    else if (key == "sensor.max_range") cfg.trial.intrinsics.max_range = to_double(key, value);
    else if (key == "noise.sigma_fraction") cfg.trial.noise.sigma_fraction = to_double(key, value);
    else if (key == "noise.common_fraction") cfg.trial.noise.common_fraction = to_double(key, value);
    else if (key == "noise.bias_fraction") cfg.trial.noise.bias_fraction = to_double(key, value);
    else if (key == "noise.dropout_prob") cfg.trial.noise.dropout_prob = to_double(key, value);
    else if (key == "noise.outlier_prob") cfg.trial.noise.outlier_prob = to_double(key, value);
    else if (key == "arm.length") cfg.arm.length = to_double(key, value);
    else if (key == "arm.curvature_gain") cfg.arm.curvature_gain = to_double(key, value);
    else if (key == "arm.max_deflection_deg")
        // convenience: gain such that 18 kPa on one chamber bends by this much
        cfg.arm.curvature_gain = deg2rad(to_double(key, value)) / (18.0 * cfg.arm.length);
    else if (key == "dataset.file") cfg.dataset_file = value;
    else if (key == "dataset.p_min") cfg.dataset.p_min = to_double(key, value);
    else if (key == "dataset.p_max") cfg.dataset.p_max = to_double(key, value);
    else if (key == "dataset.p_step") cfg.dataset.p_step = to_double(key, value);
    else if (key == "dataset.record_noise_pos") cfg.dataset.record_noise_pos = to_double(key, value);
    else if (key == "dataset.record_noise_ang_deg")
        cfg.dataset.record_noise_ang = deg2rad(to_double(key, value));
    else if (key == "knn.k") cfg.knn_k = to_int(key, value);
    else if (key == "knn.folds") cfg.knn_folds = to_int(key, value);
    else if (key == "rig.azimuth_offset_deg") cfg.rig.azimuth_offset = deg2rad(to_double(key, value));
    else if (key == "rig.radial_offset") cfg.rig.radial_offset = to_double(key, value);
    else if (key == "rig.pitch_deg") cfg.rig.pitch = deg2rad(to_double(key, value));
    else if (key == "pf.particles") cfg.trial.pf.particle_count = to_int(key, value);
    else if (key == "pf.init_dev_pos") cfg.trial.pf.init_dev_pos = to_double(key, value);
    else if (key == "pf.init_dev_ang_deg") cfg.trial.pf.init_dev_ang = deg2rad(to_double(key, value));
    else if (key == "pf.jitter_pos") cfg.trial.pf.jitter_pos = to_double(key, value);
    else if (key == "pf.jitter_ang_deg") cfg.trial.pf.jitter_ang = deg2rad(to_double(key, value));
    else if (key == "pf.vary_init_dev") cfg.trial.vary_init_dev = to_bool(key, value);
    else if (key == "score.max_correspondence")
        cfg.trial.score.max_correspondence_distance = to_double(key, value);
    else if (key == "score.source") {
        if (value == "merged") cfg.trial.score_source = ScoreSource::MergedCloud;
        else if (value == "per_sample") cfg.trial.score_source = ScoreSource::PerSample;
        else throw std::invalid_argument("config: score.source must be merged|per_sample");
    } else if (key == "voxel.size") cfg.trial.voxel.voxel_size = to_double(key, value);
    else if (key == "pipeline.order") {
        if (value == "merge_first") cfg.trial.pipeline_order = PipelineOrder::MergeThenDownsample;
        else if (value == "downsample_first")
            cfg.trial.pipeline_order = PipelineOrder::DownsampleThenMerge;
        else throw std::invalid_argument("config: pipeline.order must be merge_first|downsample_first");
    } else if (key == "trial.true_x") cfg.trial.true_base_pose.x = to_double(key, value);
    else if (key == "trial.true_y") cfg.trial.true_base_pose.y = to_double(key, value);
    else if (key == "trial.true_gamma_deg")
        cfg.trial.true_base_pose = Pose2(cfg.trial.true_base_pose.x, cfg.trial.true_base_pose.y,
                                         deg2rad(to_double(key, value)));
    else if (key == "trial.z_offset") cfg.trial.z_offset = to_double(key, value);
    else if (key == "trial.samples") cfg.trial.n_samples = to_int(key, value);
    else if (key == "study.sample_counts") cfg.sample_counts = parse_int_list(key, value);
    else if (key == "study.trials") cfg.trials_per_count = to_int(key, value);
    else if (key == "study.mode") {
        if (value == "knn") { cfg.run_knn = true; cfg.run_truth = false; }
        else if (value == "truth") { cfg.run_knn = false; cfg.run_truth = true; }
        else if (value == "both") { cfg.run_knn = true; cfg.run_truth = true; }
        else throw std::invalid_argument("config: study.mode must be knn|truth|both");
    } else if (key == "study.threads") cfg.threads = to_int(key, value);
    else if (key == "study.seed") cfg.master_seed = to_u64(key, value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void load_config_file(StudyConfig& cfg, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    for (const auto& [key, value] : parse_settings_text(buf.str())) apply_setting(cfg, key, value);
}

}  // namespace tofloc
