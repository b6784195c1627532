#include "tofloc/study.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

#include "tofloc/io.hpp"

namespace tofloc {

namespace fs = std::filesystem;

namespace {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t hw = threads > 0 ? static_cast<std::size_t>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
    hw = std::min(hw, count);
    if (hw <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(hw);
    for (std::size_t t = 0; t < hw; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct Stats {
    double mean = 0.0, stddev = 0.0;
};

Stats mean_std(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ConditionStats make_stats(TipPoseSource mode, int k, const std::vector<const TrialRecord*>& recs) {
    std::vector<double> ex, eg;
    ex.reserve(recs.size());
    eg.reserve(recs.size());
    for (const auto* r : recs) {
        ex.push_back(r->e_x);
        eg.push_back(rad2deg(r->e_gamma));
    }
    const Stats sx = mean_std(ex), sg = mean_std(eg);
    ConditionStats c;
    c.mode = mode;
    c.sample_count = k;
    c.trials = static_cast<int>(recs.size());
    c.mean_ex = sx.mean;
    c.std_ex = sx.stddev;
    c.mean_eg_deg = sg.mean;
    c.std_eg_deg = sg.stddev;
    return c;
}

}  // namespace

std::string format_mode(TipPoseSource mode) {
    return mode == TipPoseSource::KnnModel ? "knn" : "truth";
}

StudyWorkspace build_workspace(const StudyConfig& cfg) {
    StudyWorkspace ws;
    ws.map = build_cuboid_map(cfg.env.dims, cfg.env.open_faces, cfg.env.map_points,
                              derive_seed(cfg.master_seed, kSeedTagMap));
    ws.map_index = std::make_unique<NnIndex>(ws.map.model_cloud);
    if (!cfg.dataset_file.empty()) {
        std::ifstream is(cfg.dataset_file);
        if (!is) throw std::runtime_error("build_workspace: cannot open " + cfg.dataset_file);
        ws.dataset = read_dataset(is);
    } else {
        ws.dataset =
            generate_dataset(cfg.dataset, cfg.arm, derive_seed(cfg.master_seed, kSeedTagDataset));
    }
    ws.knn = std::make_unique<KnnModel>(ws.dataset, cfg.knn_k);
    ws.arm = cfg.arm;
    ws.base_trial = cfg.trial;
    ws.base_trial.rig =
        default_sensor_rig(cfg.rig.azimuth_offset, cfg.rig.radial_offset, cfg.rig.pitch);
    return ws;
}

StudySummary run_study(const StudyConfig& cfg) {
    if (cfg.sample_counts.empty()) throw std::invalid_argument("run_study: no sample counts");
    if (cfg.trials_per_count < 1) throw std::invalid_argument("run_study: trials_per_count < 1");
    if (!cfg.run_knn && !cfg.run_truth) throw std::invalid_argument("run_study: no mode enabled");

    // claim the output directory before any compute
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    const fs::path out(cfg.out_dir);
    std::ofstream trials_csv(out / "trials.csv", std::ios::binary);
    if (!trials_csv) throw std::runtime_error("run_study: cannot write to " + cfg.out_dir);

    const auto t0 = std::chrono::steady_clock::now();
    StudyWorkspace ws = build_workspace(cfg);
    const TrialContext ctx = ws.context();

    std::vector<TipPoseSource> modes;
    if (cfg.run_knn) modes.push_back(TipPoseSource::KnnModel);
    if (cfg.run_truth) modes.push_back(TipPoseSource::GroundTruth);

    struct Job {
        TipPoseSource mode;
        int k, trial;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (TipPoseSource mode : modes) {
        for (int k : cfg.sample_counts) {
            for (int t = 0; t < cfg.trials_per_count; ++t) {
                // seeds ignore the mode so both modes share measurements
                jobs.push_back({mode, k, t,
                                derive_seed(cfg.master_seed, kSeedTagTrial,
                                            static_cast<std::uint64_t>(k),
                                            static_cast<std::uint64_t>(t))});
            }
        }
    }

    StudySummary summary;
    summary.records.resize(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        TrialConfig tc = ws.base_trial;
        tc.n_samples = job.k;
        tc.tip_source = job.mode;
        tc.seed = job.seed;
        const TrialResult r = run_trial(ctx, tc);
        TrialRecord rec;
        rec.mode = job.mode;
        rec.sample_count = job.k;
        rec.trial = job.trial;
        rec.seed = job.seed;
        rec.e_x = r.e_x;
        rec.e_gamma = r.e_gamma;
        rec.final_score_mean = r.iterations.empty() ? 0.0 : r.iterations.back().mean_score;
        summary.records[i] = rec;
    });

    // per-trial CSV, ordered by (mode, k, trial)
    trials_csv << "mode,k,trial,seed,e_x_m,e_gamma_deg,final_score_mean\n";
    for (const auto& r : summary.records) {
        trials_csv << format_mode(r.mode) << ',' << r.sample_count << ',' << r.trial << ','
                   << r.seed << ',' << fmt(r.e_x) << ',' << fmt(rad2deg(r.e_gamma)) << ','
                   << fmt(r.final_score_mean) << '\n';
    }
    trials_csv.close();

    for (TipPoseSource mode : modes) {
        std::vector<const TrialRecord*> mode_recs;
        for (int k : cfg.sample_counts) {
            std::vector<const TrialRecord*> recs;
            for (const auto& r : summary.records)
                if (r.mode == mode && r.sample_count == k) recs.push_back(&r);
            summary.conditions.push_back(make_stats(mode, k, recs));
            mode_recs.insert(mode_recs.end(), recs.begin(), recs.end());
        }
        ConditionStats g = make_stats(mode, -1, mode_recs);
        summary.grand.push_back(g);
    }

    std::ofstream summary_csv(out / "summary.csv", std::ios::binary);
    summary_csv << "mode,k,trials,mean_e_x_m,std_e_x_m,mean_e_gamma_deg,std_e_gamma_deg\n";
    auto write_row = [&](const ConditionStats& c) {
        summary_csv << format_mode(c.mode) << ','
                    << (c.sample_count < 0 ? std::string("all") : std::to_string(c.sample_count))
                    << ',' << c.trials << ',' << fmt(c.mean_ex) << ',' << fmt(c.std_ex) << ','
                    << fmt(c.mean_eg_deg) << ',' << fmt(c.std_eg_deg) << '\n';
    };
    for (const auto& c : summary.conditions) write_row(c);
    for (const auto& g : summary.grand) write_row(g);
    summary_csv.close();

    write_error_chart((out / "errors.svg").string(), summary);

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

const ConditionStats* find_condition(const StudySummary& s, TipPoseSource mode, int k) {
    for (const auto& c : s.conditions)
        if (c.mode == mode && c.sample_count == k) return &c;
    return nullptr;
}

const ConditionStats* find_grand(const StudySummary& s, TipPoseSource mode) {
    for (const auto& g : s.grand)
        if (g.mode == mode) return &g;
    return nullptr;
}

ModeComparison compare_modes(const StudySummary& summary) {
    const ConditionStats* grand_knn = find_grand(summary, TipPoseSource::KnnModel);
    const ConditionStats* grand_truth = find_grand(summary, TipPoseSource::GroundTruth);
    if (!grand_knn || !grand_truth)
        throw std::invalid_argument("compare_modes: summary must contain both modes");

    ModeComparison cmp;
    for (const auto& c : summary.conditions) {
        if (c.mode != TipPoseSource::KnnModel) continue;
        const ConditionStats* other =
            find_condition(summary, TipPoseSource::GroundTruth, c.sample_count);
        if (!other) continue;
        ModeComparisonRow row;
        row.sample_count = c.sample_count;
        row.mean_ex_knn = c.mean_ex;
        row.mean_ex_truth = other->mean_ex;
        row.abs_delta = std::abs(c.mean_ex - other->mean_ex);
        const double var = c.std_ex * c.std_ex / c.trials +
                           other->std_ex * other->std_ex / other->trials;
        row.welch_t = var > 0.0 ? (c.mean_ex - other->mean_ex) / std::sqrt(var) : 0.0;
        row.flagged = row.abs_delta > 0.01;
        cmp.rows.push_back(row);
    }
    cmp.grand_delta = std::abs(grand_knn->mean_ex - grand_truth->mean_ex);
    return cmp;
}

namespace {

// minimal hand-emitted SVG: grouped panels of mean +/- std bars
struct SvgPanel {
    std::string title;
    std::vector<int> ks;
    std::vector<double> means, stds;
};

void emit_panel(std::ostream& os, const SvgPanel& p, double ox, double oy, double w, double h) {
    const double ml = 46.0, mb = 24.0, mt = 20.0, mr = 8.0;
    const double plot_w = w - ml - mr, plot_h = h - mt - mb;
    double ymax = 1e-9;
    for (std::size_t i = 0; i < p.means.size(); ++i)
        ymax = std::max(ymax, p.means[i] + p.stds[i]);
    ymax *= 1.15;

    os << "<g>\n";
    os << "<text x=\"" << ox + w / 2 << "\" y=\"" << oy + 13
       << "\" font-size=\"12\" text-anchor=\"middle\">" << p.title << "</text>\n";
    // axes
    os << "<line x1=\"" << ox + ml << "\" y1=\"" << oy + mt << "\" x2=\"" << ox + ml << "\" y2=\""
       << oy + mt + plot_h << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ox + ml << "\" y1=\"" << oy + mt + plot_h << "\" x2=\"" << ox + ml + plot_w
       << "\" y2=\"" << oy + mt + plot_h << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = ymax * tick / 4.0;
        const double y = oy + mt + plot_h - plot_h * tick / 4.0;
        char label[32];
        std::snprintf(label, sizeof(label), "%.3g", v);
        os << "<text x=\"" << ox + ml - 4 << "\" y=\"" << y + 3
           << "\" font-size=\"9\" text-anchor=\"end\">" << label << "</text>\n";
        os << "<line x1=\"" << ox + ml - 2 << "\" y1=\"" << y << "\" x2=\"" << ox + ml << "\" y2=\""
           << y << "\" stroke=\"black\"/>\n";
    }
    const double n = static_cast<double>(p.ks.size());
    const double slot = plot_w / std::max(1.0, n);
    for (std::size_t i = 0; i < p.ks.size(); ++i) {
        const double cx = ox + ml + slot * (static_cast<double>(i) + 0.5);
        const double bw = slot * 0.6;
        const double bh = plot_h * p.means[i] / ymax;
        const double by = oy + mt + plot_h - bh;
        os << "<rect x=\"" << cx - bw / 2 << "\" y=\"" << by << "\" width=\"" << bw
           << "\" height=\"" << bh << "\" fill=\"#6699cc\"/>\n";
        const double e_lo = plot_h * std::max(0.0, p.means[i] - p.stds[i]) / ymax;
        const double e_hi = plot_h * (p.means[i] + p.stds[i]) / ymax;
        os << "<line x1=\"" << cx << "\" y1=\"" << oy + mt + plot_h - e_lo << "\" x2=\"" << cx
           << "\" y2=\"" << oy + mt + plot_h - e_hi << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << cx << "\" y=\"" << oy + mt + plot_h + 13
           << "\" font-size=\"9\" text-anchor=\"middle\">" << p.ks[i] << "</text>\n";
    }
    os << "</g>\n";
}

}  // namespace

void write_error_chart(const std::string& path, const StudySummary& summary) {
    std::vector<TipPoseSource> modes;
    for (const auto& g : summary.grand) modes.push_back(g.mode);

    const double panel_w = 420.0, panel_h = 200.0;
    const double width = panel_w * 2.0;
    const double height = panel_h * static_cast<double>(modes.size());

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_error_chart: cannot open " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\">\n";
    for (std::size_t m = 0; m < modes.size(); ++m) {
        SvgPanel pos_panel, ang_panel;
        pos_panel.title = "position error e_x (m), " + format_mode(modes[m]) + " tip poses";
        ang_panel.title = "orientation error e_gamma (deg), " + format_mode(modes[m]) + " tip poses";
        for (const auto& c : summary.conditions) {
            if (c.mode != modes[m]) continue;
            pos_panel.ks.push_back(c.sample_count);
            pos_panel.means.push_back(c.mean_ex);
            pos_panel.stds.push_back(c.std_ex);
            ang_panel.ks.push_back(c.sample_count);
            ang_panel.means.push_back(c.mean_eg_deg);
            ang_panel.stds.push_back(c.std_eg_deg);
        }
        emit_panel(os, pos_panel, 0.0, panel_h * static_cast<double>(m), panel_w, panel_h);
        emit_panel(os, ang_panel, panel_w, panel_h * static_cast<double>(m), panel_w, panel_h);
    }
    os << "</svg>\n";
}

void export_reconstruction(const TrialContext& ctx, const TrialConfig& cfg, int n_samples,
                           const std::string& out_dir) {
    if (n_samples < 0) throw std::invalid_argument("export_reconstruction: negative sample count");
    fs::create_directories(out_dir);

    RngStream setup_rng(derive_seed(cfg.seed, 1));
    std::vector<SensorChannel> channels = make_sensor_channels(cfg, cfg.seed);

    PointCloud merged(Frame::Base);
    for (int k = 0; k < n_samples; ++k) {
        const auto& dataset = *ctx.dataset;
        const PressureCommand cmd = dataset[setup_rng.index(dataset.size())].command;
        merged = merge(merged, acquire_sample(ctx, cfg, cmd, channels));
    }
    const PointCloud merged_map =
        transform_cloud(merged, pose2_to_pose3(cfg.true_base_pose, cfg.z_offset), Frame::Map);

    char name[64];
    std::snprintf(name, sizeof(name), "reconstruction_k%d.txt", n_samples);
    write_point_list((fs::path(out_dir) / name).string(), merged_map);
    write_point_list((fs::path(out_dir) / "map.txt").string(), ctx.map->model_cloud);
}

}  // namespace tofloc
