#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tofloc/config.hpp"
#include "tofloc/io.hpp"
#include "tofloc/study.hpp"

using namespace tofloc;
namespace fs = std::filesystem;

namespace {

StudyConfig tiny_study(const std::string& out_dir) {
    StudyConfig cfg;
    cfg.env.map_points = 500;
    cfg.sample_counts = {1, 2};
    cfg.trials_per_count = 3;
    cfg.trial.pf.particle_count = 80;
    cfg.out_dir = out_dir;
    cfg.master_seed = 7;
    cfg.threads = 2;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tofloc_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct CsvTrial {
    std::string mode;
    int k;
    double e_x, e_g_deg;
};

std::vector<CsvTrial> parse_trials_csv(const fs::path& p) {
    std::ifstream is(p);
    std::string line;
    std::getline(is, line);  // header
    std::vector<CsvTrial> rows;
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::string tok;
        CsvTrial row;
        std::getline(ss, row.mode, ',');
        std::getline(ss, tok, ',');
        row.k = std::stoi(tok);
        std::getline(ss, tok, ',');  // trial
        std::getline(ss, tok, ',');  // seed
        std::getline(ss, tok, ',');
        row.e_x = std::stod(tok);
        std::getline(ss, tok, ',');
        row.e_g_deg = std::stod(tok);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_SUITE("study") {

TEST_CASE("a small study produces the expected grid of results") {
    const fs::path dir = temp_dir("grid");
    const StudyConfig cfg = tiny_study(dir.string());
    const StudySummary summary = run_study(cfg);

    // 2 modes x 2 sample counts x 3 trials
    CHECK(summary.records.size() == 12);
    CHECK(summary.conditions.size() == 4);
    CHECK(summary.grand.size() == 2);
    CHECK(fs::exists(dir / "trials.csv"));
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "errors.svg"));

    for (const auto& c : summary.conditions) CHECK(c.trials == 3);
    for (const auto& g : summary.grand) CHECK(g.trials == 6);
}

TEST_CASE("summary statistics match a re-aggregation of the per-trial CSV") {
    const fs::path dir = temp_dir("reagg");
    const StudySummary summary = run_study(tiny_study(dir.string()));
    const auto rows = parse_trials_csv(dir / "trials.csv");
    REQUIRE(rows.size() == summary.records.size());

    for (const auto& c : summary.conditions) {
        double sum = 0.0;
        int n = 0;
        for (const auto& row : rows) {
            if (row.mode == format_mode(c.mode) && row.k == c.sample_count) {
                sum += row.e_x;
                ++n;
            }
        }
        REQUIRE(n == c.trials);
        CHECK(sum / n == doctest::Approx(c.mean_ex).epsilon(1e-9));
    }
}

TEST_CASE("rerunning the same study reproduces byte-identical outputs") {
    const fs::path dir_a = temp_dir("det_a");
    const fs::path dir_b = temp_dir("det_b");
    StudyConfig cfg = tiny_study(dir_a.string());
    run_study(cfg);
    cfg.out_dir = dir_b.string();
    run_study(cfg);
    CHECK(slurp(dir_a / "trials.csv") == slurp(dir_b / "trials.csv"));
    CHECK(slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv"));
}

TEST_CASE("thread count does not change the results") {
    const fs::path dir_a = temp_dir("thr_a");
    const fs::path dir_b = temp_dir("thr_b");
    StudyConfig cfg = tiny_study(dir_a.string());
    cfg.threads = 1;
    run_study(cfg);
    cfg.out_dir = dir_b.string();
    cfg.threads = 4;
    run_study(cfg);
    CHECK(slurp(dir_a / "trials.csv") == slurp(dir_b / "trials.csv"));
}

TEST_CASE("mode comparison matches the CSV and flags large gaps") {
    const fs::path dir = temp_dir("cmp");
    const StudySummary summary = run_study(tiny_study(dir.string()));
    const ModeComparison cmp = compare_modes(summary);
    REQUIRE(cmp.rows.size() == 2);

    const auto rows = parse_trials_csv(dir / "trials.csv");
    for (const auto& row : cmp.rows) {
        double knn_sum = 0.0, truth_sum = 0.0;
        int knn_n = 0, truth_n = 0;
        for (const auto& r : rows) {
            if (r.k != row.sample_count) continue;
            if (r.mode == "knn") {
                knn_sum += r.e_x;
                ++knn_n;
            } else {
                truth_sum += r.e_x;
                ++truth_n;
            }
        }
        const double delta = std::abs(knn_sum / knn_n - truth_sum / truth_n);
        CHECK(delta == doctest::Approx(row.abs_delta).epsilon(1e-9));
        CHECK(row.flagged == (row.abs_delta > 0.01));
    }
}

TEST_CASE("single-mode summaries cannot be compared") {
    const fs::path dir = temp_dir("single");
    StudyConfig cfg = tiny_study(dir.string());
    cfg.run_truth = false;
    const StudySummary summary = run_study(cfg);
    CHECK_THROWS_AS(compare_modes(summary), std::invalid_argument);
}

TEST_CASE("an unusable output directory fails before any compute") {
    const fs::path dir = temp_dir("blocked");
    std::ofstream(dir / "file") << "x";
    StudyConfig cfg = tiny_study((dir / "file" / "sub").string());  // path through a file
    CHECK_THROWS(run_study(cfg));
}

TEST_CASE("the error chart is a well-formed svg") {
    const fs::path dir = temp_dir("svg");
    run_study(tiny_study(dir.string()));
    const std::string svg = slurp(dir / "errors.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<rect") != std::string::npos);
    std::size_t opens = 0, closes = 0;
    for (std::size_t i = 0; i + 2 < svg.size(); ++i) {
        if (svg[i] == '<' && svg[i + 1] == 'g' && svg[i + 2] == '>') ++opens;
        if (svg.compare(i, 4, "</g>") == 0) ++closes;
    }
    CHECK(opens == closes);
}

TEST_CASE("reconstruction exports the merged cloud and the map") {
    const fs::path dir = temp_dir("reco");
    StudyConfig cfg = tiny_study(dir.string());
    const StudyWorkspace ws = build_workspace(cfg);
    TrialConfig tc = ws.base_trial;
    tc.seed = 3;

    export_reconstruction(ws.context(), tc, 2, dir.string());
    const PointCloud cloud = read_point_list((dir / "reconstruction_k2.txt").string(), Frame::Map);
    CHECK(cloud.size() <= 2 * 192);
    CHECK(cloud.size() > 0);
    const PointCloud map_pts = read_point_list((dir / "map.txt").string(), Frame::Map);
    CHECK(map_pts.size() == 500);

    export_reconstruction(ws.context(), tc, 0, dir.string());
    const PointCloud empty = read_point_list((dir / "reconstruction_k0.txt").string(), Frame::Map);
    CHECK(empty.empty());
}

TEST_CASE("noiseless reconstructions lie on the environment surfaces") {
    const fs::path dir = temp_dir("reco_clean");
    StudyConfig cfg = tiny_study(dir.string());
    cfg.trial.noise.sigma_fraction = 0.0;
    cfg.trial.noise.bias_fraction = 0.0;
    cfg.trial.tip_source = TipPoseSource::GroundTruth;
    const StudyWorkspace ws = build_workspace(cfg);
    TrialConfig tc = ws.base_trial;
    tc.tip_source = TipPoseSource::GroundTruth;
    tc.seed = 4;

    export_reconstruction(ws.context(), tc, 3, dir.string());
    const PointCloud cloud = read_point_list((dir / "reconstruction_k3.txt").string(), Frame::Map);
    REQUIRE(cloud.size() > 0);
    for (const auto& p : cloud.points) {
        double best = 1e9;
        for (const auto& f : ws.map.surfaces) {
            if (p[f.u_axis] < f.u_lo - 1e-9 || p[f.u_axis] > f.u_hi + 1e-9) continue;
            if (p[f.v_axis] < f.v_lo - 1e-9 || p[f.v_axis] > f.v_hi + 1e-9) continue;
            best = std::min(best, std::abs(p[f.axis] - f.coord));
        }
        CHECK(best < 1e-9);
    }
}

TEST_CASE("settings text parses keys, values, and comments") {
    const auto kvs = parse_settings_text(
        "# comment\n"
        "pf.particles = 250\n"
        "\n"
        "noise.sigma_fraction=0.2  # trailing comment\n");
    REQUIRE(kvs.size() == 2);
    CHECK(kvs[0].first == "pf.particles");
    CHECK(kvs[0].second == "250");
    CHECK(kvs[1].second == "0.2");
}

TEST_CASE("settings apply onto the study configuration") {
    StudyConfig cfg;
    apply_setting(cfg, "pf.particles", "123");
    apply_setting(cfg, "noise.sigma_fraction", "0.07");
    apply_setting(cfg, "pf.init_dev_ang_deg", "10");
    apply_setting(cfg, "env.open_faces", "ymin,ymax");
    apply_setting(cfg, "study.sample_counts", "1-3,7");
    apply_setting(cfg, "study.mode", "truth");
    apply_setting(cfg, "score.source", "per_sample");
    CHECK(cfg.trial.pf.particle_count == 123);
    CHECK(cfg.trial.noise.sigma_fraction == 0.07);
    CHECK(cfg.trial.pf.init_dev_ang == doctest::Approx(deg2rad(10.0)));
    REQUIRE(cfg.env.open_faces.size() == 2);
    CHECK(cfg.env.open_faces[0] == Face::YMin);
    CHECK(cfg.sample_counts == std::vector<int>{1, 2, 3, 7});
    CHECK_FALSE(cfg.run_knn);
    CHECK(cfg.run_truth);
    CHECK(cfg.trial.score_source == ScoreSource::PerSample);
}

TEST_CASE("unknown keys and malformed values are rejected") {
    StudyConfig cfg;
    CHECK_THROWS_AS(apply_setting(cfg, "nope.nothing", "1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_setting(cfg, "pf.particles", "many"), std::invalid_argument);
    CHECK_THROWS_AS(apply_setting(cfg, "study.mode", "fastest"), std::invalid_argument);
    CHECK_THROWS_AS(apply_setting(cfg, "env.open_faces", "north"), std::invalid_argument);
}

TEST_CASE("a recorded dataset file replaces the generated one") {
    const fs::path dir = temp_dir("dataset_file");
    StudyConfig cfg = tiny_study((dir / "out").string());
    cfg.dataset.p_max = 6.0;  // small grid to record
    const auto recorded = generate_dataset(cfg.dataset, cfg.arm, 99);
    {
        std::ofstream os(dir / "recorded.csv");
        write_dataset(os, recorded);
    }
    apply_setting(cfg, "dataset.file", (dir / "recorded.csv").string());
    const StudyWorkspace ws = build_workspace(cfg);
    REQUIRE(ws.dataset.size() == recorded.size());
    CHECK((ws.dataset[5].command.vec() - recorded[5].command.vec()).norm() == 0.0);
    CHECK((ws.dataset[5].tip_pose.translation - recorded[5].tip_pose.translation).norm() < 1e-15);
}

TEST_CASE("config files load and apply in order") {
    const fs::path dir = temp_dir("cfgfile");
    const fs::path file = dir / "settings.cfg";
    std::ofstream(file) << "pf.particles = 77\nvoxel.size = 0.1\n";
    StudyConfig cfg;
    load_config_file(cfg, file.string());
    CHECK(cfg.trial.pf.particle_count == 77);
    CHECK(cfg.trial.voxel.voxel_size == 0.1);
    CHECK_THROWS(load_config_file(cfg, (dir / "missing.cfg").string()));
}

}  // TEST_SUITE
