// End-to-end tests of the command-line driver: every subcommand is run as a
// real child process against small synthetic datasets, and its file outputs
// are loaded back through the library.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wbc/eval.hpp"
#include "wbc/forest.hpp"
#include "wbc/io_image.hpp"
#include "wbc/manifest.hpp"
#include "wbc/matrix.hpp"
#include "wbc/phantom.hpp"
#include "wbc/raster.hpp"

using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch_root() {
    static const fs::path root = [] {
        const fs::path p =
            fs::temp_directory_path() / ("wbc_cli_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    static const struct Cleanup {
        ~Cleanup() {
            std::error_code ec;
            fs::remove_all(fs::temp_directory_path() /
                               ("wbc_cli_" + std::to_string(::getpid())),
                           ec);
        }
    } cleanup;
    return root;
}

/// Run the driver with the given arguments; returns the child's exit code.
int run_cli(const std::string& args) {
    const std::string log = (scratch_root() / "cli.log").string();
    const std::string cmd = std::string(WBC_CLI_PATH) + " " + args + " >>" + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t count_pngs(const fs::path& dir) {
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(dir))
        n += entry.path().extension() == ".png";
    return n;
}

/// Shared 5-per-class phantom dataset, generated once via the CLI.
const fs::path& dataset_dir() {
    static const fs::path dir = [] {
        const fs::path d = scratch_root() / "data";
        REQUIRE(run_cli("phantom --out " + d.string() + " --count 5 --seed 9") == 0);
        return d;
    }();
    return dir;
}

/// Shared feature matrix extracted from dataset_dir() via the CLI.
const fs::path& features_csv() {
    static const fs::path path = [] {
        const fs::path p = scratch_root() / "features.csv";
        REQUIRE(run_cli("extract --manifest " + (dataset_dir() / "manifest.csv").string() +
                        " --out " + p.string() + " --skip-report " +
                        (scratch_root() / "skips.csv").string()) == 0);
        return p;
    }();
    return path;
}

/// Shared training run on features_csv() via the CLI.
const fs::path& train_dir() {
    static const fs::path dir = [] {
        const fs::path d = scratch_root() / "train";
        REQUIRE(run_cli("train --matrix " + features_csv().string() + " --out " + d.string() +
                        " --trees 30 --folds 2 --grid-max 3 --seed 5") == 0);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_CASE("phantom subcommand writes images, masks, manifest, and a spec echo") {
    const fs::path& dir = dataset_dir();
    REQUIRE(count_pngs(dir / "images") == 10);
    REQUIRE(count_pngs(dir / "masks") == 10);

    const wbc::DatasetManifest manifest =
        wbc::load_manifest((dir / "manifest.csv").string());
    REQUIRE(manifest.entries.size() == 10);
    REQUIRE(manifest.entries[0].label == wbc::CellLabel::Healthy);
    REQUIRE(manifest.entries[9].label == wbc::CellLabel::Malignant);

    const wbc::PhantomSpec spec = wbc::parse_phantom_spec(slurp(dir / "phantom_spec.txt"));
    REQUIRE(spec.per_class == 5);
    REQUIRE(spec.seed == 9);
}

TEST_CASE("extract subcommand writes a loadable, reproducible matrix") {
    const wbc::FeatureMatrix matrix = wbc::load_matrix(features_csv().string());
    REQUIRE(matrix.size() == 10);
    for (std::size_t i = 0; i < 5; ++i) {
        REQUIRE(matrix.labels[i] == wbc::CellLabel::Healthy);
        REQUIRE(matrix.labels[5 + i] == wbc::CellLabel::Malignant);
    }
    REQUIRE(slurp(scratch_root() / "skips.csv") == "path,reason\n");

    const fs::path rerun = scratch_root() / "features_rerun.csv";
    REQUIRE(run_cli("extract --manifest " + (dataset_dir() / "manifest.csv").string() +
                    " --out " + rerun.string()) == 0);
    REQUIRE(slurp(rerun) == slurp(features_csv()));
}

TEST_CASE("train subcommand persists a reproducible model and its indices") {
    const fs::path& dir = train_dir();
    const wbc::RandomForestModel model =
        wbc::load_model((dir / "model.txt").string());
    REQUIRE(model.trees.size() == 30);
    REQUIRE(model.n_train == 8);  // 10 samples, stratified 80/20

    const std::string tune = slurp(dir / "tune.csv");
    REQUIRE(tune.rfind("mtry,cv_accuracy\n", 0) == 0);
    REQUIRE(std::count(tune.begin(), tune.end(), '\n') == 4);  // header + grid 1..3

    const std::string validation = slurp(dir / "validation.csv");
    REQUIRE(validation.rfind("index,source_id\n", 0) == 0);
    REQUIRE(std::count(validation.begin(), validation.end(), '\n') == 3);  // header + 2

    const std::string summary = slurp(dir / "train_summary.txt");
    REQUIRE(summary.find("training_pool 8") != std::string::npos);
    REQUIRE(summary.find("chosen_mtry ") != std::string::npos);
    REQUIRE(summary.find("model_digest ") != std::string::npos);

    const fs::path again = scratch_root() / "train_again";
    REQUIRE(run_cli("train --matrix " + features_csv().string() + " --out " + again.string() +
                    " --trees 30 --folds 2 --grid-max 3 --seed 5") == 0);
    REQUIRE(slurp(again / "model.txt") == slurp(train_dir() / "model.txt"));
}

TEST_CASE("evaluate subcommand scores the held-out validation set") {
    const fs::path out = scratch_root() / "eval";
    REQUIRE(run_cli("evaluate --model " + (train_dir() / "model.txt").string() + " --matrix " +
                    features_csv().string() + " --validation " +
                    (train_dir() / "validation.csv").string() + " --out " + out.string() +
                    " --seed 5") == 0);

    const wbc::EvaluationReport report = wbc::parse_report_table(slurp(out / "report.csv"));
    REQUIRE(report.confusion.total() == 2);  // one held-out cell per class
    REQUIRE(report.accuracy >= 0.0);
    REQUIRE(report.accuracy <= 1.0);
    REQUIRE(fs::exists(out / "report.txt"));
}

TEST_CASE("evaluate subcommand computes metrics from raw confusion counts") {
    const fs::path out = scratch_root() / "eval_counts";
    REQUIRE(run_cli("evaluate --confusion 522,133,156,1322 --out " + out.string()) == 0);

    double accuracy = -1, lower = -1, upper = -1, f1 = -1;
    std::istringstream in(slurp(out / "metrics.csv"));
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string metric;
        std::getline(row, metric, ',');
        std::string v, lo, hi;
        std::getline(row, v, ',');
        std::getline(row, lo, ',');
        std::getline(row, hi, ',');
        if (metric == "accuracy") {
            accuracy = std::stod(v);
            lower = std::stod(lo);
            upper = std::stod(hi);
        } else if (metric == "f1") {
            f1 = std::stod(v);
        }
    }
    REQUIRE(accuracy == Approx(1844.0 / 2133.0).margin(1e-9));
    REQUIRE(f1 == Approx(2644.0 / 2933.0).margin(1e-9));
    REQUIRE(lower == Approx(0.8493).margin(5e-4));
    REQUIRE(upper == Approx(0.8788).margin(5e-4));
}

TEST_CASE("evaluate subcommand rejects ambiguous mode selection") {
    const fs::path out = scratch_root() / "eval_bad";
    REQUIRE(run_cli("evaluate --out " + out.string()) == 1);
    REQUIRE(run_cli("evaluate --confusion 1,2,3,4 --model m.txt --matrix f.csv "
                    "--validation v.csv --out " +
                    out.string()) == 1);
    REQUIRE(run_cli("evaluate --confusion 1:2:3:4 --out " + out.string()) == 1);
}

TEST_CASE("segment subcommand writes masks and optional stage traces") {
    const fs::path image = dataset_dir() / "images" / "healthy_000.png";
    const fs::path out = scratch_root() / "segs";
    REQUIRE(run_cli("segment " + image.string() + " --out " + out.string() + " --trace") == 0);

    const wbc::BinaryMask mask =
        wbc::io::load_mask((out / "healthy_000_mask.png").string());
    REQUIRE(wbc::foreground_count(mask) > 1000);
    for (const char* stage : {"1_remapped", "2_yellow", "3_filtered", "4_stretched",
                              "5_equalized", "6_combined", "7_candidates"})
        REQUIRE(fs::exists(out / ("healthy_000_trace_" + std::string(stage) + ".png")));

    REQUIRE(run_cli("segment " + (scratch_root() / "missing.png").string() + " --out " +
                    out.string()) == 1);
}

TEST_CASE("pipeline subcommand chains the whole workflow") {
    const fs::path out = scratch_root() / "pipe";
    REQUIRE(run_cli("pipeline --out " + out.string() +
                    " --count 5 --trees 20 --folds 2 --grid-max 2 --seed 3") == 0);

    REQUIRE(count_pngs(out / "data" / "images") == 10);
    REQUIRE(wbc::load_matrix((out / "features.csv").string()).size() == 10);
    const wbc::RandomForestModel model = wbc::load_model((out / "model.txt").string());
    REQUIRE(model.trees.size() == 20);

    const wbc::EvaluationReport report =
        wbc::parse_report_table(slurp(out / "report.csv"));
    REQUIRE(report.confusion.total() == 2);
}
