// wbcpipe: white-blood-cell classification workflow driver.
//
// Subcommands: segment, extract, train, evaluate, phantom, pipeline.
// Every command is deterministic given (inputs, config, seed). Data goes to
// files; diagnostics go to stderr; exit code 0 means no hard failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wbc/config.hpp"
#include "wbc/error.hpp"
#include "wbc/eval.hpp"
#include "wbc/extract.hpp"
#include "wbc/features.hpp"
#include "wbc/forest.hpp"
#include "wbc/io_image.hpp"
#include "wbc/manifest.hpp"
#include "wbc/matrix.hpp"
#include "wbc/phantom.hpp"
#include "wbc/segmentation.hpp"
#include "wbc/tuning.hpp"

namespace fs = std::filesystem;

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw wbc::Error("cannot open for writing: " + path);
    out << content;
    if (!out) throw wbc::Error("failed writing: " + path);
}

// ---------------------------------------------------------------------------
// segment

int cmd_segment(const std::vector<std::string>& inputs, const std::string& out_dir, bool trace,
                wbc::SegmentationConfig cfg) {
    fs::create_directories(out_dir);
    cfg.keep_trace = trace;
    int failures = 0;
    for (const std::string& input : inputs) {
        try {
            const wbc::RasterImage img = wbc::io::load_image(input);
            const wbc::SegmentationResult result = wbc::segment_cell(img, cfg);
            const std::string stem = fs::path(input).stem().string();
            wbc::io::save_image((fs::path(out_dir) / (stem + "_mask.png")).string(), result.mask);
            if (result.trace)
                for (const auto& [name, member] : wbc::trace_stages()) {
                    const wbc::RasterImage& stage = (*result.trace).*member;
                    wbc::io::save_image(
                        (fs::path(out_dir) / (stem + "_trace_" + name + ".png")).string(),
                        stage.colorspace() == wbc::Colorspace::CMYK
                            ? wbc::extract_plane(stage, 2)
                            : stage);
                }
            std::cerr << input << ": " << result.cell_pixel_count << " cell pixels, "
                      << result.region_count << " candidate region(s)\n";
        } catch (const std::exception& ex) {
            std::cerr << "error: " << input << ": " << ex.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// extract

int cmd_extract(const std::string& manifest_path, const std::string& out_matrix,
                const std::string& skip_report_path, const wbc::RunConfig& cfg) {
    const wbc::DatasetManifest manifest = wbc::load_manifest(manifest_path);
    const wbc::ExtractOutcome outcome =
        wbc::extract_all(manifest, wbc::io::load_image, cfg.extractor(), cfg.segmentation);
    wbc::save_matrix(outcome.matrix, out_matrix);
    if (!skip_report_path.empty()) {
        std::ostringstream report;
        report << "path,reason\n";
        for (const wbc::BatchFailure& f : outcome.failures)
            report << f.path << "," << f.message << "\n";
        write_text_file(skip_report_path, report.str());
    }
    for (const wbc::BatchFailure& f : outcome.failures)
        std::cerr << "skipped: " << f.path << ": " << f.message << "\n";
    std::cerr << "extracted " << outcome.matrix.size() << " of " << manifest.entries.size()
              << " entries -> " << out_matrix << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

std::string tune_csv(const wbc::TuneResult& tune) {
    std::ostringstream out;
    out << "mtry,cv_accuracy\n";
    char buf[40];
    for (std::size_t i = 0; i < tune.grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", tune.cv_accuracy[i]);
        out << tune.grid[i] << "," << buf << "\n";
    }
    return out.str();
}

std::string indices_csv(const std::vector<std::size_t>& indices,
                        const wbc::FeatureMatrix& matrix) {
    std::ostringstream out;
    out << "index,source_id\n";
    for (std::size_t i : indices) out << i << "," << matrix.source_ids[i] << "\n";
    return out.str();
}

int cmd_train(const std::string& matrix_path, const std::string& out_dir,
              const wbc::RunConfig& cfg) {
    const wbc::FeatureMatrix matrix = wbc::load_matrix(matrix_path);
    const std::vector<wbc::Sample> samples = wbc::to_samples(matrix);
    const wbc::TrainOutcome outcome = wbc::run_training_protocol(samples, cfg.protocol());

    fs::create_directories(out_dir);
    wbc::save_model(outcome.model, (fs::path(out_dir) / "model.txt").string());
    write_text_file((fs::path(out_dir) / "tune.csv").string(), tune_csv(outcome.tune));
    write_text_file((fs::path(out_dir) / "validation.csv").string(),
                    indices_csv(outcome.split.validation_indices, matrix));
    write_text_file((fs::path(out_dir) / "training.csv").string(),
                    indices_csv(outcome.split.train_indices, matrix));

    std::ostringstream summary;
    summary << "samples " << samples.size() << "\n";
    summary << "training_pool " << outcome.split.train_indices.size() << "\n";
    summary << "validation " << outcome.split.validation_indices.size() << "\n";
    summary << "chosen_mtry " << outcome.tune.chosen_mtry << "\n";
    summary << "model_digest " << std::hex << wbc::model_digest(outcome.model) << std::dec
            << "\n";
    write_text_file((fs::path(out_dir) / "train_summary.txt").string(), summary.str());
    std::cerr << "trained " << outcome.model.trees.size() << " trees (mtry "
              << outcome.tune.chosen_mtry << ") on " << outcome.split.train_indices.size()
              << " samples -> " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

std::vector<std::size_t> load_indices_csv(const std::string& path,
                                          const wbc::FeatureMatrix& matrix) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw wbc::Error("cannot open index file: " + path);
    std::string line;
    if (!std::getline(in, line) || (line != "index,source_id" && line != "index,source_id\r"))
        throw wbc::SchemaError("index file header mismatch in " + path);
    std::vector<std::size_t> indices;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) throw wbc::SchemaError("bad index row: " + line);
        const std::size_t index = std::stoull(line.substr(0, comma));
        if (index >= matrix.size())
            throw wbc::SchemaError("index " + std::to_string(index) + " out of range in " + path);
        if (matrix.source_ids[index] != line.substr(comma + 1))
            throw wbc::SchemaError("source id mismatch at index " + std::to_string(index) +
                                   " in " + path + " (matrix rows reordered?)");
        indices.push_back(index);
    }
    return indices;
}

int evaluate_confusion_only(const std::string& counts, const std::string& out_dir) {
    std::istringstream in(counts);
    wbc::ConfusionMatrix cm;
    char c1, c2, c3;
    if (!(in >> cm.tn >> c1 >> cm.fp >> c2 >> cm.fn >> c3 >> cm.tp) || c1 != ',' || c2 != ',' ||
        c3 != ',')
        throw wbc::ParameterError("--confusion expects tn,fp,fn,tp");
    const wbc::AccuracyCi ci = wbc::accuracy_with_ci(cm);
    const double f1 = wbc::f1_score(cm);

    char buf[40];
    std::ostringstream table;
    table << "metric,value,lower,upper\n";
    std::snprintf(buf, sizeof buf, "%.17g", ci.accuracy);
    table << "accuracy," << buf << ",";
    std::snprintf(buf, sizeof buf, "%.17g", ci.lower);
    table << buf << ",";
    std::snprintf(buf, sizeof buf, "%.17g", ci.upper);
    table << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", f1);
    table << "f1," << buf << ",,\n";
    table << "tn," << cm.tn << ",,\n";
    table << "fp," << cm.fp << ",,\n";
    table << "fn," << cm.fn << ",,\n";
    table << "tp," << cm.tp << ",,\n";

    std::ostringstream text;
    char line[160];
    std::snprintf(line, sizeof line, "Accuracy  %.4f  (95%% CI %.4f - %.4f)\nF1        %.4f\n",
                  ci.accuracy, ci.lower, ci.upper, f1);
    text << line;

    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "metrics.csv").string(), table.str());
    write_text_file((fs::path(out_dir) / "report.txt").string(), text.str());
    std::cerr << text.str();
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& matrix_path,
                 const std::string& validation_path, const std::string& out_dir,
                 const wbc::RunConfig& cfg) {
    const wbc::RandomForestModel model = wbc::load_model(model_path);
    const wbc::FeatureMatrix matrix = wbc::load_matrix(matrix_path);
    const std::vector<wbc::Sample> samples = wbc::to_samples(matrix);
    const std::vector<std::size_t> validation = load_indices_csv(validation_path, matrix);

    std::vector<char> is_validation(samples.size(), 0);
    for (std::size_t i : validation) is_validation[i] = 1;
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!is_validation[i]) pool.push_back(i);
    if (pool.size() != model.n_train)
        throw wbc::SchemaError("training pool size " + std::to_string(pool.size()) +
                               " does not match the model's " + std::to_string(model.n_train));

    std::vector<wbc::CellLabel> truth, predicted;
    for (std::size_t i : validation) {
        truth.push_back(samples[i].label);
        predicted.push_back(wbc::predict(model, samples[i].features).label);
    }
    const wbc::ConfusionMatrix cm = wbc::confusion_from_predictions(truth, predicted);
    const auto mda = wbc::permutation_importance(model, wbc::subset(samples, pool), cfg.seed,
                                                 cfg.importance_repeats);
    const wbc::EvaluationReport report = wbc::build_report(cm, mda);

    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "report.txt").string(), wbc::report_text(report));
    write_text_file((fs::path(out_dir) / "report.csv").string(),
                    wbc::write_report_table(report));
    std::cerr << "validation accuracy " << report.accuracy << " on " << validation.size()
              << " samples -> " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// phantom

int cmd_phantom(const wbc::PhantomSpec& spec, const std::string& out_dir) {
    const wbc::PhantomOutput output = wbc::generate_phantoms(spec, out_dir, wbc::io::save_image);
    std::cerr << "generated " << output.manifest.entries.size() << " images ("
              << spec.per_class << " per class) -> " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline

int cmd_pipeline(wbc::PhantomSpec spec, const std::string& out_dir, const wbc::RunConfig& cfg) {
    spec.seed = cfg.seed;
    const std::string data_dir = (fs::path(out_dir) / "data").string();
    int rc = cmd_phantom(spec, data_dir);
    if (rc != 0) return rc;
    const std::string matrix_path = (fs::path(out_dir) / "features.csv").string();
    rc = cmd_extract((fs::path(data_dir) / "manifest.csv").string(), matrix_path,
                     (fs::path(out_dir) / "skips.csv").string(), cfg);
    if (rc != 0) return rc;
    rc = cmd_train(matrix_path, out_dir, cfg);
    if (rc != 0) return rc;
    return cmd_evaluate((fs::path(out_dir) / "model.txt").string(), matrix_path,
                        (fs::path(out_dir) / "validation.csv").string(), out_dir, cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "White-blood-cell image classification: unified segmentation, 24 explainable "
        "shape/color/texture metrics, and a from-scratch random forest with exact "
        "binomial confidence intervals and permutation variable importance."};
    app.require_subcommand(1);

    std::string config_path, out_path, manifest_path, matrix_path, model_path, validation_path;
    std::string skip_report_path, confusion_counts, spec_path, background = "tissue";
    std::vector<std::string> inputs;
    bool trace = false;
    std::uint64_t seed = 0;
    int trees = 0, folds = 0, grid_max = 0, count = 0, size = 0;
    double delta = -1.0, train_fraction = 0.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key-value config file (flags override it)");
        cmd->add_option("--seed", seed, "RNG seed");
    };
    auto add_protocol = [&](CLI::App* cmd) {
        cmd->add_option("--trees", trees, "trees per forest (default 500)");
        cmd->add_option("--folds", folds, "cross-validation folds (default 5)");
        cmd->add_option("--grid-max", grid_max, "largest per-split feature count (default 10)");
        cmd->add_option("--train-fraction", train_fraction,
                        "training-pool fraction (default 0.8)");
    };

    CLI::App* segment = app.add_subcommand("segment", "extract cell masks from images");
    segment->add_option("inputs", inputs, "input images")->required()->expected(-1);
    segment->add_option("--out", out_path, "output directory")->default_val(".");
    segment->add_flag("--trace", trace, "also write per-stage intermediate images");
    segment->add_option("--delta", delta, "threshold band above the global minimum");
    add_common(segment);

    CLI::App* extract = app.add_subcommand("extract", "compute the 24-metric feature matrix");
    extract->add_option("--manifest", manifest_path, "dataset manifest csv")->required();
    extract->add_option("--out", out_path, "output feature matrix csv")->required();
    extract->add_option("--skip-report", skip_report_path, "write skipped entries here");
    extract->add_option("--delta", delta, "threshold band above the global minimum");
    add_common(extract);

    CLI::App* train = app.add_subcommand(
        "train", "stratified split, cross-validated grid search, final forest");
    train->add_option("--matrix", matrix_path, "feature matrix csv")->required();
    train->add_option("--out", out_path, "output directory")->required();
    add_common(train);
    add_protocol(train);

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "score a model on held-out data and report importance");
    evaluate->add_option("--model", model_path, "model file from train");
    evaluate->add_option("--matrix", matrix_path, "feature matrix csv");
    evaluate->add_option("--validation", validation_path, "validation index csv from train");
    evaluate->add_option("--confusion", confusion_counts,
                         "metrics-only mode: tn,fp,fn,tp counts");
    evaluate->add_option("--out", out_path, "output directory")->required();
    add_common(evaluate);

    CLI::App* phantom = app.add_subcommand("phantom", "generate a synthetic labeled dataset");
    phantom->add_option("--out", out_path, "output directory")->required();
    phantom->add_option("--count", count, "images per class (default 40)");
    phantom->add_option("--size", size, "canvas side in pixels (default 256)");
    phantom->add_option("--background", background, "background style: tissue or black");
    phantom->add_option("--spec", spec_path, "phantom spec file (flags override it)");
    add_common(phantom);

    CLI::App* pipeline =
        app.add_subcommand("pipeline", "phantom -> extract -> train -> evaluate");
    pipeline->add_option("--out", out_path, "output directory")->required();
    pipeline->add_option("--count", count, "images per class (default 40)");
    pipeline->add_option("--size", size, "canvas side in pixels (default 256)");
    pipeline->add_option("--background", background, "background style: tissue or black");
    add_common(pipeline);
    add_protocol(pipeline);

    CLI11_PARSE(app, argc, argv);

    try {
        // Config file first, then explicit flags on top.
        wbc::RunConfig cfg;
        if (!config_path.empty()) cfg = wbc::load_run_config(config_path);
        CLI::App* cmd = app.get_subcommands().front();
        // Not every subcommand defines every flag; treat absent ones as unset.
        auto given = [&](const std::string& name) {
            const CLI::Option* opt = cmd->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        if (given("--seed")) cfg.seed = seed;
        if (given("--trees")) cfg.n_trees = trees;
        if (given("--folds")) cfg.folds = folds;
        if (given("--grid-max")) cfg.grid_max = grid_max;
        if (given("--train-fraction")) cfg.train_fraction = train_fraction;
        if (delta >= 0.0) cfg.segmentation.threshold_delta = delta;

        wbc::PhantomSpec spec = wbc::PhantomSpec::defaults();
        if (!spec_path.empty()) {
            std::ifstream in(spec_path, std::ios::binary);
            if (!in) throw wbc::Error("cannot open spec file: " + spec_path);
            std::ostringstream buf;
            buf << in.rdbuf();
            spec = wbc::parse_phantom_spec(buf.str());
        }
        if (given("--seed")) spec.seed = seed;
        if (count > 0) spec.per_class = count;
        if (size > 0) spec.width = spec.height = size;
        if (given("--background")) spec.background = wbc::parse_background(background);

        if (segment->parsed()) return cmd_segment(inputs, out_path, trace, cfg.segmentation);
        if (extract->parsed())
            return cmd_extract(manifest_path, out_path, skip_report_path, cfg);
        if (train->parsed()) return cmd_train(matrix_path, out_path, cfg);
        if (evaluate->parsed()) {
            const bool confusion_mode = !confusion_counts.empty();
            const bool model_mode =
                !model_path.empty() && !matrix_path.empty() && !validation_path.empty();
            if (confusion_mode == model_mode)
                throw wbc::ParameterError(
                    "evaluate needs either --confusion, or --model + --matrix + --validation");
            if (confusion_mode) return evaluate_confusion_only(confusion_counts, out_path);
            return cmd_evaluate(model_path, matrix_path, validation_path, out_path, cfg);
        }
        if (phantom->parsed()) return cmd_phantom(spec, out_path);
        if (pipeline->parsed()) return cmd_pipeline(spec, out_path, cfg);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
