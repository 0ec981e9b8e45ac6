#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vitals/commands.hpp"
#include "vitals/errors.hpp"

namespace {

// Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.
int run(int argc, char** argv) {
    CLI::App app{"vitals - PPG heart-rate and SpO2 estimation engine"};
    app.require_subcommand(1);

    std::string frames_dir, out_path, config_path, model_path, signal_csv;
    std::string split = "test", dataset_dir;
    int jobs = 1;

    auto* extract = app.add_subcommand("extract", "mean RGB per PPM frame -> signal CSV");
    extract->add_option("frames_dir", frames_dir, "directory of P6 .ppm frames")->required();
    extract->add_option("--out", out_path, "output signal CSV")->required();

    auto* train = app.add_subcommand("train", "train a model from a run config");
    train->add_option("--config", config_path, "key=value run config")->required();

    auto* evaluate = app.add_subcommand("evaluate", "MAE of a trained model on a split");
    evaluate->add_option("--model", model_path, "MTVL model file")->required();
    evaluate->add_option("--config", config_path, "run config used for training")->required();
    evaluate->add_option("--split", split, "train|val|test (default test)");
    evaluate->add_option("--dataset", dataset_dir, "override dataset directory");
    evaluate->add_option("--out", out_path, "write the JSON report here instead of stdout");

    auto* infer = app.add_subcommand("infer", "per-window estimates from a signal CSV");
    infer->add_option("signal_csv", signal_csv, "idx,r,g,b or idx,v CSV at 30 Hz")->required();
    infer->add_option("--model", model_path, "MTVL model file")->required();
    infer->add_option("--out", out_path, "write JSON lines here instead of stdout");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every layer and loss");

    auto* report = app.add_subcommand("report", "4 architectures x 4 losses test-MAE grid");
    report->add_option("--config", config_path, "run config supplying dataset and defaults")
        ->required();
    report->add_option("--out", out_path, "output grid CSV")->required();
    report->add_option("--jobs", jobs, "concurrent training runs (default 1)");
    report->add_option("--dataset", dataset_dir, "override dataset directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (extract->parsed()) {
            vitals::cmd::extract(frames_dir, out_path, std::cerr);
        } else if (train->parsed()) {
            vitals::cmd::train_run(vitals::parse_run_config(config_path));
        } else if (evaluate->parsed()) {
            auto cfg = vitals::parse_run_config(config_path);
            auto result = vitals::cmd::evaluate_run(cfg, model_path, split, dataset_dir);
            std::string json = vitals::cmd::eval_result_json(result);
            if (out_path.empty()) {
                std::cout << json << '\n';
            } else {
                std::ofstream out(out_path);
                if (!out) throw vitals::DatasetError("cannot open output file: " + out_path);
                out << json << '\n';
            }
        } else if (infer->parsed()) {
            if (out_path.empty()) {
                vitals::cmd::infer(model_path, signal_csv, std::cout, std::cerr);
            } else {
                std::ofstream out(out_path);
                if (!out) throw vitals::DatasetError("cannot open output file: " + out_path);
                vitals::cmd::infer(model_path, signal_csv, out, std::cerr);
            }
        } else if (gradcheck->parsed()) {
            return vitals::cmd::gradcheck(std::cout) ? 0 : 1;
        } else if (report->parsed()) {
            auto cfg = vitals::parse_run_config(config_path);
            if (!dataset_dir.empty()) cfg.dataset_dir = dataset_dir;
            vitals::cmd::write_report_csv(vitals::cmd::report(cfg, jobs, std::cerr), out_path);
        }
    } catch (const vitals::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
