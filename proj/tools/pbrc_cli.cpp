// pbrc: train, evaluate and benchmark reservoir-computing sequence classifiers.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pbrc/config.hpp"
#include "pbrc/dataset.hpp"
#include "pbrc/error.hpp"
#include "pbrc/model.hpp"
#include "pbrc/pipeline.hpp"

namespace {

using namespace pbrc;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Io: return 3;
        case ErrorKind::Parse:
        case ErrorKind::Schema:
        case ErrorKind::Integrity:
        case ErrorKind::EmptyInput: return 4;
        case ErrorKind::Dimension: return 5;
        case ErrorKind::Convergence:
        case ErrorKind::DegenerateMatrix:
        case ErrorKind::Singular:
        case ErrorKind::DegenerateTask: return 6;
        case ErrorKind::UnknownLabel: return 7;
    }
    return 1;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    out << text;
}

/// Run settings shared by train and bench: a --config file applied first,
/// then any flag given on the command line.
struct SettingFlags {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* app, const std::vector<std::string>& keys) {
        app->add_option("--config", config_path, "Flat key = value settings file");
        for (const auto& key : keys) {
            options[key] = app->add_option("--" + key, values[key], "Overrides '" + key + "'");
        }
    }

    RunConfig resolve() const {
        RunConfig config;
        if (!config_path.empty()) {
            for (const auto& [key, value] : parse_key_values(read_text(config_path))) {
                apply_setting(config, key, value);
            }
        }
        for (const auto& [key, option] : options) {
            if (option->count() > 0) apply_setting(config, key, values.at(key));
        }
        config.validate();
        return config;
    }
};

const std::vector<std::string> kRunKeys = {"topology", "nodes",   "alpha",  "rho",      "input_scaling",
                                           "lambda",   "pooling", "washout", "seed",    "repeats",
                                           "n_brc",    "resample", "ks",     "workers"};

std::string capitalized_topology(Topology t) {
    switch (t) {
        case Topology::Esn: return "ESN";
        case Topology::Brc: return "BRC";
        case Topology::Pbrc: return "PBRC";
    }
    return "?";
}

int run_train(const SettingFlags& flags, const std::string& manifest, const std::string& data,
              const std::string& out_path, const std::string& report_path) {
    const RunConfig config = flags.resolve();
    const Dataset ds = load_dataset(manifest, data);
    const TrainReport report = cmd_train(config, ds);

    if (!out_path.empty()) save_model(report.model, out_path);
    const std::string report_json = train_report_json(report);
    if (!report_path.empty()) write_text(report_path, report_json);

    const auto& first = report.repeats.front();
    std::printf("topology     %s\n", std::string(to_string(report.model.encoder.topology())).c_str());
    std::printf("encoded_dim  %lld\n", static_cast<long long>(report.model.encoder.encoded_dim()));
    std::printf("lambda       %g\n", first.lambda);
    for (const auto& r : report.repeats) {
        std::printf("seed %-8llu train_time %s (%.3f ms)", static_cast<unsigned long long>(r.seed),
                    format_mmss(r.train_time_ms).c_str(), r.train_time_ms);
        if (r.val_top1) std::printf("  val_top1 %.4f", *r.val_top1);
        std::printf("\n");
    }
    const auto stats = report.val_top1_mean_sd();
    std::printf("\nMethod  Accuracy (%% ± SD)  Training time (mm:ss.ms)  Device\n");
    std::printf("%-6s  %-18s  %-24s  CPU\n", capitalized_topology(report.model.encoder.topology()).c_str(),
                stats ? format_mean_sd(stats->first, stats->second).c_str() : "n/a",
                format_mmss(report.mean_train_time_ms()).c_str());
    return 0;
}

int run_eval(const std::string& model_path, const std::string& manifest, const std::string& data,
             const std::string& split, const std::string& ks_text, int workers, const std::string& report_path) {
    const ModelArtifact model = load_model(model_path);
    const Dataset ds = load_dataset(manifest, data);
    const std::vector<int> ks = parse_int_list(ks_text);
    const Metrics metrics = evaluate_model(model, ds, split, ks, workers);
    const std::string report = metrics_report_json(model.encoder.topology(), metrics);
    if (report_path.empty()) {
        std::cout << report;
    } else {
        write_text(report_path, report);
        for (const auto& [k, v] : metrics.top_k) std::printf("top-%d %.4f\n", k, v);
    }
    return 0;
}

int run_bench(const SettingFlags& flags, const std::string& grid_text, const std::string& workers_text,
              const std::string& manifest, const std::string& data, const std::string& out_path) {
    const RunConfig base = flags.resolve();
    const auto grid = grid_text.empty() ? parity_grid() : parse_grid(grid_text);
    const auto workers = parse_int_list(workers_text);
    const Dataset ds = load_dataset(manifest, data);
    const auto rows = cmd_bench(base, grid, workers, ds);
    if (out_path.empty()) {
        write_bench_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write " + out_path);
        write_bench_csv(out, rows);
        for (const auto& r : rows) {
            std::printf("%-5s nodes=%-4d workers=%-2d seed=%-6llu %s%s\n", std::string(to_string(r.topology)).c_str(),
                        r.nodes, r.workers, static_cast<unsigned long long>(r.seed), format_mmss(r.train_time_ms).c_str(),
                        r.error.empty() ? "" : ("  error: " + r.error).c_str());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reservoir-computing sequence classifier (ESN / BRC / PBRC)"};
    app.require_subcommand(1);

    std::string manifest;
    std::string data;
    std::string out;
    std::string report;
    int workers = 1;

    SettingFlags train_flags;
    auto* train = app.add_subcommand("train", "Fit a model on the train split");
    train->add_option("--manifest", manifest, "Dataset manifest.json")->required();
    train->add_option("--data", data, "Dataset data.jsonl")->required();
    train->add_option("--out", out, "Where to write the model artifact");
    train->add_option("--report", report, "Where to write the JSON training report");
    train_flags.attach(train, kRunKeys);

    std::string model_path;
    std::string split = std::string(kTestSplit);
    std::string ks = "1,5,10";
    auto* eval = app.add_subcommand("eval", "Top-k evaluation of a trained model");
    eval->add_option("--model", model_path, "Model artifact from train")->required();
    eval->add_option("--manifest", manifest)->required();
    eval->add_option("--data", data)->required();
    eval->add_option("--split", split, "Split to score")->capture_default_str();
    eval->add_option("--ks", ks, "Comma-separated k values")->capture_default_str();
    eval->add_option("--workers", workers)->check(CLI::PositiveNumber);
    eval->add_option("--out,--report", report, "Where to write the JSON report (default stdout)");

    SettingFlags bench_flags;
    std::string grid;
    std::string bench_workers = "1";
    auto* bench = app.add_subcommand("bench", "Training-time benchmark across topologies");
    bench->add_option("--manifest", manifest)->required();
    bench->add_option("--data", data)->required();
    bench->add_option("--grid", grid, "topology:nodes list (default esn:280,brc:140,pbrc:70)");
    bench->add_option("--workers", bench_workers, "Comma-separated worker counts")->capture_default_str();
    bench->add_option("--out", out, "CSV output (default stdout)");
    bench_flags.attach(bench, {"alpha", "rho", "input_scaling", "lambda", "pooling", "washout", "seed", "repeats",
                               "n_brc", "resample", "ks"});

    SynthParams synth_params;
    int per_class = 0;
    std::string out_dir;
    auto* synth = app.add_subcommand("synth", "Write a synthetic sinusoid dataset");
    synth->add_option("--manifest", manifest, "manifest.json output path");
    synth->add_option("--data", data, "data.jsonl output path");
    synth->add_option("--out", out_dir, "Directory receiving manifest.json and data.jsonl");
    synth->add_option("--classes", synth_params.n_classes)->capture_default_str();
    synth->add_option("--per-class", per_class, "Samples per class, split 60/20/20");
    synth->add_option("--train", synth_params.n_train)->capture_default_str();
    synth->add_option("--val", synth_params.n_val)->capture_default_str();
    synth->add_option("--test", synth_params.n_test)->capture_default_str();
    synth->add_option("--frames", synth_params.t_len)->capture_default_str();
    synth->add_option("--dim", synth_params.dim)->capture_default_str();
    synth->add_option("--noise", synth_params.noise_sd)->capture_default_str();
    synth->add_option("--seed", synth_params.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*train) return run_train(train_flags, manifest, data, out, report);
        if (*eval) return run_eval(model_path, manifest, data, split, ks, workers, report);
        if (*bench) return run_bench(bench_flags, grid, bench_workers, manifest, data, out);
        if (*synth) {
            if (per_class > 0) synth_params.set_per_class(per_class);
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                if (manifest.empty()) manifest = (std::filesystem::path(out_dir) / "manifest.json").string();
                if (data.empty()) data = (std::filesystem::path(out_dir) / "data.jsonl").string();
            }
            if (manifest.empty() || data.empty()) {
                fail(ErrorKind::Config, "synth needs --out or both --manifest and --data");
            }
            const Dataset ds = synth_generate(synth_params);
            save_dataset(ds, manifest, data);
            std::printf("wrote %zu sequences (%d train, %d val, %d test) to %s and %s\n", ds.sequences.size(),
                        synth_params.n_train, synth_params.n_val, synth_params.n_test, manifest.c_str(), data.c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "pbrc: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "pbrc: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
