#include "pbrc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"

#include "pbrc/error.hpp"

namespace pbrc {

namespace {

using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <typename F>
auto stage(std::string_view name, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
}

struct SplitData {
    std::vector<Matrix> frames;
    std::vector<std::string> ids;
    std::vector<std::string> labels;
};

Matrix prepare(const Matrix& raw, const NormStats& norm, int resample) {
    Matrix frames = apply_norm(raw, norm);
    if (resample > 0) frames = resample_sequence(frames, resample);
    return frames;
}

SplitData gather(const Dataset& ds, std::string_view split, const NormStats* norm, int resample) {
    SplitData out;
    for (const std::size_t i : ds.split_indices(split)) {
        const auto& seq = ds.sequences[i];
        out.frames.push_back(norm ? prepare(seq.frames, *norm, resample) : seq.frames);
        out.ids.push_back(seq.id);
        out.labels.push_back(seq.label);
    }
    return out;
}

ordered_json metrics_json(Topology topology, const Metrics& m) {
    ordered_json j;
    j["topology"] = std::string(to_string(topology));
    j["n_samples"] = m.n_samples;
    ordered_json top = ordered_json::object();
    for (const auto& [k, v] : m.top_k) top[std::to_string(k)] = v;
    j["top_k"] = std::move(top);
    ordered_json confusion = ordered_json::array();
    for (const auto& c : m.confusion) {
        confusion.push_back({{"label", c.label}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}});
    }
    j["confusion"] = std::move(confusion);
    return j;
}

double top1_of(const Metrics& m) {
    const auto it = m.top_k.find(1);
    if (it == m.top_k.end()) fail(ErrorKind::Config, "metrics do not include top-1");
    return it->second;
}

std::vector<int> with_top1(std::vector<int> ks) {
    if (std::find(ks.begin(), ks.end(), 1) == ks.end()) ks.insert(ks.begin(), 1);
    return ks;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (const char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

TrainOutcome train_model(const RunConfig& config, const Dataset& ds) {
    config.validate();
    const std::vector<int> ks = with_top1(config.ks);

    const SplitData raw_train = gather(ds, kTrainSplit, nullptr, 0);
    if (raw_train.frames.empty()) fail(ErrorKind::EmptyInput, "normalize: train split is empty");
    const NormStats norm = stage("normalize", [&] { return fit_norm(raw_train.frames); });
    const SplitData train = stage("normalize", [&] { return gather(ds, kTrainSplit, &norm, config.resample); });
    const SplitData val = stage("normalize", [&] { return gather(ds, kValSplit, &norm, config.resample); });

    Encoder encoder = stage("encode", [&] {
        return Encoder::create(config.topology, config.reservoir(), ds.manifest.dim, config.n_brc);
    });

    const auto start = Clock::now();
    const Matrix x_train = stage("encode", [&] {
        return encode_dataset(encoder, train.frames, config.pooling, config.workers, train.ids);
    });
    const double encode_ms = elapsed_ms(start);

    std::optional<Matrix> x_val;
    RidgeReadout readout = stage("fit", [&] {
        if (!config.lambda_sweep) return fit_readout(x_train, train.labels, config.lambda);
        if (val.frames.empty()) fail(ErrorKind::Config, "lambda sweep needs a non-empty val split");
        x_val = encode_dataset(encoder, val.frames, config.pooling, config.workers, val.ids);
        std::optional<RidgeReadout> best;
        double best_top1 = -1.0;
        const int top1_only[] = {1};
        for (const double lambda : lambda_grid()) {
            RidgeReadout candidate = fit_readout(x_train, train.labels, lambda);
            const double top1 = top1_of(evaluate(candidate, *x_val, val.labels, top1_only));
            // Ties go to the larger lambda.
            if (top1 >= best_top1) {
                best_top1 = top1;
                best = std::move(candidate);
            }
        }
        return std::move(*best);
    });
    const double train_ms = elapsed_ms(start);

    TrainOutcome out{ModelArtifact{config, norm, std::move(encoder), std::move(readout)}, {}, std::nullopt,
                     train_ms, encode_ms};
    out.model.config.lambda = out.model.readout.lambda;
    stage("evaluate", [&] {
        out.train_metrics = evaluate(out.model.readout, x_train, train.labels, ks);
        if (!val.frames.empty()) {
            if (!x_val) {
                x_val = encode_dataset(out.model.encoder, val.frames, config.pooling, config.workers, val.ids);
            }
            out.val_metrics = evaluate(out.model.readout, *x_val, val.labels, ks);
        }
        return 0;
    });
    return out;
}

std::optional<std::pair<double, double>> TrainReport::val_top1_mean_sd() const {
    std::vector<double> values;
    for (const auto& r : repeats) {
        if (r.val_top1) values.push_back(*r.val_top1);
    }
    if (values.empty()) return std::nullopt;
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return std::make_pair(mean, sd);
}

double TrainReport::mean_train_time_ms() const {
    if (repeats.empty()) return 0.0;
    double total = 0.0;
    for (const auto& r : repeats) total += r.train_time_ms;
    return total / static_cast<double>(repeats.size());
}

TrainReport cmd_train(const RunConfig& config, const Dataset& ds) {
    config.validate();
    std::optional<TrainReport> report;
    for (int r = 0; r < config.repeats; ++r) {
        RunConfig run = config;
        run.seed = config.seed + static_cast<std::uint64_t>(r);
        TrainOutcome outcome = train_model(run, ds);

        RepeatSummary summary;
        summary.seed = run.seed;
        summary.train_time_ms = outcome.train_time_ms;
        summary.lambda = outcome.model.readout.lambda;
        if (outcome.val_metrics) summary.val_top1 = top1_of(*outcome.val_metrics);

        if (!report) {
            report.emplace(TrainReport{std::move(outcome.model), std::move(outcome.train_metrics),
                                       std::move(outcome.val_metrics), {}});
        }
        report->repeats.push_back(summary);
    }
    return std::move(*report);
}

Metrics evaluate_model(const ModelArtifact& model, const Dataset& ds, std::string_view split,
                       std::span<const int> ks, int workers) {
    const auto indices = ds.split_indices(split);
    if (indices.empty()) fail(ErrorKind::EmptyInput, "split '" + std::string(split) + "' is empty");

    std::vector<std::string> labels;
    for (const std::size_t i : indices) labels.push_back(ds.sequences[i].label);
    std::vector<std::string> unknown;
    for (const auto& label : labels) {
        if (!model.readout.class_index(label)) unknown.push_back(label);
    }
    if (!unknown.empty()) {
        std::string msg = "evaluate: labels not known to the model:";
        for (const auto& label : unknown) msg += " '" + label + "'";
        fail(ErrorKind::UnknownLabel, msg);
    }

    Matrix x(static_cast<Eigen::Index>(indices.size()), model.encoder.encoded_dim());
    parallel_for(indices.size(), workers, [&](std::size_t row) {
        const auto& seq = ds.sequences[indices[row]];
        try {
            x.row(static_cast<Eigen::Index>(row)) = model.features(seq.frames).transpose();
        } catch (const Error& e) {
            throw Error(e.kind(), "sample '" + seq.id + "': " + e.what());
        }
    });
    return evaluate(model.readout, x, labels, ks);
}

std::string format_mmss(double ms) {
    const auto centis = static_cast<long long>(std::llround(std::max(ms, 0.0) / 10.0));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld.%02lld", centis / 6000, (centis % 6000) / 100, centis % 100);
    return buf;
}

std::string format_mean_sd(double mean, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", 100.0 * mean, 100.0 * sd);
    return buf;
}

std::string metrics_report_json(Topology topology, const Metrics& metrics) {
    return metrics_json(topology, metrics).dump(2) + "\n";
}

std::string train_report_json(const TrainReport& report) {
    const Topology topology = report.model.encoder.topology();
    ordered_json j;
    j["topology"] = std::string(to_string(topology));
    j["encoded_dim"] = report.model.encoder.encoded_dim();
    j["lambda"] = report.model.readout.lambda;
    ordered_json repeats = ordered_json::array();
    for (const auto& r : report.repeats) {
        ordered_json row{{"seed", r.seed}, {"lambda", r.lambda}};
        row["val_top1"] = r.val_top1 ? ordered_json(*r.val_top1) : ordered_json(nullptr);
        repeats.push_back(std::move(row));
    }
    j["repeats"] = std::move(repeats);
    if (const auto stats = report.val_top1_mean_sd()) {
        j["val_top1_mean"] = stats->first;
        j["val_top1_sd"] = stats->second;
    }
    j["train"] = metrics_json(topology, report.train_metrics);
    if (report.val_metrics) j["val"] = metrics_json(topology, *report.val_metrics);
    return j.dump(2) + "\n";
}

std::vector<BenchCell> parse_grid(std::string_view text) {
    std::vector<BenchCell> grid;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string item(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos) fail(ErrorKind::Config, "grid entry '" + item + "' must be topology:nodes");
        BenchCell cell;
        cell.topology = parse_topology(item.substr(0, colon));
        RunConfig probe;
        apply_setting(probe, "nodes", item.substr(colon + 1));
        cell.nodes = probe.nodes;
        grid.push_back(cell);
    }
    if (grid.empty()) fail(ErrorKind::Config, "bench grid is empty");
    return grid;
}

std::vector<BenchCell> parity_grid() {
    return {{Topology::Esn, 280}, {Topology::Brc, 140}, {Topology::Pbrc, 70}};
}

std::vector<BenchRow> cmd_bench(const RunConfig& base, std::span<const BenchCell> grid,
                                std::span<const int> workers, const Dataset& ds) {
    if (grid.empty()) fail(ErrorKind::Config, "bench grid is empty");
    if (workers.empty()) fail(ErrorKind::Config, "bench needs at least one workers value");
    std::vector<BenchRow> rows;
    for (const auto& cell : grid) {
        for (const int w : workers) {
            for (int r = 0; r < base.repeats; ++r) {
                RunConfig cfg = base;
                cfg.topology = cell.topology;
                cfg.nodes = cell.nodes;
                cfg.workers = w;
                cfg.seed = base.seed + static_cast<std::uint64_t>(r);

                BenchRow row;
                row.topology = cell.topology;
                row.nodes = cell.nodes;
                row.workers = w;
                row.repeat = r;
                row.seed = cfg.seed;
                const int units = cell.topology == Topology::Esn ? 1 : cell.topology == Topology::Brc ? 2 : 2 * base.n_brc;
                row.encoded_dim = static_cast<Eigen::Index>(units) * cell.nodes;
                try {
                    const TrainOutcome out = train_model(cfg, ds);
                    row.encoded_dim = out.model.encoder.encoded_dim();
                    row.train_time_ms = out.train_time_ms;
                    row.encode_time_ms = out.encode_time_ms;
                    if (out.val_metrics) row.top1 = top1_of(*out.val_metrics);
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
    out << kBenchCsvHeader << '\n';
    char buf[64];
    for (const auto& r : rows) {
        out << to_string(r.topology) << ',' << r.nodes << ',' << r.workers << ',' << r.repeat << ','
            << r.seed << ',' << r.encoded_dim << ',';
        std::snprintf(buf, sizeof buf, "%.3f,%.3f,", r.train_time_ms, r.encode_time_ms);
        out << buf << format_mmss(r.train_time_ms) << ',';
        if (r.top1) {
            std::snprintf(buf, sizeof buf, "%.6f", *r.top1);
            out << buf;
        }
        out << ',' << csv_field(r.error) << '\n';
    }
}

}  // namespace pbrc
