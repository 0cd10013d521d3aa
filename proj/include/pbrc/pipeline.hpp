#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pbrc/config.hpp"
#include "pbrc/dataset.hpp"
#include "pbrc/model.hpp"

namespace pbrc {

/// One seed's training: fit_norm -> encode_dataset -> fit_readout.
struct TrainOutcome {
    ModelArtifact model;
    Metrics train_metrics;
    std::optional<Metrics> val_metrics;
    /// Wall clock of encoding plus readout fitting (and the lambda sweep, when
    /// enabled). Excludes loading and normalization.
    double train_time_ms = 0.0;
    double encode_time_ms = 0.0;
};

/// Trains with config.seed. Errors are rethrown prefixed with the stage name
/// ("normalize", "encode", "fit", "evaluate").
TrainOutcome train_model(const RunConfig& config, const Dataset& ds);

struct RepeatSummary {
    std::uint64_t seed = 0;
    double train_time_ms = 0.0;
    std::optional<double> val_top1;
    double lambda = 0.0;
};

struct TrainReport {
    ModelArtifact model;  // from the first seed
    Metrics train_metrics;
    std::optional<Metrics> val_metrics;
    std::vector<RepeatSummary> repeats;

    /// Mean and sample standard deviation (n - 1) of validation top-1 across
    /// repeats; SD is 0 for a single repeat.
    std::optional<std::pair<double, double>> val_top1_mean_sd() const;
    double mean_train_time_ms() const;
};

/// Repeats training for seeds seed .. seed + repeats - 1.
TrainReport cmd_train(const RunConfig& config, const Dataset& ds);

/// Scores `split` of `ds` with a trained model.
Metrics evaluate_model(const ModelArtifact& model, const Dataset& ds, std::string_view split,
                       std::span<const int> ks, int workers = 1);

/// mm:ss.cc with two-digit minutes, e.g. 18670 ms -> "00:18.67".
std::string format_mmss(double ms);

/// Table-1 style "60.85 ± 1.38" (percent, two decimals).
std::string format_mean_sd(double mean, double sd);

/// {"topology", "top_k": {"1": ...}, "n_samples", "confusion": [...]}. No
/// timing, so repeated runs produce identical bytes.
std::string metrics_report_json(Topology topology, const Metrics& metrics);

/// Deterministic training report (no wall-clock fields).
std::string train_report_json(const TrainReport& report);

struct BenchCell {
    Topology topology = Topology::Pbrc;
    int nodes = 70;
};

/// "esn:280,brc:140,pbrc:70" style grid.
std::vector<BenchCell> parse_grid(std::string_view text);
std::vector<BenchCell> parity_grid();

struct BenchRow {
    Topology topology = Topology::Pbrc;
    int nodes = 0;
    int workers = 1;
    int repeat = 0;
    std::uint64_t seed = 0;
    Eigen::Index encoded_dim = 0;
    double train_time_ms = 0.0;
    double encode_time_ms = 0.0;
    std::optional<double> top1;
    std::string error;
};

/// One row per cell x workers x repeat. Every topology uses the same seeds.
/// Failures are captured in the row's error column and the run continues.
std::vector<BenchRow> cmd_bench(const RunConfig& base, std::span<const BenchCell> grid,
                                std::span<const int> workers, const Dataset& ds);

inline constexpr std::string_view kBenchCsvHeader =
    "topology,nodes,workers,repeat,seed,encoded_dim,train_time_ms,encode_time_ms,train_time,top1,error";

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

}  // namespace pbrc
