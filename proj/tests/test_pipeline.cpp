#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include <unistd.h>

#include "pbrc/config.hpp"
#include "pbrc/error.hpp"
#include "pbrc/model.hpp"
#include "pbrc/pipeline.hpp"

using namespace pbrc;
namespace fs = std::filesystem;

namespace {

Dataset small_synth(int classes = 4, int per_class = 10) {
    SynthParams p;
    p.n_classes = classes;
    p.t_len = 32;
    p.dim = 8;
    p.set_per_class(per_class);
    return synth_generate(p);
}

RunConfig small_config(Topology t = Topology::Pbrc) {
    RunConfig c;
    c.topology = t;
    c.nodes = 20;
    c.ks = {1, 2, 4};
    return c;
}

}  // namespace

TEST(Config, KeyValueGrammar) {
    const auto kv = parse_key_values("# comment\n topology = brc \n\nnodes=140\r\nlambda = sweep\n");
    ASSERT_EQ(kv.size(), 3u);
    EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"topology", "brc"}));
    EXPECT_EQ(kv[1].second, "140");

    RunConfig c;
    for (const auto& [k, v] : kv) apply_setting(c, k, v);
    EXPECT_EQ(c.topology, Topology::Brc);
    EXPECT_EQ(c.nodes, 140);
    EXPECT_TRUE(c.lambda_sweep);

    apply_setting(c, "lambda", "0.5");
    EXPECT_FALSE(c.lambda_sweep);
    EXPECT_EQ(c.lambda, 0.5);
    apply_setting(c, "ks", "1, 3,7");
    EXPECT_EQ(c.ks, (std::vector<int>{1, 3, 7}));
    apply_setting(c, "seed", "18446744073709551615");
    EXPECT_EQ(c.seed, 18446744073709551615ULL);
}

TEST(Config, Errors) {
    try {
        parse_key_values("a = 1\nbroken line\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    RunConfig c;
    EXPECT_THROW(apply_setting(c, "colour", "red"), Error);
    EXPECT_THROW(apply_setting(c, "nodes", "7.5"), Error);
    EXPECT_THROW(apply_setting(c, "alpha", "fast"), Error);
    EXPECT_THROW(apply_setting(c, "topology", "gru"), Error);
    c.repeats = 0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Config, DefaultsAndParity) {
    const RunConfig c;
    EXPECT_EQ(c.nodes, 70);
    EXPECT_EQ(c.alpha, 0.6);
    EXPECT_EQ(c.rho, 0.3);
    EXPECT_EQ(c.n_brc, 2);
    EXPECT_EQ(c.topology, Topology::Pbrc);
    EXPECT_EQ(parity_nodes(Topology::Esn, 280), 280);
    EXPECT_EQ(parity_nodes(Topology::Brc, 280), 140);
    EXPECT_EQ(parity_nodes(Topology::Pbrc, 280), 70);
}

TEST(Format, MinutesSeconds) {
    EXPECT_EQ(format_mmss(18670.0), "00:18.67");
    EXPECT_EQ(format_mmss(0.0), "00:00.00");
    EXPECT_EQ(format_mmss(61234.0), "01:01.23");
    EXPECT_EQ(format_mmss(59999.0), "01:00.00");
    EXPECT_EQ(format_mmss(4.9), "00:00.00");
    EXPECT_EQ(format_mean_sd(0.6085, 0.0138), "60.85 ± 1.38");
}

TEST(Train, StagePrefixedErrors) {
    Dataset ds = small_synth();
    ds.manifest.splits["train"].clear();
    try {
        train_model(small_config(), ds);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()).rfind("normalize", 0), 0u) << e.what();
    }

    Dataset one_class = small_synth();
    for (auto& s : one_class.sequences) s.label = one_class.manifest.classes.front();
    try {
        train_model(small_config(), one_class);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateTask);
        EXPECT_EQ(std::string(e.what()).rfind("fit", 0), 0u) << e.what();
    }
}

TEST(Train, AllTopologiesLearnSynthetic) {
    const Dataset ds = small_synth();
    for (auto t : {Topology::Esn, Topology::Brc, Topology::Pbrc}) {
        const TrainOutcome out = train_model(small_config(t), ds);
        ASSERT_TRUE(out.val_metrics.has_value());
        EXPECT_GE(out.val_metrics->top_k.at(1), 0.75) << to_string(t);
        EXPECT_LE(out.val_metrics->top_k.at(1), out.val_metrics->top_k.at(2));
        EXPECT_LE(out.val_metrics->top_k.at(2), out.val_metrics->top_k.at(4));
        EXPECT_GT(out.train_time_ms, 0.0);
        EXPECT_GE(out.train_time_ms, out.encode_time_ms);
    }
}

TEST(Train, LambdaSweepPicksGridValue) {
    RunConfig c = small_config();
    c.lambda_sweep = true;
    const TrainOutcome out = train_model(c, small_synth());
    const auto grid = lambda_grid();
    EXPECT_NE(std::find(grid.begin(), grid.end(), out.model.readout.lambda), grid.end());
    EXPECT_EQ(out.model.config.lambda, out.model.readout.lambda);
}

TEST(Train, InterpolatingModelScoresTrainPerfectly) {
    RunConfig c = small_config();
    c.lambda = 1e-9;
    const Dataset ds = small_synth();
    const TrainOutcome out = train_model(c, ds);
    const int ks[] = {1};
    EXPECT_EQ(evaluate_model(out.model, ds, kTrainSplit, ks).top_k.at(1), 1.0);
}

TEST(Train, RepeatsReportMeanAndSampleSd) {
    RunConfig c = small_config();
    c.repeats = 3;
    const TrainReport report = cmd_train(c, small_synth());
    ASSERT_EQ(report.repeats.size(), 3u);
    EXPECT_EQ(report.repeats[0].seed, 42u);
    EXPECT_EQ(report.repeats[2].seed, 44u);
    const auto stats = report.val_top1_mean_sd();
    ASSERT_TRUE(stats.has_value());
    double mean = 0.0;
    for (const auto& r : report.repeats) mean += *r.val_top1 / 3.0;
    double ss = 0.0;
    for (const auto& r : report.repeats) ss += (*r.val_top1 - mean) * (*r.val_top1 - mean);
    EXPECT_NEAR(stats->first, mean, 1e-15);
    EXPECT_NEAR(stats->second, std::sqrt(ss / 2.0), 1e-15);
    EXPECT_EQ(report.model.config.seed, 42u);
}

TEST(Model, RoundTripPredictsBitExactly) {
    const Dataset ds = small_synth();
    for (auto t : {Topology::Esn, Topology::Brc, Topology::Pbrc}) {
        const TrainOutcome out = train_model(small_config(t), ds);
        const std::string text = model_to_json(out.model);
        const ModelArtifact back = model_from_json(text);
        EXPECT_EQ(model_to_json(back), text);
        EXPECT_EQ(back.encoder.topology(), t);
        for (const auto& seq : ds.sequences) {
            EXPECT_EQ(back.scores(seq.frames), out.model.scores(seq.frames)) << seq.id;
        }
    }
}

TEST(Model, FileRoundTripAndErrors) {
    const fs::path path = fs::temp_directory_path() / ("pbrc_model_" + std::to_string(::getpid()) + ".json");
    const TrainOutcome out = train_model(small_config(), small_synth());
    save_model(out.model, path);
    const ModelArtifact back = load_model(path);
    EXPECT_EQ(model_to_json(back), model_to_json(out.model));
    fs::remove(path);

    EXPECT_THROW(load_model(path), Error);
    EXPECT_THROW(model_from_json("{}"), Error);
    std::string text = model_to_json(out.model);
    text.replace(text.find("\"format_version\":1"), 18, "\"format_version\":9");
    EXPECT_THROW(model_from_json(text), Error);
}

TEST(Model, DeterministicAcrossRuns) {
    const Dataset ds = small_synth();
    const TrainReport a = cmd_train(small_config(), ds);
    const TrainReport b = cmd_train(small_config(), ds);
    EXPECT_EQ(model_to_json(a.model), model_to_json(b.model));
    EXPECT_EQ(train_report_json(a), train_report_json(b));
}

TEST(Eval, WorkersAndRepeatabilityAgree) {
    const Dataset ds = small_synth();
    const TrainOutcome out = train_model(small_config(), ds);
    const int ks[] = {1, 2, 4};
    const std::string a = metrics_report_json(Topology::Pbrc, evaluate_model(out.model, ds, kTestSplit, ks, 1));
    const std::string b = metrics_report_json(Topology::Pbrc, evaluate_model(out.model, ds, kTestSplit, ks, 3));
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("\"confusion\""), std::string::npos);
}

TEST(Eval, UnknownLabel) {
    Dataset ds = small_synth();
    const TrainOutcome out = train_model(small_config(), ds);
    ds.manifest.classes.push_back("stranger");
    ds.sequences[ds.split_indices(kTestSplit).front()].label = "stranger";
    const int ks[] = {1};
    try {
        evaluate_model(out.model, ds, kTestSplit, ks);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownLabel);
        EXPECT_NE(std::string(e.what()).find("stranger"), std::string::npos);
    }
}

TEST(Bench, ParityGridRows) {
    RunConfig base = small_config();
    const auto grid = parse_grid("esn:280,brc:140,pbrc:70");
    ASSERT_EQ(grid.size(), 3u);
    const int workers[] = {1};
    const auto rows = cmd_bench(base, grid, workers, small_synth());
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.encoded_dim, 280);
        EXPECT_TRUE(r.error.empty()) << r.error;
        EXPECT_EQ(r.seed, 42u);
        EXPECT_TRUE(r.top1.has_value());
    }
    std::ostringstream csv;
    write_bench_csv(csv, rows);
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header, kBenchCsvHeader);
    int n = 0;
    for (std::string line; std::getline(lines, line);) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10) << line;
        ++n;
    }
    EXPECT_EQ(n, 3);
}

TEST(Bench, FailuresRecordedInRow) {
    RunConfig base = small_config();
    const std::vector<BenchCell> grid{{Topology::Esn, 0}, {Topology::Pbrc, 10}};
    const int workers[] = {1};
    const auto rows = cmd_bench(base, grid, workers, small_synth());
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_FALSE(rows[0].error.empty());
    EXPECT_TRUE(rows[1].error.empty());
    EXPECT_THROW(parse_grid("esn"), Error);
    EXPECT_THROW(parse_grid(""), Error);
}
