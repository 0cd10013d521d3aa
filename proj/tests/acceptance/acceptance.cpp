// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed here, not tunable.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <sched.h>
#include <unistd.h>

#include "oracles.hpp"
#include "pbrc/bidir.hpp"
#include "pbrc/dataset.hpp"
#include "pbrc/error.hpp"
#include "pbrc/log.hpp"
#include "pbrc/model.hpp"
#include "pbrc/numerics.hpp"
#include "pbrc/parallel.hpp"
#include "pbrc/pipeline.hpp"
#include "pbrc/reservoir.hpp"

using namespace pbrc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::uint64_t pick(RngStream& rng, std::uint64_t lo, std::uint64_t hi) {
    return lo + rng.next_u64() % (hi - lo + 1);
}

Verdict ridge_oracle_equivalence() {
    const auto t0 = Clock::now();
    RngStream rng(0x5EED0001);
    const double lambdas[] = {0.0, 1e-3, 1.0};
    double worst = 0.0;
    int zero_lambda = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = static_cast<Eigen::Index>(pick(rng, 10, 100));
        const double lambda = lambdas[rng.next_u64() % 3];
        // lambda = 0 requires an invertible X^T X, so N may not exceed T.
        const auto n_max = lambda == 0.0 ? std::min<Eigen::Index>(60, t) : 60;
        const auto n = static_cast<Eigen::Index>(pick(rng, 2, static_cast<std::uint64_t>(n_max)));
        const auto c = static_cast<Eigen::Index>(pick(rng, 1, 10));
        zero_lambda += lambda == 0.0;
        const Matrix x = random_matrix(t, n, {-1.0, 1.0}, rng);
        const Matrix y = random_matrix(t, c, {-1.0, 1.0}, rng);
        worst = std::max(worst, oracle::max_abs_diff(ridge_solve(x, y, lambda), oracle::ridge(x, y, lambda)));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && secs < 5.0,
            fmt("100 instances (%d with lambda=0), max |diff| %.3e (tol 1e-9), %.2f s (limit 5 s)", zero_lambda,
                worst, secs)};
}

Verdict spectral_rescale() {
    const auto t0 = Clock::now();
    oracle::SplitMix rng{0x5EED0002};
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> d(50);
        for (double& v : d) v = 4.0 * rng.unit() - 2.0;
        double true_radius = 0.0;
        for (double v : d) true_radius = std::max(true_radius, std::abs(v));
        const Matrix w = oracle::known_spectrum(d, rng);
        const Matrix r = rescale_to_spectral_radius(w, 0.3);
        // r is a scalar multiple of w, so its radius is the known one times the ratio of norms.
        const double measured = true_radius * r.norm() / w.norm();
        worst = std::max(worst, std::abs(measured - 0.3));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 5.0,
            fmt("50 matrices 50x50, max |rho - 0.3| %.3e (tol 1e-6), %.2f s (limit 5 s)", worst, secs)};
}

Verdict echo_state_contraction() {
    ReservoirConfig c;  // N_r = 70, alpha = 0.6, rho = 0.3
    const ReservoirWeights w = init_reservoir(c, 225);
    RngStream rng(0x5EED0003);
    const Matrix frames = random_matrix(200, 225, {-1.0, 1.0}, rng);
    const Vector xa = random_matrix(70, 1, {-1.0, 1.0}, rng).col(0);
    const Vector xb = random_matrix(70, 1, {-1.0, 1.0}, rng).col(0);
    const StateTrajectory a = run(w, frames, c.alpha, xa);
    const StateTrajectory b = run(w, frames, c.alpha, xb);
    const double rel = (a.states.row(199) - b.states.row(199)).norm() / (xa - xb).norm();
    return {rel <= 1e-6, fmt("relative distance at t=200: %.3e (tol 1e-6)", rel)};
}

Verdict hand_computed_dynamics() {
    ReservoirWeights w;
    w.w_in = Matrix::Constant(1, 1, 1.0);
    w.w_r = Matrix::Constant(1, 1, 0.3);
    // Manual iteration of x <- 0.4 x + 0.6 tanh(u + 0.3 x) from x = 0 with u = 1, 1.
    const double x1 = 0.6 * std::tanh(1.0);
    const double x2 = 0.4 * x1 + 0.6 * std::tanh(1.0 + 0.3 * x1);
    const Vector s1 = step(Vector::Zero(1), Vector::Ones(1), w, 0.6);
    const StateTrajectory traj = run(w, Matrix::Ones(2, 1), 0.6);
    const double err = std::max({std::abs(s1[0] - x1), std::abs(traj.states(0, 0) - x1),
                                 std::abs(traj.states(1, 0) - x2), std::abs(x1 - 0.45695649357345890),
                                 std::abs(x2 - 0.67084110912212510)});
    return {err <= 1e-12, fmt("x(1)=%.15f x(2)=%.15f, max error %.3e (tol 1e-12)", traj.states(0, 0),
                              traj.states(1, 0), err)};
}

Verdict dimension_parity() {
    RngStream rng(0x5EED0005);
    const Matrix frames = random_matrix(30, 225, {-1.0, 1.0}, rng);
    auto dim = [&](Topology t, int nodes) {
        ReservoirConfig c;
        c.n_r = nodes;
        return Encoder::create(t, c, 225).encode(frames).size();
    };
    const auto pbrc70 = dim(Topology::Pbrc, 70);
    const auto brc70 = dim(Topology::Brc, 70);
    const auto brc140 = dim(Topology::Brc, 140);
    const auto esn280 = dim(Topology::Esn, 280);
    const bool ok = pbrc70 == 280 && brc70 == 140 && brc140 == 280 && esn280 == 280;
    return {ok, fmt("pbrc(70)=%lld brc(70)=%lld brc(140)=%lld esn(280)=%lld", static_cast<long long>(pbrc70),
                    static_cast<long long>(brc70), static_cast<long long>(brc140), static_cast<long long>(esn280))};
}

Verdict synthetic_end_to_end() {
    const auto t0 = Clock::now();
    SynthParams p;  // 10 classes, T = 64, D = 24, noise 0.1
    p.set_per_class(30);
    const Dataset ds = synth_generate(p);
    RunConfig cfg;  // pbrc, 70 nodes, rho 0.3, alpha 0.6
    cfg.lambda_sweep = true;
    const int ks[] = {1, 5, 10};
    double worst = 1.0, sum = 0.0;
    bool monotone = true;
    const int runs = 5;
    for (int r = 0; r < runs; ++r) {
        cfg.seed = 42 + static_cast<std::uint64_t>(r);
        const TrainOutcome out = train_model(cfg, ds);
        const Metrics m = evaluate_model(out.model, ds, kTestSplit, ks);
        monotone = monotone && m.top_k.at(1) <= m.top_k.at(5) && m.top_k.at(5) <= m.top_k.at(10);
        monotone = monotone && out.val_metrics->top_k.at(1) <= out.val_metrics->top_k.at(5) &&
                   out.val_metrics->top_k.at(5) <= out.val_metrics->top_k.at(10);
        worst = std::min(worst, m.top_k.at(1));
        sum += m.top_k.at(1);
    }
    const double secs = seconds_since(t0);
    return {worst >= 0.95 && monotone && secs < 60.0,
            fmt("%d seeds, test top-1 min %.4f mean %.4f (need >= 0.95), top-k monotone: %s, %.2f s (limit 60 s)",
                runs, worst, sum / runs, monotone ? "yes" : "no", secs)};
}

int available_cpus() {
    cpu_set_t set;
    CPU_ZERO(&set);
    if (sched_getaffinity(0, sizeof set, &set) != 0) return 1;
    return CPU_COUNT(&set);
}

Verdict timing_protocol() {
    SynthParams p;
    p.n_classes = 100;
    p.dim = 225;
    p.t_len = 64;
    p.n_train = 1780;
    p.n_val = 258;
    p.n_test = 0;
    const Dataset ds = synth_generate(p);

    RunConfig base;
    const std::vector<BenchCell> grid{{Topology::Pbrc, 70}};
    const int workers[] = {1, 4};
    const auto rows = cmd_bench(base, grid, workers, ds);
    std::ostringstream csv;
    write_bench_csv(csv, rows);

    const BenchRow& one = rows.at(0);
    const BenchRow& four = rows.at(1);
    if (!one.error.empty() || !four.error.empty()) return {false, "bench error: " + one.error + four.error};
    const double speedup = one.encode_time_ms / four.encode_time_ms;
    const std::regex mmss(R"(\d{2}:\d{2}\.\d{2})");
    const bool format_ok = std::regex_match(format_mmss(one.train_time_ms), mmss) &&
                           csv.str().find("," + format_mmss(one.train_time_ms) + ",") != std::string::npos;
    const bool ok = one.train_time_ms < 120000.0 && speedup >= 1.8 && format_ok;
    return {ok, fmt("1780x64x225, 100 classes: 1-worker train %s (limit 02:00.00), encode speedup with 4 "
                    "workers %.2fx (need >= 1.80x; %d CPU(s) available), mm:ss.ms format: %s",
                    format_mmss(one.train_time_ms).c_str(), speedup, available_cpus(), format_ok ? "yes" : "no")};
}

Verdict determinism() {
    const fs::path dir = fs::temp_directory_path() / ("pbrc_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    SynthParams p;
    p.set_per_class(30);
    save_dataset(synth_generate(p), dir / "manifest.json", dir / "data.jsonl");

    RunConfig cfg;
    cfg.repeats = 2;
    const int ks[] = {1, 5, 10};
    auto full_run = [&](int workers) {
        cfg.workers = workers;
        const Dataset ds = load_dataset(dir / "manifest.json", dir / "data.jsonl");
        const TrainReport report = cmd_train(cfg, ds);
        save_model(report.model, dir / "model.json");
        const ModelArtifact reloaded = load_model(dir / "model.json");
        return model_to_json(report.model) + train_report_json(report) +
               metrics_report_json(reloaded.encoder.topology(), evaluate_model(reloaded, ds, kTestSplit, ks));
    };
    const std::string a = full_run(1);
    const std::string b = full_run(1);
    const std::string c = full_run(4);
    fs::remove_all(dir);
    return {a == b && a == c,
            fmt("artifact + reports (%zu bytes): identical runs %s, workers=4 run %s", a.size(),
                a == b ? "match" : "DIFFER", a == c ? "matches" : "DIFFERS")};
}

}  // namespace

int main() {
    set_warnings_enabled(false);
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"ridge_oracle_equivalence", ridge_oracle_equivalence},
        {"spectral_rescale", spectral_rescale},
        {"echo_state_contraction", echo_state_contraction},
        {"hand_computed_dynamics", hand_computed_dynamics},
        {"dimension_parity", dimension_parity},
        {"synthetic_end_to_end", synthetic_end_to_end},
        {"timing_protocol", timing_protocol},
        {"determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::printf("%s  %-26s %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
