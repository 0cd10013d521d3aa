#pragma once

#include <cstdint>
#include <string_view>

#include "pbrc/numerics.hpp"

namespace pbrc {

enum class Activation { Tanh };

/// Hyperparameters of one echo-state reservoir. The defaults are the tuned
/// PBRC values (70 nodes, leak 0.6, spectral radius 0.3).
struct ReservoirConfig {
    int n_r = 70;
    double alpha = 0.6;
    double rho = 0.3;
    double input_scaling = 1.0;
    std::uint64_t seed = 42;
    Activation activation = Activation::Tanh;

    /// Throws Config unless n_r >= 1, alpha in (0,1], rho in (0,1], input_scaling > 0.
    void validate() const;
};

struct ReservoirWeights {
    Matrix w_in;  // n_r x n_in
    Matrix w_r;   // n_r x n_r, spectral radius == config.rho

    Eigen::Index n_r() const { return w_r.rows(); }
    Eigen::Index n_in() const { return w_in.cols(); }
};

/// Row t is the state after consuming frame t.
struct StateTrajectory {
    Matrix states;

    Eigen::Index t_len() const { return states.rows(); }
};

enum class PoolingPolicy { Mean, Last };

struct PoolingOptions {
    PoolingPolicy policy = PoolingPolicy::Mean;
    /// Leading states dropped before mean pooling. Clamped so at least the
    /// final state always survives.
    int washout = 0;
};

PoolingPolicy parse_pooling(std::string_view name);
std::string_view to_string(PoolingPolicy policy);

/// Draws W_in ~ U(-input_scaling, input_scaling), then W_r ~ U(-0.5, 0.5)
/// rescaled to config.rho, both from `rng` in that order.
ReservoirWeights init_reservoir(const ReservoirConfig& config, Eigen::Index n_in, RngStream& rng);

/// Same, with a fresh RngStream(config.seed).
ReservoirWeights init_reservoir(const ReservoirConfig& config, Eigen::Index n_in);

/// One leaky update: (1 - alpha) x + alpha tanh(W_in u + W_r x).
Vector step(const Vector& x, const Vector& u, const ReservoirWeights& w, double alpha);

/// Drives the reservoir over `frames` (T x n_in, one frame per row) from x0.
StateTrajectory run(const ReservoirWeights& w, const Matrix& frames, double alpha, const Vector& x0);

/// Same recursion with the input and recurrent matrices passed separately, so
/// callers sharing one W_r across several input matrices avoid copies.
StateTrajectory run(const Matrix& w_in, const Matrix& w_r, const Matrix& frames, double alpha,
                    const Vector& x0);

/// run() from the zero state.
StateTrajectory run(const ReservoirWeights& w, const Matrix& frames, double alpha);

Vector pool(const StateTrajectory& trajectory, PoolingOptions options = {});

}  // namespace pbrc
