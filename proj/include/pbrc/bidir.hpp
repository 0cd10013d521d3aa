#pragma once

#include "pbrc/reservoir.hpp"

namespace pbrc {

/// Bidirectional reservoir: one recurrent matrix shared by a forward pass over
/// the sequence and a backward pass over its time reversal, each with its own
/// input matrix.
struct BidirReservoir {
    ReservoirConfig config;
    Matrix w_r;
    Matrix w_in_f;
    Matrix w_in_b;

    Eigen::Index n_r() const { return w_r.rows(); }
    Eigen::Index n_in() const { return w_in_f.cols(); }
    Eigen::Index encoded_dim() const { return 2 * n_r(); }

    ReservoirWeights forward_weights() const { return {w_in_f, w_r}; }
    ReservoirWeights backward_weights() const { return {w_in_b, w_r}; }
};

/// Draws from RngStream(config.seed) in order: W_in,f, W_in,b, then W_r.
BidirReservoir init_bidir(const ReservoirConfig& config, Eigen::Index n_in);

/// output[t] = input[T - 1 - t].
Matrix reverse_sequence(const Matrix& frames);

/// pool(forward run on frames) followed by pool(backward run on reversed frames).
Vector bidir_encode(const BidirReservoir& b, const Matrix& frames, PoolingOptions pooling = {});

}  // namespace pbrc
