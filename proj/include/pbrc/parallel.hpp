#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pbrc/bidir.hpp"

namespace pbrc {

/// k bidirectional reservoirs (k = 2 for PBRC) with identical hyperparameters
/// and seeds master, master + 1, ... Encodings are concatenated in unit order:
/// [x_f^A | x_b^A | x_f^B | x_b^B].
struct PbrcEncoder {
    std::vector<BidirReservoir> units;

    int n_brc() const { return static_cast<int>(units.size()); }
    Eigen::Index n_r() const { return units.empty() ? 0 : units.front().n_r(); }
    Eigen::Index n_in() const { return units.empty() ? 0 : units.front().n_in(); }
    Eigen::Index encoded_dim() const { return 2 * n_brc() * n_r(); }
};

PbrcEncoder init_pbrc(const ReservoirConfig& config, Eigen::Index n_in, int n_brc = 2);

Vector pbrc_encode(const PbrcEncoder& p, const Matrix& frames, PoolingOptions pooling = {});

enum class Topology { Esn, Brc, Pbrc };

Topology parse_topology(std::string_view name);
std::string_view to_string(Topology topology);

/// Untrained reservoir feature extractor of any topology. Node parity for a
/// total encoding of 280: esn n_r = 280, brc n_r = 140, pbrc n_r = 70.
class Encoder {
public:
    using Model = std::variant<ReservoirWeights, BidirReservoir, PbrcEncoder>;

    Encoder(ReservoirConfig config, ReservoirWeights esn);
    Encoder(BidirReservoir brc);
    Encoder(PbrcEncoder pbrc);

    /// Builds fresh weights for `topology` from config.seed.
    static Encoder create(Topology topology, const ReservoirConfig& config, Eigen::Index n_in,
                          int n_brc = 2);

    Topology topology() const;
    const ReservoirConfig& config() const { return config_; }
    const Model& model() const { return model_; }
    Eigen::Index n_in() const;
    Eigen::Index encoded_dim() const;

    Vector encode(const Matrix& frames, PoolingOptions pooling = {}) const;

private:
    ReservoirConfig config_;
    Model model_;
};

/// Row i is the encoding of sequences[i]. Work is spread over `workers`
/// threads; the result is bit-identical for any worker count. A failure on any
/// sequence is rethrown with `ids[i]` (or the index) attached; when several
/// fail, the lowest index wins.
Matrix encode_dataset(const Encoder& encoder, std::span<const Matrix> sequences,
                      PoolingOptions pooling, int workers,
                      std::span<const std::string> ids = {});

/// Runs task(i) for i in [0, count) on a bounded pool of `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

}  // namespace pbrc
