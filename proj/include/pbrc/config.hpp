#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pbrc/parallel.hpp"
#include "pbrc/readout.hpp"
#include "pbrc/reservoir.hpp"

namespace pbrc {

/// Everything that determines a training run. `nodes` is the size of each
/// reservoir: the PBRC default of 70 gives a 280-dim encoding, matched by
/// brc at 140 and esn at 280.
struct RunConfig {
    Topology topology = Topology::Pbrc;
    int nodes = 70;
    double alpha = 0.6;
    double rho = 0.3;
    double input_scaling = 1.0;
    double lambda = kDefaultLambda;
    bool lambda_sweep = false;
    PoolingOptions pooling;
    int workers = 1;
    std::uint64_t seed = 42;
    int repeats = 1;
    int n_brc = 2;
    /// Uniform temporal resampling to this many frames; 0 keeps native lengths.
    int resample = 0;
    std::vector<int> ks = {1, 5, 10};

    ReservoirConfig reservoir() const;
    void validate() const;
};

/// Nodes per reservoir giving the same encoded dimension for every topology.
int parity_nodes(Topology topology, int total_dim, int n_brc = 2);

/// Parses the flat key-value grammar:
///
///     # comment
///     key = value
///
/// Blank lines and lines starting with '#' are ignored; keys and values are
/// trimmed. Returns the pairs in file order. Throws Parse with a line number.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

/// Applies one setting. Keys: topology, nodes, alpha, rho, input_scaling,
/// lambda (a number or "sweep"), pooling, washout, workers, seed, repeats,
/// n_brc, resample, ks (comma separated). Throws Config on unknown keys or
/// malformed values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

std::vector<int> parse_int_list(std::string_view text);

}  // namespace pbrc
