#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pbrc/config.hpp"
#include "pbrc/dataset.hpp"
#include "pbrc/parallel.hpp"
#include "pbrc/readout.hpp"

namespace pbrc {

inline constexpr int kModelFormatVersion = 1;

/// A trained classifier: normalization, frozen reservoir weights and readout.
struct ModelArtifact {
    RunConfig config;
    NormStats norm;
    Encoder encoder;
    RidgeReadout readout;

    /// Normalizes, optionally resamples, then encodes one raw sequence.
    Vector features(const Matrix& raw_frames) const;
    Vector scores(const Matrix& raw_frames) const;
};

/// Single JSON document with "format_version": 1 and a "topology" tag.
/// Matrices are nested row arrays; doubles are written in round-trip exact
/// decimal form.
std::string model_to_json(const ModelArtifact& model);
ModelArtifact model_from_json(std::string_view text);

void save_model(const ModelArtifact& model, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

}  // namespace pbrc
