#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbrc/numerics.hpp"

namespace pbrc {

struct LandmarkGroup {
    std::string name;
    int count = 0;
    int coords = 0;
};

/// Left hand 21x3, right hand 21x3, pose 33x3: 225 features per frame.
/// Undetected landmarks are encoded as all-zero triples.
std::vector<LandmarkGroup> default_landmark_layout();

struct KeypointSequence {
    std::string id;
    std::string label;
    Matrix frames;  // T x D, one frame per row
};

inline constexpr std::string_view kTrainSplit = "train";
inline constexpr std::string_view kValSplit = "val";
inline constexpr std::string_view kTestSplit = "test";

struct DatasetManifest {
    std::vector<LandmarkGroup> schema;
    int dim = 0;
    std::vector<std::string> classes;
    std::map<std::string, std::vector<std::string>, std::less<>> splits;

    const std::vector<std::string>& split(std::string_view name) const;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<KeypointSequence> sequences;

    /// Sequence positions of the ids listed under `split`, in manifest order.
    std::vector<std::size_t> split_indices(std::string_view split) const;
};

/// Checks every invariant tying sequences to the manifest: layout sums to dim,
/// frames non-empty (EmptyInput) with dim finite values (Schema), labels listed
/// in classes (Schema), unique ids (Integrity), split ids resolving to exactly
/// one sequence and splits pairwise disjoint (Integrity).
void validate_dataset(const Dataset& ds);

DatasetManifest parse_manifest(std::string_view json_text);
std::string manifest_to_json(const DatasetManifest& manifest);

/// Parses one data.jsonl record. `line_no` is 1-based, used in Parse errors.
KeypointSequence parse_sequence_line(std::string_view line, std::size_t line_no);
std::string sequence_to_jsonl(const KeypointSequence& seq);

Dataset load_dataset(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& data_path);
void save_dataset(const Dataset& ds, const std::filesystem::path& manifest_path,
                  const std::filesystem::path& data_path);

/// Per-feature z-score statistics from the training split.
struct NormStats {
    Vector mean;
    Vector std;  // floored at kStdFloor
};

inline constexpr double kStdFloor = 1e-8;

NormStats fit_norm(std::span<const Matrix> train_frames);
Matrix apply_norm(const Matrix& frames, const NormStats& stats);

/// Linear interpolation onto t_len uniformly spaced time points spanning the
/// first and last frame.
Matrix resample_sequence(const Matrix& frames, int t_len);

/// Synthetic sinusoid task. Every sample is a closed curve built from the
/// first three harmonics of a phase s(t) = 2 pi * 2 t / T + theta, with theta
/// uniform per sample, mixed into the features by a matrix A fixed by the
/// seed and shared by all classes:
///
///     u(t) = A [cos(k s + phi_ck), sin(k s + phi_ck)]_{k=1..3} + noise_sd * N(0, I)
///
/// A class is its pair of relative phases (phi_c2, phi_c3); phi_c1 = 0. For
/// every class a single frame has zero mean and the same covariance, so no
/// linear function of one frame separates the classes. The curve shape,
/// which the phases set, does.
struct SynthParams {
    int n_classes = 10;
    int t_len = 64;
    int dim = 24;
    double noise_sd = 0.1;
    std::uint64_t seed = 7;
    int n_train = 180;
    int n_val = 60;
    int n_test = 60;

    /// Sets the split counts from a per-class total: 60% / 20% / 20%, rounded
    /// per class with the remainder going to train.
    void set_per_class(int per_class);
};

/// One sample of class `label_index`. Depends only on (params.seed,
/// label_index, sample_seed, t_len, dim, noise_sd).
Matrix synth_sample(const SynthParams& params, int label_index, std::uint64_t sample_seed);

/// Labels are "class_000", "class_001", ...; the i-th sample of each split has
/// class i mod n_classes. Samples depend only on (seed, split, position), so
/// growing one split never changes another.
Dataset synth_generate(const SynthParams& params);

}  // namespace pbrc
