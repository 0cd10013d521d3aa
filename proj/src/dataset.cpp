#include "pbrc/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "pbrc/error.hpp"
#include "pbrc/rng.hpp"

namespace pbrc {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kEmptySplit;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

int schema_dim(const std::vector<LandmarkGroup>& schema) {
    int dim = 0;
    for (const auto& g : schema) dim += g.count * g.coords;
    return dim;
}

}  // namespace

std::vector<LandmarkGroup> default_landmark_layout() {
    return {{"left_hand", 21, 3}, {"right_hand", 21, 3}, {"pose", 33, 3}};
}

const std::vector<std::string>& DatasetManifest::split(std::string_view name) const {
    const auto it = splits.find(name);
    return it == splits.end() ? kEmptySplit : it->second;
}

std::vector<std::size_t> Dataset::split_indices(std::string_view split) const {
    std::unordered_map<std::string_view, std::size_t> position;
    position.reserve(sequences.size());
    for (std::size_t i = 0; i < sequences.size(); ++i) position.emplace(sequences[i].id, i);

    std::vector<std::size_t> out;
    for (const auto& id : manifest.split(split)) {
        const auto it = position.find(id);
        if (it == position.end()) {
            fail(ErrorKind::Integrity, "split '" + std::string(split) + "' lists unknown id '" + id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

void validate_dataset(const Dataset& ds) {
    const auto& m = ds.manifest;
    if (m.schema.empty()) fail(ErrorKind::Schema, "manifest schema is empty");
    for (const auto& g : m.schema) {
        if (g.count < 1 || g.coords < 1) {
            fail(ErrorKind::Schema, "manifest schema group '" + g.name + "' needs positive count and coords");
        }
    }
    if (schema_dim(m.schema) != m.dim) {
        std::ostringstream msg;
        msg << "manifest dim " << m.dim << " does not match schema total " << schema_dim(m.schema);
        fail(ErrorKind::Schema, msg.str());
    }
    const std::set<std::string> classes(m.classes.begin(), m.classes.end());
    if (classes.size() != m.classes.size()) fail(ErrorKind::Integrity, "manifest classes contain duplicates");

    std::unordered_set<std::string_view> ids;
    ids.reserve(ds.sequences.size());
    for (const auto& seq : ds.sequences) {
        if (!ids.insert(seq.id).second) fail(ErrorKind::Integrity, "duplicate sample id '" + seq.id + "'");
        if (seq.frames.rows() < 1) fail(ErrorKind::EmptyInput, "sample '" + seq.id + "' has no frames");
        if (seq.frames.cols() != m.dim) {
            std::ostringstream msg;
            msg << "sample '" << seq.id << "' has frames of " << seq.frames.cols()
                << " values, expected " << m.dim;
            fail(ErrorKind::Schema, msg.str());
        }
        if (!seq.frames.allFinite()) fail(ErrorKind::Schema, "sample '" + seq.id + "' contains NaN or Inf");
        if (!classes.contains(seq.label)) {
            fail(ErrorKind::Schema, "sample '" + seq.id + "' has label '" + seq.label + "' missing from manifest classes");
        }
    }

    std::unordered_map<std::string_view, std::string_view> owner;
    for (const auto& [name, members] : m.splits) {
        for (const auto& id : members) {
            if (!ids.contains(id)) fail(ErrorKind::Integrity, "split '" + name + "' lists unknown id '" + id + "'");
            const auto [it, inserted] = owner.emplace(id, name);
            if (!inserted) {
                fail(ErrorKind::Integrity, "id '" + id + "' appears in split '" + std::string(it->second) +
                                               "' and split '" + name + "'");
            }
        }
    }
}

DatasetManifest parse_manifest(std::string_view json_text) {
    DatasetManifest m;
    try {
        const json j = json::parse(json_text);
        for (const auto& g : j.at("schema")) {
            m.schema.push_back({g.at("name").get<std::string>(), g.at("count").get<int>(),
                                g.at("coords").get<int>()});
        }
        m.dim = j.at("dim").get<int>();
        m.classes = j.at("classes").get<std::vector<std::string>>();
        if (j.contains("splits")) {
            for (const auto& [name, ids] : j.at("splits").items()) {
                m.splits[name] = ids.get<std::vector<std::string>>();
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, std::string("manifest: ") + e.what());
    }
    return m;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
    ordered_json j;
    j["schema"] = ordered_json::array();
    for (const auto& g : manifest.schema) {
        j["schema"].push_back({{"name", g.name}, {"count", g.count}, {"coords", g.coords}});
    }
    j["dim"] = manifest.dim;
    j["classes"] = manifest.classes;
    ordered_json splits = ordered_json::object();
    for (const auto name : {kTrainSplit, kValSplit, kTestSplit}) {
        splits[std::string(name)] = manifest.split(name);
    }
    for (const auto& [name, ids] : manifest.splits) {
        if (!splits.contains(name)) splits[name] = ids;
    }
    j["splits"] = std::move(splits);
    return j.dump(2) + "\n";
}

KeypointSequence parse_sequence_line(std::string_view line, std::size_t line_no) {
    const auto where = [&] { return "data line " + std::to_string(line_no) + ": "; };
    KeypointSequence seq;
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, where() + e.what());
    }
    try {
        seq.id = j.at("id").get<std::string>();
        seq.label = j.at("label").get<std::string>();
        const auto& frames = j.at("frames");
        if (!frames.is_array()) fail(ErrorKind::Parse, where() + "'frames' must be an array");
        if (frames.empty()) fail(ErrorKind::EmptyInput, where() + "sample '" + seq.id + "' has no frames");

        const auto t_len = static_cast<Eigen::Index>(frames.size());
        const auto dim = static_cast<Eigen::Index>(frames.front().size());
        seq.frames.resize(t_len, dim);
        for (Eigen::Index t = 0; t < t_len; ++t) {
            const auto& frame = frames[static_cast<std::size_t>(t)];
            if (!frame.is_array()) fail(ErrorKind::Parse, where() + "each frame must be an array");
            if (static_cast<Eigen::Index>(frame.size()) != dim) {
                std::ostringstream msg;
                msg << where() << "sample '" << seq.id << "' frame " << t << " has " << frame.size()
                    << " values, expected " << dim;
                fail(ErrorKind::Schema, msg.str());
            }
            for (Eigen::Index d = 0; d < dim; ++d) {
                seq.frames(t, d) = frame[static_cast<std::size_t>(d)].get<double>();
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::Parse, where() + e.what());
    }
    return seq;
}

std::string sequence_to_jsonl(const KeypointSequence& seq) {
    ordered_json j;
    j["id"] = seq.id;
    j["label"] = seq.label;
    ordered_json frames = ordered_json::array();
    for (Eigen::Index t = 0; t < seq.frames.rows(); ++t) {
        ordered_json frame = ordered_json::array();
        for (Eigen::Index d = 0; d < seq.frames.cols(); ++d) frame.push_back(seq.frames(t, d));
        frames.push_back(std::move(frame));
    }
    j["frames"] = std::move(frames);
    return j.dump();
}

Dataset load_dataset(const std::filesystem::path& manifest_path, const std::filesystem::path& data_path) {
    Dataset ds;
    ds.manifest = parse_manifest(read_file(manifest_path));

    std::ifstream in(data_path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + data_path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        ds.sequences.push_back(parse_sequence_line(line, line_no));
        const auto& seq = ds.sequences.back();
        if (seq.frames.cols() != ds.manifest.dim) {
            std::ostringstream msg;
            msg << "data line " << line_no << ": sample '" << seq.id << "' has frames of "
                << seq.frames.cols() << " values, expected " << ds.manifest.dim;
            fail(ErrorKind::Schema, msg.str());
        }
    }
    validate_dataset(ds);
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& manifest_path,
                  const std::filesystem::path& data_path) {
    validate_dataset(ds);
    write_file(manifest_path, manifest_to_json(ds.manifest));
    std::string body;
    for (const auto& seq : ds.sequences) {
        body += sequence_to_jsonl(seq);
        body += '\n';
    }
    write_file(data_path, body);
}

NormStats fit_norm(std::span<const Matrix> train_frames) {
    if (train_frames.empty()) fail(ErrorKind::EmptyInput, "fit_norm: training split is empty");
    const Eigen::Index dim = train_frames.front().cols();
    Eigen::Index total = 0;
    for (const auto& f : train_frames) {
        if (f.cols() != dim) fail(ErrorKind::Dimension, "fit_norm: sequences differ in feature dimension");
        total += f.rows();
    }
    if (total < 1) fail(ErrorKind::EmptyInput, "fit_norm: training split has no frames");

    // Accumulate around the first frame so a constant feature yields its value
    // exactly as the mean.
    const Vector shift = train_frames.front().row(0).transpose();
    Vector sum = Vector::Zero(dim);
    Vector sum_sq = Vector::Zero(dim);
    for (const auto& f : train_frames) {
        const Matrix centered = f.rowwise() - shift.transpose();
        sum += centered.colwise().sum().transpose();
        sum_sq += centered.array().square().colwise().sum().matrix().transpose();
    }
    const double n = static_cast<double>(total);
    const Vector offset = sum / n;

    NormStats stats;
    stats.mean = shift + offset;
    const Vector variance = (sum_sq / n - offset.cwiseAbs2()).cwiseMax(0.0);
    stats.std = variance.cwiseSqrt().cwiseMax(kStdFloor);
    return stats;
}

Matrix apply_norm(const Matrix& frames, const NormStats& stats) {
    if (frames.cols() != stats.mean.size()) {
        std::ostringstream msg;
        msg << "apply_norm: frames have " << frames.cols() << " features, statistics cover "
            << stats.mean.size();
        fail(ErrorKind::Dimension, msg.str());
    }
    return ((frames.rowwise() - stats.mean.transpose()).array().rowwise() / stats.std.transpose().array())
        .matrix();
}

Matrix resample_sequence(const Matrix& frames, int t_len) {
    if (frames.rows() < 1) fail(ErrorKind::EmptyInput, "resample_sequence: sequence has no frames");
    if (t_len < 1) fail(ErrorKind::Config, "resample_sequence: target length must be >= 1");
    const Eigen::Index src = frames.rows();
    Matrix out(t_len, frames.cols());
    for (int t = 0; t < t_len; ++t) {
        if (src == 1 || t_len == 1) {
            out.row(t) = frames.row(0);
            continue;
        }
        const double pos = static_cast<double>(t) * static_cast<double>(src - 1) / static_cast<double>(t_len - 1);
        const auto lo = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(pos)), src - 2);
        const double frac = pos - static_cast<double>(lo);
        out.row(t) = (1.0 - frac) * frames.row(lo) + frac * frames.row(lo + 1);
    }
    return out;
}

void SynthParams::set_per_class(int per_class) {
    if (per_class < 1) fail(ErrorKind::Config, "per_class must be >= 1");
    const int held_out = static_cast<int>(std::lround(0.2 * per_class));
    n_val = held_out * n_classes;
    n_test = held_out * n_classes;
    n_train = (per_class - 2 * held_out) * n_classes;
}

namespace {

constexpr int kSynthHarmonics = 3;
constexpr double kSynthLaps = 2.0;

// Mixing matrix from the harmonic basis to the features; shared by all classes.
Matrix synth_mixing(const SynthParams& params) {
    RngStream rng(mix_seed(params.seed ^ 0xC0FFEE5EEDULL));
    const double scale = 1.0 / std::sqrt(static_cast<double>(kSynthHarmonics));
    return random_matrix(params.dim, 2 * kSynthHarmonics, {-scale, scale}, rng);
}

// Phase of each harmonic relative to the fundamental; the fundamental's is 0.
std::array<double, kSynthHarmonics> class_phases(const SynthParams& params, int label_index) {
    RngStream rng(mix_seed(params.seed ^ mix_seed(0xC1A55ULL + static_cast<std::uint64_t>(label_index))));
    std::array<double, kSynthHarmonics> out{};
    for (int k = 1; k < kSynthHarmonics; ++k) out[static_cast<std::size_t>(k)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return out;
}

std::string class_label(int index, int n_classes) {
    const int width = std::max(3, static_cast<int>(std::to_string(std::max(n_classes - 1, 0)).size()));
    std::string digits = std::to_string(index);
    return "class_" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

void check_synth(const SynthParams& p) {
    if (p.n_classes < 1 || p.t_len < 1 || p.dim < 1) {
        fail(ErrorKind::Config, "synth: n_classes, t_len and dim must be positive");
    }
    if (p.n_train < 0 || p.n_val < 0 || p.n_test < 0 || p.n_train + p.n_val + p.n_test < 1) {
        fail(ErrorKind::Config, "synth: split counts must be non-negative with at least one sample");
    }
    if (!(p.noise_sd >= 0.0)) fail(ErrorKind::Config, "synth: noise_sd must be >= 0");
}

}  // namespace

Matrix synth_sample(const SynthParams& params, int label_index, std::uint64_t sample_seed) {
    check_synth(params);
    const Matrix mixing = synth_mixing(params);
    const auto phases = class_phases(params, label_index);
    RngStream rng(sample_seed);
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double omega = 2.0 * std::numbers::pi * kSynthLaps / static_cast<double>(params.t_len);

    Matrix frames(params.t_len, params.dim);
    Vector basis(2 * kSynthHarmonics);
    for (int t = 0; t < params.t_len; ++t) {
        for (int k = 0; k < kSynthHarmonics; ++k) {
            const double a = (k + 1) * (omega * t + theta) + phases[static_cast<std::size_t>(k)];
            basis[2 * k] = std::cos(a);
            basis[2 * k + 1] = std::sin(a);
        }
        frames.row(t) = (mixing * basis).transpose();
    }
    if (params.noise_sd > 0.0) {
        for (int t = 0; t < params.t_len; ++t) {
            for (int d = 0; d < params.dim; ++d) frames(t, d) += params.noise_sd * rng.normal();
        }
    }
    return frames;
}

Dataset synth_generate(const SynthParams& params) {
    check_synth(params);
    Dataset ds;
    ds.manifest.schema = {{"synthetic", params.dim, 1}};
    ds.manifest.dim = params.dim;
    for (int c = 0; c < params.n_classes; ++c) ds.manifest.classes.push_back(class_label(c, params.n_classes));

    const std::pair<std::string_view, int> splits[] = {
        {kTrainSplit, params.n_train}, {kValSplit, params.n_val}, {kTestSplit, params.n_test}};
    std::uint64_t split_tag = 0;
    for (const auto& [name, count] : splits) {
        ++split_tag;
        auto& members = ds.manifest.splits[std::string(name)];
        for (int i = 0; i < count; ++i) {
            const int label = i % params.n_classes;
            const std::uint64_t sample_seed =
                mix_seed(params.seed ^ mix_seed((split_tag << 40) + static_cast<std::uint64_t>(i)));
            KeypointSequence seq;
            std::ostringstream id;
            id << name << "_" << std::setw(5) << std::setfill('0') << i;
            seq.id = id.str();
            seq.label = ds.manifest.classes[static_cast<std::size_t>(label)];
            seq.frames = synth_sample(params, label, sample_seed);
            members.push_back(seq.id);
            ds.sequences.push_back(std::move(seq));
        }
    }
    return ds;
}

}  // namespace pbrc
