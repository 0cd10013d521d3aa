#include "pbrc/model.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "pbrc/error.hpp"

namespace pbrc {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json matrix_json(const Matrix& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json vector_json(const Vector& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Matrix matrix_from(const ordered_json& j, std::string_view what) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        fail(ErrorKind::Parse, "model: '" + std::string(what) + "' must be a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            fail(ErrorKind::Parse, "model: '" + std::string(what) + "' has ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Vector vector_from(const ordered_json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

ordered_json config_json(const RunConfig& c) {
    ordered_json j;
    j["topology"] = std::string(to_string(c.topology));
    j["nodes"] = c.nodes;
    j["alpha"] = c.alpha;
    j["rho"] = c.rho;
    j["input_scaling"] = c.input_scaling;
    j["lambda"] = c.lambda;
    j["lambda_sweep"] = c.lambda_sweep;
    j["pooling"] = std::string(to_string(c.pooling.policy));
    j["washout"] = c.pooling.washout;
    j["seed"] = c.seed;
    j["n_brc"] = c.n_brc;
    j["resample"] = c.resample;
    return j;
}

RunConfig config_from(const ordered_json& j) {
    RunConfig c;
    c.topology = parse_topology(j.at("topology").get<std::string>());
    c.nodes = j.at("nodes").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.rho = j.at("rho").get<double>();
    c.input_scaling = j.at("input_scaling").get<double>();
    c.lambda = j.at("lambda").get<double>();
    c.lambda_sweep = j.at("lambda_sweep").get<bool>();
    c.pooling.policy = parse_pooling(j.at("pooling").get<std::string>());
    c.pooling.washout = j.at("washout").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.n_brc = j.at("n_brc").get<int>();
    c.resample = j.at("resample").get<int>();
    return c;
}

ordered_json bidir_json(const BidirReservoir& b) {
    ordered_json j;
    j["seed"] = b.config.seed;
    j["w_r"] = matrix_json(b.w_r);
    j["w_in_f"] = matrix_json(b.w_in_f);
    j["w_in_b"] = matrix_json(b.w_in_b);
    return j;
}

BidirReservoir bidir_from(const ordered_json& j, const ReservoirConfig& base) {
    BidirReservoir b;
    b.config = base;
    b.config.seed = j.at("seed").get<std::uint64_t>();
    b.w_r = matrix_from(j.at("w_r"), "w_r");
    b.w_in_f = matrix_from(j.at("w_in_f"), "w_in_f");
    b.w_in_b = matrix_from(j.at("w_in_b"), "w_in_b");
    if (b.w_r.rows() != b.w_r.cols() || b.w_in_f.rows() != b.w_r.rows() ||
        b.w_in_b.rows() != b.w_r.rows() || b.w_in_b.cols() != b.w_in_f.cols()) {
        fail(ErrorKind::Dimension, "model: bidirectional reservoir matrices disagree in shape");
    }
    return b;
}

ordered_json encoder_json(const Encoder& e) {
    ordered_json j;
    struct Visitor {
        ordered_json& j;
        void operator()(const ReservoirWeights& w) const {
            j["w_in"] = matrix_json(w.w_in);
            j["w_r"] = matrix_json(w.w_r);
        }
        void operator()(const BidirReservoir& b) const { j["units"] = ordered_json::array({bidir_json(b)}); }
        void operator()(const PbrcEncoder& p) const {
            j["units"] = ordered_json::array();
            for (const auto& unit : p.units) j["units"].push_back(bidir_json(unit));
        }
    };
    std::visit(Visitor{j}, e.model());
    return j;
}

Encoder encoder_from(const ordered_json& j, const RunConfig& config) {
    const ReservoirConfig base = config.reservoir();
    switch (config.topology) {
        case Topology::Esn: {
            ReservoirWeights w{matrix_from(j.at("w_in"), "w_in"), matrix_from(j.at("w_r"), "w_r")};
            if (w.w_r.rows() != w.w_r.cols() || w.w_in.rows() != w.w_r.rows()) {
                fail(ErrorKind::Dimension, "model: reservoir matrices disagree in shape");
            }
            return Encoder(base, std::move(w));
        }
        case Topology::Brc: {
            const auto& units = j.at("units");
            if (units.size() != 1) fail(ErrorKind::Parse, "model: brc expects exactly one unit");
            return Encoder(bidir_from(units.front(), base));
        }
        case Topology::Pbrc: {
            PbrcEncoder p;
            for (const auto& unit : j.at("units")) p.units.push_back(bidir_from(unit, base));
            if (p.units.empty()) fail(ErrorKind::Parse, "model: pbrc needs at least one unit");
            return Encoder(std::move(p));
        }
    }
    fail(ErrorKind::Parse, "model: unknown topology");
}

}  // namespace

Vector ModelArtifact::features(const Matrix& raw_frames) const {
    Matrix frames = apply_norm(raw_frames, norm);
    if (config.resample > 0) frames = resample_sequence(frames, config.resample);
    return encoder.encode(frames, config.pooling);
}

Vector ModelArtifact::scores(const Matrix& raw_frames) const {
    return predict_scores(readout, features(raw_frames));
}

std::string model_to_json(const ModelArtifact& model) {
    ordered_json j;
    j["format_version"] = kModelFormatVersion;
    j["topology"] = std::string(to_string(model.encoder.topology()));
    j["config"] = config_json(model.config);
    j["norm"] = {{"mean", vector_json(model.norm.mean)}, {"std", vector_json(model.norm.std)}};
    j["encoder"] = encoder_json(model.encoder);
    j["classes"] = model.readout.classes;
    j["readout"] = {{"lambda", model.readout.lambda}, {"w_out", matrix_json(model.readout.w_out)}};
    return j.dump() + "\n";
}

ModelArtifact model_from_json(std::string_view text) {
    try {
        const ordered_json j = ordered_json::parse(text);
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            fail(ErrorKind::Parse, "model: unsupported format_version " + std::to_string(version));
        }
        RunConfig config = config_from(j.at("config"));
        const Topology tagged = parse_topology(j.at("topology").get<std::string>());
        if (tagged != config.topology) fail(ErrorKind::Parse, "model: topology tag disagrees with config");

        NormStats norm{vector_from(j.at("norm").at("mean")), vector_from(j.at("norm").at("std"))};
        Encoder encoder = encoder_from(j.at("encoder"), config);

        RidgeReadout readout;
        readout.classes = j.at("classes").get<std::vector<std::string>>();
        readout.lambda = j.at("readout").at("lambda").get<double>();
        readout.w_out = matrix_from(j.at("readout").at("w_out"), "w_out");

        if (norm.mean.size() != encoder.n_in() || norm.std.size() != encoder.n_in()) {
            fail(ErrorKind::Dimension, "model: normalization statistics do not match the input dimension");
        }
        if (readout.w_out.rows() != static_cast<Eigen::Index>(readout.classes.size()) ||
            readout.w_out.cols() != encoder.encoded_dim()) {
            fail(ErrorKind::Dimension, "model: readout shape does not match classes and encoder");
        }
        return ModelArtifact{std::move(config), std::move(norm), std::move(encoder), std::move(readout)};
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("model: ") + e.what());
    }
}

void save_model(const ModelArtifact& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << model_to_json(model);
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace pbrc
