#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pbrc/bidir.hpp"
#include "pbrc/config.hpp"
#include "pbrc/dataset.hpp"
#include "pbrc/error.hpp"
#include "pbrc/model.hpp"
#include "pbrc/numerics.hpp"
#include "pbrc/parallel.hpp"
#include "pbrc/pipeline.hpp"
#include "pbrc/readout.hpp"
#include "pbrc/reservoir.hpp"

namespace py = pybind11;
using namespace pbrc;

namespace {

PoolingOptions pooling_from(const std::string& policy, int washout) {
    return {parse_pooling(policy), washout};
}

py::dict metrics_dict(const Metrics& m) {
    py::dict out;
    py::dict top;
    for (const auto& [k, v] : m.top_k) top[py::int_(k)] = v;
    out["top_k"] = top;
    out["n_samples"] = m.n_samples;
    py::list confusion;
    for (const auto& c : m.confusion) {
        py::dict row;
        row["label"] = c.label;
        row["tp"] = c.tp;
        row["fp"] = c.fp;
        row["fn"] = c.fn;
        row["tn"] = c.tn;
        confusion.append(row);
    }
    out["confusion"] = confusion;
    if (m.train_time_ms) out["train_time_ms"] = *m.train_time_ms;
    return out;
}

RunConfig run_config_from(const py::dict& settings) {
    RunConfig config;
    for (const auto& [key, value] : settings) {
        apply_setting(config, py::str(key).cast<std::string>(), py::str(value).cast<std::string>());
    }
    config.validate();
    return config;
}

}  // namespace

PYBIND11_MODULE(pbrc, m) {
    m.doc() = "Echo-state reservoir computing (ESN, BRC, PBRC) with a closed-form ridge readout";

    static py::exception<Error> error(m, "PbrcError");
    static py::exception<ConvergenceError> convergence_error(m, "ConvergenceError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConvergenceError& e) {
            PyErr_SetString(convergence_error.ptr(), e.what());
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    // numerics
    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("next_u64", &RngStream::next_u64)
        .def("uniform", &RngStream::uniform, py::arg("lo"), py::arg("hi"))
        .def("normal", &RngStream::normal)
        .def_property_readonly("seed", &RngStream::seed)
        .def_property_readonly("position", &RngStream::position);

    m.def(
        "random_matrix",
        [](Eigen::Index rows, Eigen::Index cols, double lo, double hi, RngStream& rng) {
            return random_matrix(rows, cols, {lo, hi}, rng);
        },
        py::arg("rows"), py::arg("cols"), py::arg("lo"), py::arg("hi"), py::arg("rng"));
    m.def(
        "estimate_spectral_radius",
        [](const Matrix& w, double tol, int max_iters) {
            const auto est = estimate_spectral_radius(w, {tol, max_iters});
            return py::make_tuple(est.value, est.iterations, est.converged);
        },
        py::arg("w"), py::arg("tol") = 1e-9, py::arg("max_iters") = 10000,
        "Returns (radius, iterations, converged).");
    m.def(
        "rescale_to_spectral_radius",
        [](const Matrix& w, double rho) { return rescale_to_spectral_radius(w, rho); }, py::arg("w"),
        py::arg("rho"));
    m.def("ridge_solve", &ridge_solve, py::arg("x"), py::arg("y"), py::arg("lam"));

    // reservoir
    py::class_<ReservoirConfig>(m, "ReservoirConfig")
        .def(py::init<>())
        .def_readwrite("n_r", &ReservoirConfig::n_r)
        .def_readwrite("alpha", &ReservoirConfig::alpha)
        .def_readwrite("rho", &ReservoirConfig::rho)
        .def_readwrite("input_scaling", &ReservoirConfig::input_scaling)
        .def_readwrite("seed", &ReservoirConfig::seed);

    py::class_<ReservoirWeights>(m, "ReservoirWeights")
        .def_readonly("w_in", &ReservoirWeights::w_in)
        .def_readonly("w_r", &ReservoirWeights::w_r);

    m.def("init_reservoir", py::overload_cast<const ReservoirConfig&, Eigen::Index>(&init_reservoir),
          py::arg("config"), py::arg("n_in"));
    m.def("step", &step, py::arg("x"), py::arg("u"), py::arg("weights"), py::arg("alpha"));
    m.def(
        "run",
        [](const ReservoirWeights& w, const Matrix& frames, double alpha, std::optional<Vector> x0) {
            return (x0 ? run(w, frames, alpha, *x0) : run(w, frames, alpha)).states;
        },
        py::arg("weights"), py::arg("frames"), py::arg("alpha"), py::arg("x0") = py::none(),
        "State trajectory, one row per frame.");
    m.def(
        "pool",
        [](const Matrix& states, const std::string& policy, int washout) {
            return pool(StateTrajectory{states}, pooling_from(policy, washout));
        },
        py::arg("states"), py::arg("policy") = "mean", py::arg("washout") = 0);

    // bidir / parallel
    py::class_<BidirReservoir>(m, "BidirReservoir")
        .def_readonly("config", &BidirReservoir::config)
        .def_readonly("w_r", &BidirReservoir::w_r)
        .def_readonly("w_in_f", &BidirReservoir::w_in_f)
        .def_readonly("w_in_b", &BidirReservoir::w_in_b)
        .def_property_readonly("encoded_dim", &BidirReservoir::encoded_dim);
    m.def("init_bidir", &init_bidir, py::arg("config"), py::arg("n_in"));
    m.def("reverse_sequence", &reverse_sequence, py::arg("frames"));
    m.def(
        "bidir_encode",
        [](const BidirReservoir& b, const Matrix& frames, const std::string& policy, int washout) {
            return bidir_encode(b, frames, pooling_from(policy, washout));
        },
        py::arg("reservoir"), py::arg("frames"), py::arg("policy") = "mean", py::arg("washout") = 0);

    py::class_<PbrcEncoder>(m, "PbrcEncoder")
        .def_readonly("units", &PbrcEncoder::units)
        .def_property_readonly("n_brc", &PbrcEncoder::n_brc)
        .def_property_readonly("encoded_dim", &PbrcEncoder::encoded_dim);
    m.def("init_pbrc", &init_pbrc, py::arg("config"), py::arg("n_in"), py::arg("n_brc") = 2);
    m.def(
        "pbrc_encode",
        [](const PbrcEncoder& p, const Matrix& frames, const std::string& policy, int washout) {
            return pbrc_encode(p, frames, pooling_from(policy, washout));
        },
        py::arg("encoder"), py::arg("frames"), py::arg("policy") = "mean", py::arg("washout") = 0);

    py::class_<Encoder>(m, "Encoder")
        .def_static(
            "create",
            [](const std::string& topology, const ReservoirConfig& config, Eigen::Index n_in, int n_brc) {
                return Encoder::create(parse_topology(topology), config, n_in, n_brc);
            },
            py::arg("topology"), py::arg("config"), py::arg("n_in"), py::arg("n_brc") = 2)
        .def_property_readonly("topology", [](const Encoder& e) { return std::string(to_string(e.topology())); })
        .def_property_readonly("encoded_dim", &Encoder::encoded_dim)
        .def_property_readonly("n_in", &Encoder::n_in)
        .def(
            "encode",
            [](const Encoder& e, const Matrix& frames, const std::string& policy, int washout) {
                return e.encode(frames, pooling_from(policy, washout));
            },
            py::arg("frames"), py::arg("policy") = "mean", py::arg("washout") = 0);

    m.def(
        "encode_dataset",
        [](const Encoder& e, const std::vector<Matrix>& sequences, const std::string& policy, int washout,
           int workers) {
            py::gil_scoped_release release;
            return encode_dataset(e, sequences, pooling_from(policy, washout), workers);
        },
        py::arg("encoder"), py::arg("sequences"), py::arg("policy") = "mean", py::arg("washout") = 0,
        py::arg("workers") = 1);

    // readout
    py::class_<RidgeReadout>(m, "RidgeReadout")
        .def_readonly("w_out", &RidgeReadout::w_out)
        .def_readonly("lam", &RidgeReadout::lambda)
        .def_readonly("classes", &RidgeReadout::classes);
    m.def(
        "fit_readout",
        [](const Matrix& x, const std::vector<std::string>& labels, double lam) {
            return fit_readout(x, labels, lam);
        },
        py::arg("x"), py::arg("labels"), py::arg("lam") = kDefaultLambda);
    m.def("predict_scores", &predict_scores, py::arg("readout"), py::arg("x"));
    m.def("top_k", &top_k, py::arg("scores"), py::arg("k"));
    m.def(
        "evaluate",
        [](const RidgeReadout& r, const Matrix& x, const std::vector<std::string>& labels,
           const std::vector<int>& ks) { return metrics_dict(evaluate(r, x, labels, ks)); },
        py::arg("readout"), py::arg("x"), py::arg("labels"), py::arg("ks") = std::vector<int>{1, 5, 10});

    // dataset
    py::class_<KeypointSequence>(m, "KeypointSequence")
        .def(py::init([](std::string id, std::string label, Matrix frames) {
                 return KeypointSequence{std::move(id), std::move(label), std::move(frames)};
             }),
             py::arg("id"), py::arg("label"), py::arg("frames"))
        .def_readonly("id", &KeypointSequence::id)
        .def_readonly("label", &KeypointSequence::label)
        .def_readonly("frames", &KeypointSequence::frames);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("sequences", &Dataset::sequences)
        .def_property_readonly("dim", [](const Dataset& d) { return d.manifest.dim; })
        .def_property_readonly("classes", [](const Dataset& d) { return d.manifest.classes; })
        .def("split", [](const Dataset& d, const std::string& name) { return d.manifest.split(name); },
             py::arg("name"));

    m.def(
        "synth_generate",
        [](int n_classes, int per_class, int t_len, int dim, double noise_sd, std::uint64_t seed) {
            SynthParams p;
            p.n_classes = n_classes;
            p.t_len = t_len;
            p.dim = dim;
            p.noise_sd = noise_sd;
            p.seed = seed;
            p.set_per_class(per_class);
            return synth_generate(p);
        },
        py::arg("n_classes") = 10, py::arg("per_class") = 30, py::arg("t_len") = 64, py::arg("dim") = 24,
        py::arg("noise_sd") = 0.1, py::arg("seed") = 7);
    m.def("load_dataset", &load_dataset, py::arg("manifest"), py::arg("data"));
    m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("manifest"), py::arg("data"));

    // pipeline
    py::class_<ModelArtifact>(m, "Model")
        .def_property_readonly("encoder", [](const ModelArtifact& a) { return a.encoder; })
        .def_property_readonly("readout", [](const ModelArtifact& a) { return a.readout; })
        .def("scores", &ModelArtifact::scores, py::arg("frames"))
        .def("to_json", &model_to_json);
    m.def("load_model", &load_model, py::arg("path"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));

    m.def(
        "train",
        [](const Dataset& ds, const py::dict& settings) {
            const RunConfig config = run_config_from(settings);
            TrainOutcome out = [&] {
                py::gil_scoped_release release;
                return train_model(config, ds);
            }();
            py::dict result;
            result["train"] = metrics_dict(out.train_metrics);
            if (out.val_metrics) result["val"] = metrics_dict(*out.val_metrics);
            result["train_time_ms"] = out.train_time_ms;
            result["train_time"] = format_mmss(out.train_time_ms);
            return py::make_tuple(std::move(out.model), result);
        },
        py::arg("dataset"), py::arg("settings") = py::dict(),
        "Trains on the train split. settings uses the CLI keys, e.g. {'topology': 'pbrc', 'nodes': 70}.");
    m.def(
        "evaluate_model",
        [](const ModelArtifact& model, const Dataset& ds, const std::string& split, const std::vector<int>& ks) {
            return metrics_dict(evaluate_model(model, ds, split, ks));
        },
        py::arg("model"), py::arg("dataset"), py::arg("split") = "test",
        py::arg("ks") = std::vector<int>{1, 5, 10});
    m.def("format_mmss", &format_mmss, py::arg("ms"));
}
