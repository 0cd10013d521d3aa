#include "pbrc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "pbrc/error.hpp"

namespace pbrc {

PbrcEncoder init_pbrc(const ReservoirConfig& config, Eigen::Index n_in, int n_brc) {
    if (n_brc < 1) fail(ErrorKind::Config, "init_pbrc: need at least one bidirectional unit");
    PbrcEncoder p;
    p.units.reserve(static_cast<std::size_t>(n_brc));
    for (int k = 0; k < n_brc; ++k) {
        ReservoirConfig unit = config;
        unit.seed = config.seed + static_cast<std::uint64_t>(k);
        p.units.push_back(init_bidir(unit, n_in));
    }
    return p;
}

Vector pbrc_encode(const PbrcEncoder& p, const Matrix& frames, PoolingOptions pooling) {
    if (p.units.empty()) fail(ErrorKind::Config, "pbrc_encode: encoder has no units");
    Vector out(p.encoded_dim());
    Eigen::Index offset = 0;
    for (const auto& unit : p.units) {
        if (unit.n_r() != p.n_r()) fail(ErrorKind::Dimension, "pbrc_encode: units differ in size");
        out.segment(offset, unit.encoded_dim()) = bidir_encode(unit, frames, pooling);
        offset += unit.encoded_dim();
    }
    return out;
}

Topology parse_topology(std::string_view name) {
    if (name == "esn") return Topology::Esn;
    if (name == "brc") return Topology::Brc;
    if (name == "pbrc") return Topology::Pbrc;
    fail(ErrorKind::Config, "unknown topology '" + std::string(name) + "' (expected esn, brc or pbrc)");
}

std::string_view to_string(Topology topology) {
    switch (topology) {
        case Topology::Esn: return "esn";
        case Topology::Brc: return "brc";
        case Topology::Pbrc: return "pbrc";
    }
    return "unknown";
}

Encoder::Encoder(ReservoirConfig config, ReservoirWeights esn)
    : config_(config), model_(std::move(esn)) {}

Encoder::Encoder(BidirReservoir brc) : config_(brc.config), model_(std::move(brc)) {}

Encoder::Encoder(PbrcEncoder pbrc)
    : config_(pbrc.units.empty() ? ReservoirConfig{} : pbrc.units.front().config),
      model_(std::move(pbrc)) {
    if (std::get<PbrcEncoder>(model_).units.empty()) {
        fail(ErrorKind::Config, "Encoder: parallel encoder has no units");
    }
}

Encoder Encoder::create(Topology topology, const ReservoirConfig& config, Eigen::Index n_in,
                        int n_brc) {
    switch (topology) {
        case Topology::Esn: return Encoder(config, init_reservoir(config, n_in));
        case Topology::Brc: return Encoder(init_bidir(config, n_in));
        case Topology::Pbrc: return Encoder(init_pbrc(config, n_in, n_brc));
    }
    fail(ErrorKind::Config, "Encoder::create: unknown topology");
}

Topology Encoder::topology() const {
    switch (model_.index()) {
        case 0: return Topology::Esn;
        case 1: return Topology::Brc;
        default: return Topology::Pbrc;
    }
}

Eigen::Index Encoder::n_in() const {
    return std::visit([](const auto& m) { return m.n_in(); }, model_);
}

Eigen::Index Encoder::encoded_dim() const {
    struct Visitor {
        Eigen::Index operator()(const ReservoirWeights& w) const { return w.n_r(); }
        Eigen::Index operator()(const BidirReservoir& b) const { return b.encoded_dim(); }
        Eigen::Index operator()(const PbrcEncoder& p) const { return p.encoded_dim(); }
    };
    return std::visit(Visitor{}, model_);
}

Vector Encoder::encode(const Matrix& frames, PoolingOptions pooling) const {
    struct Visitor {
        const Matrix& frames;
        PoolingOptions pooling;
        double alpha;
        Vector operator()(const ReservoirWeights& w) const {
            return pool(run(w, frames, alpha), pooling);
        }
        Vector operator()(const BidirReservoir& b) const { return bidir_encode(b, frames, pooling); }
        Vector operator()(const PbrcEncoder& p) const { return pbrc_encode(p, frames, pooling); }
    };
    return std::visit(Visitor{frames, pooling, config_.alpha}, model_);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
    if (workers < 1) fail(ErrorKind::Config, "workers must be >= 1");

    std::mutex failure_mutex;
    std::size_t failed_index = count;
    std::exception_ptr failure;
    auto guarded = [&](std::size_t i) {
        try {
            task(i);
        } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (i < failed_index) {
                failed_index = i;
                failure = std::current_exception();
            }
        }
    };

    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) guarded(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) guarded(i);
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

Matrix encode_dataset(const Encoder& encoder, std::span<const Matrix> sequences,
                      PoolingOptions pooling, int workers, std::span<const std::string> ids) {
    Matrix out(static_cast<Eigen::Index>(sequences.size()), encoder.encoded_dim());
    parallel_for(sequences.size(), workers, [&](std::size_t i) {
        try {
            out.row(static_cast<Eigen::Index>(i)) = encoder.encode(sequences[i], pooling).transpose();
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "sample ";
            if (i < ids.size()) {
                msg << "'" << ids[i] << "'";
            } else {
                msg << "#" << i;
            }
            msg << ": " << e.what();
            throw Error(e.kind(), msg.str());
        }
    });
    return out;
}

}  // namespace pbrc
