#include "pbrc/bidir.hpp"

#include <sstream>

#include "pbrc/error.hpp"

namespace pbrc {

BidirReservoir init_bidir(const ReservoirConfig& config, Eigen::Index n_in) {
    config.validate();
    if (n_in < 1) fail(ErrorKind::Dimension, "init_bidir: input dimension must be >= 1");

    RngStream rng(config.seed);
    const Uniform input_dist{-config.input_scaling, config.input_scaling};
    BidirReservoir b;
    b.config = config;
    b.w_in_f = random_matrix(config.n_r, n_in, input_dist, rng);
    b.w_in_b = random_matrix(config.n_r, n_in, input_dist, rng);
    b.w_r = rescale_to_spectral_radius(random_matrix(config.n_r, config.n_r, {-0.5, 0.5}, rng),
                                       config.rho);
    return b;
}

Matrix reverse_sequence(const Matrix& frames) {
    return frames.colwise().reverse();
}

Vector bidir_encode(const BidirReservoir& b, const Matrix& frames, PoolingOptions pooling) {
    if (frames.cols() != b.n_in()) {
        std::ostringstream msg;
        msg << "bidir_encode: frames have " << frames.cols() << " features, reservoir expects "
            << b.n_in();
        fail(ErrorKind::Dimension, msg.str());
    }
    const double alpha = b.config.alpha;
    Vector out(b.encoded_dim());
    const Vector x0 = Vector::Zero(b.n_r());
    out.head(b.n_r()) = pool(run(b.w_in_f, b.w_r, frames, alpha, x0), pooling);
    out.tail(b.n_r()) = pool(run(b.w_in_b, b.w_r, reverse_sequence(frames), alpha, x0), pooling);
    return out;
}

}  // namespace pbrc
