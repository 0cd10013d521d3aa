#include "pbrc/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pbrc/error.hpp"

namespace pbrc {

namespace {

// Shared by step() and run() so both follow the same evaluation order.
void advance(const Matrix& w_in, const Matrix& w_r, const Eigen::Ref<const Vector>& x,
             const Eigen::Ref<const Vector>& u, double alpha, Vector& pre, Eigen::Ref<Vector> out) {
    pre.noalias() = w_in * u;
    pre.noalias() += w_r * x;
    out = (1.0 - alpha) * x + alpha * pre.unaryExpr([](double v) { return std::tanh(v); });
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        fail(ErrorKind::Config, "leak rate alpha must lie in (0, 1]");
    }
}

}  // namespace

void ReservoirConfig::validate() const {
    if (n_r < 1) fail(ErrorKind::Config, "reservoir needs at least one node");
    check_alpha(alpha);
    if (!(rho > 0.0 && rho <= 1.0)) fail(ErrorKind::Config, "spectral radius rho must lie in (0, 1]");
    if (!(input_scaling > 0.0) || !std::isfinite(input_scaling)) {
        fail(ErrorKind::Config, "input_scaling must be a positive finite number");
    }
}

PoolingPolicy parse_pooling(std::string_view name) {
    if (name == "mean") return PoolingPolicy::Mean;
    if (name == "last") return PoolingPolicy::Last;
    fail(ErrorKind::Config, "unknown pooling policy '" + std::string(name) + "' (expected mean or last)");
}

std::string_view to_string(PoolingPolicy policy) {
    return policy == PoolingPolicy::Mean ? "mean" : "last";
}

ReservoirWeights init_reservoir(const ReservoirConfig& config, Eigen::Index n_in, RngStream& rng) {
    config.validate();
    if (n_in < 1) fail(ErrorKind::Dimension, "init_reservoir: input dimension must be >= 1");

    ReservoirWeights w;
    w.w_in = random_matrix(config.n_r, n_in, {-config.input_scaling, config.input_scaling}, rng);
    const Matrix raw = random_matrix(config.n_r, config.n_r, {-0.5, 0.5}, rng);
    w.w_r = rescale_to_spectral_radius(raw, config.rho);
    return w;
}

ReservoirWeights init_reservoir(const ReservoirConfig& config, Eigen::Index n_in) {
    RngStream rng(config.seed);
    return init_reservoir(config, n_in, rng);
}

Vector step(const Vector& x, const Vector& u, const ReservoirWeights& w, double alpha) {
    check_alpha(alpha);
    if (x.size() != w.n_r() || u.size() != w.n_in()) {
        std::ostringstream msg;
        msg << "step: expected state of size " << w.n_r() << " and input of size " << w.n_in()
            << ", got " << x.size() << " and " << u.size();
        fail(ErrorKind::Dimension, msg.str());
    }
    Vector pre(w.n_r());
    Vector out(w.n_r());
    advance(w.w_in, w.w_r, x, u, alpha, pre, out);
    return out;
}

StateTrajectory run(const Matrix& w_in, const Matrix& w_r, const Matrix& frames, double alpha,
                    const Vector& x0) {
    check_alpha(alpha);
    const Eigen::Index n_r = w_r.rows();
    if (w_r.cols() != n_r || w_in.rows() != n_r) {
        fail(ErrorKind::Dimension, "run: W_in and W_r disagree on the node count");
    }
    if (frames.rows() < 1) fail(ErrorKind::EmptyInput, "run: sequence has no frames");
    if (frames.cols() != w_in.cols()) {
        std::ostringstream msg;
        msg << "run: frames have " << frames.cols() << " features, reservoir expects " << w_in.cols();
        fail(ErrorKind::Dimension, msg.str());
    }
    if (x0.size() != n_r) fail(ErrorKind::Dimension, "run: initial state has the wrong size");

    const Eigen::Index t_len = frames.rows();
    StateTrajectory traj;
    traj.states.resize(t_len, n_r);
    Vector pre(n_r);
    Vector x = x0;
    Vector next(n_r);
    for (Eigen::Index t = 0; t < t_len; ++t) {
        advance(w_in, w_r, x, frames.row(t).transpose(), alpha, pre, next);
        traj.states.row(t) = next.transpose();
        x.swap(next);
    }
    return traj;
}

StateTrajectory run(const ReservoirWeights& w, const Matrix& frames, double alpha, const Vector& x0) {
    return run(w.w_in, w.w_r, frames, alpha, x0);
}

StateTrajectory run(const ReservoirWeights& w, const Matrix& frames, double alpha) {
    return run(w, frames, alpha, Vector::Zero(w.n_r()));
}

Vector pool(const StateTrajectory& trajectory, PoolingOptions options) {
    const Eigen::Index t_len = trajectory.t_len();
    if (t_len < 1) fail(ErrorKind::EmptyInput, "pool: trajectory is empty");
    if (options.policy == PoolingPolicy::Last) {
        return trajectory.states.row(t_len - 1).transpose();
    }
    const Eigen::Index skip = std::clamp<Eigen::Index>(options.washout, 0, t_len - 1);
    const Eigen::Index kept = t_len - skip;
    return trajectory.states.bottomRows(kept).colwise().sum().transpose() / static_cast<double>(kept);
}

}  // namespace pbrc
