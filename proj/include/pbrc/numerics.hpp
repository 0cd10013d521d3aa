#pragma once

#include <Eigen/Core>

#include <cstddef>

#include "pbrc/rng.hpp"

namespace pbrc {

/// Dense real matrix, row-major.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Uniform {
    double lo = -1.0;
    double hi = 1.0;
};

/// Draws rows * cols entries from `dist`, consumed from `rng` in row-major order.
Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Uniform dist, RngStream& rng);

struct PowerIterationOptions {
    double tol = 1e-9;
    int max_iters = 10000;
};

struct SpectralRadiusEstimate {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Estimates max |lambda_i| of a square matrix.
///
/// Power iteration from the normalized all-ones vector, advanced in blocks of
/// m = min(n, 20) products. Each block builds an Arnoldi basis of the Krylov
/// space K_m(W, v) and takes the largest-modulus Ritz value of the projected
/// m x m Hessenberg matrix. A conjugate pair, or a cluster of eigenvalues
/// with nearly equal modulus, is resolved by the projection instead of
/// stalling the plain iterate. The next block starts from W^m v / |W^m v|,
/// so the sequence of start vectors is exactly that of power iteration.
/// Converges when the Ritz residual |W V y - theta V y| falls below
/// tol * |theta|. `iterations` counts products with W.
///
/// Throws ConvergenceError (carrying the last estimate) if that does not
/// happen within max_iters products.
SpectralRadiusEstimate estimate_spectral_radius(const Matrix& w,
                                                PowerIterationOptions options = {});

/// Returns rho * W / rho(W). Throws DegenerateMatrix when rho(W) == 0.
Matrix rescale_to_spectral_radius(const Matrix& w, double rho,
                                  PowerIterationOptions options = {});

/// Closed-form ridge readout, returned as C x N:
///     W_out = ((X^T X + lambda I)^-1 X^T Y)^T
/// The system is solved by Cholesky factorization followed by one step of
/// iterative refinement. Throws Singular when the Gram matrix is not
/// numerically positive definite.
Matrix ridge_solve(const Matrix& x, const Matrix& y, double lambda);

bool all_finite(const Matrix& m);

}  // namespace pbrc
