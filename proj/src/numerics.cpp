#include "pbrc/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pbrc/error.hpp"

namespace pbrc {

namespace {

void require_square(const Matrix& w, const char* what) {
    if (w.rows() < 1 || w.rows() != w.cols()) {
        std::ostringstream msg;
        msg << what << ": expected a non-empty square matrix, got " << w.rows() << "x" << w.cols();
        fail(ErrorKind::Dimension, msg.str());
    }
}

constexpr Eigen::Index kKrylovWindow = 20;

struct ArnoldiBlock {
    Eigen::Index size = 0;  // dimension of the Krylov space actually built
    double modulus = 0.0;   // largest |theta| among the Ritz values
    double residual = 0.0;  // residual norm of that Ritz pair
    Vector next;            // W^size v / |W^size v|, or empty if it vanished
};

// Arnoldi with modified Gram-Schmidt and one reorthogonalization pass.
ArnoldiBlock arnoldi_block(const Matrix& w, const Vector& v, Eigen::Index m, int budget) {
    const Eigen::Index n = w.rows();
    m = std::min<Eigen::Index>(m, budget);
    Matrix basis = Matrix::Zero(n, m + 1);
    Matrix h = Matrix::Zero(m + 1, m);
    basis.col(0) = v;

    ArnoldiBlock out;
    Eigen::Index k = 0;
    for (; k < m; ++k) {
        Vector q = w * basis.col(k);
        const double q_norm = q.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i <= k; ++i) {
                const double c = basis.col(i).dot(q);
                h(i, k) += c;
                q -= c * basis.col(i);
            }
        }
        const double beta = q.norm();
        h(k + 1, k) = beta;
        if (beta <= 4.0 * std::numeric_limits<double>::epsilon() * q_norm) {
            // K_{k+1} is invariant under W up to rounding.
            h(k + 1, k) = 0.0;
            ++k;
            break;
        }
        basis.col(k + 1) = q / beta;
    }
    out.size = k;

    // Power iterate expressed in the Arnoldi basis: W^j v = V c_j, c_j = H c_{j-1}.
    Vector c = Vector::Zero(k + 1);
    c[0] = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        c = (h.topLeftCorner(k + 1, k) * c.head(k)).eval();
        const double c_norm = c.norm();
        if (c_norm == 0.0) {
            c.setZero();
            break;
        }
        c /= c_norm;
    }
    if (c.norm() > 0.0) {
        Vector next = basis.leftCols(k + 1) * c;
        out.next = next / next.norm();
    }

    const Eigen::EigenSolver<Matrix> eig(h.topLeftCorner(k, k), true);
    if (eig.info() != Eigen::Success) {
        out.residual = std::numeric_limits<double>::infinity();
        return out;
    }
    Eigen::Index top = 0;
    for (Eigen::Index i = 1; i < k; ++i) {
        if (std::abs(eig.eigenvalues()[i]) > std::abs(eig.eigenvalues()[top])) top = i;
    }
    out.modulus = std::abs(eig.eigenvalues()[top]);
    const Eigen::VectorXcd y = eig.eigenvectors().col(top).normalized();
    out.residual = h(k, k - 1) * std::abs(y[k - 1]);
    return out;
}

}  // namespace

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Uniform dist, RngStream& rng) {
    if (rows < 1 || cols < 1) {
        std::ostringstream msg;
        msg << "random_matrix: dimensions must be positive, got " << rows << "x" << cols;
        fail(ErrorKind::Dimension, msg.str());
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = rng.uniform(dist.lo, dist.hi);
        }
    }
    return m;
}

SpectralRadiusEstimate estimate_spectral_radius(const Matrix& w, PowerIterationOptions options) {
    require_square(w, "estimate_spectral_radius");
    if (!(options.tol > 0.0) || options.max_iters < 1) {
        fail(ErrorKind::Config, "estimate_spectral_radius: tol must be > 0 and max_iters >= 1");
    }

    const Eigen::Index n = w.rows();
    const Eigen::Index window = std::min(n, kKrylovWindow);
    Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double best = 0.0;
    int used = 0;

    while (used < options.max_iters) {
        const ArnoldiBlock block = arnoldi_block(w, v, window, options.max_iters - used);
        used += static_cast<int>(block.size);
        best = block.modulus;
        if (block.residual <= options.tol * block.modulus) {
            return {block.modulus, used, true};
        }
        if (block.next.size() == 0) {
            // W^k v0 vanished: W is nilpotent on the Krylov space.
            return {0.0, used, true};
        }
        v = block.next;
    }

    std::ostringstream msg;
    msg << "power iteration did not converge within " << options.max_iters
        << " iterations (best estimate " << best << ")";
    throw ConvergenceError(msg.str(), best);
}

Matrix rescale_to_spectral_radius(const Matrix& w, double rho, PowerIterationOptions options) {
    require_square(w, "rescale_to_spectral_radius");
    if (!(rho > 0.0 && rho <= 1.0)) {
        fail(ErrorKind::Config, "rescale_to_spectral_radius: rho must lie in (0, 1]");
    }
    const double current = estimate_spectral_radius(w, options).value;
    if (current == 0.0) {
        fail(ErrorKind::DegenerateMatrix,
             "rescale_to_spectral_radius: matrix has zero spectral radius");
    }
    return w * (rho / current);
}

Matrix ridge_solve(const Matrix& x, const Matrix& y, double lambda) {
    if (x.rows() < 1 || x.cols() < 1 || y.cols() < 1) {
        fail(ErrorKind::Dimension, "ridge_solve: X and Y must be non-empty");
    }
    if (x.rows() != y.rows()) {
        std::ostringstream msg;
        msg << "ridge_solve: X has " << x.rows() << " rows but Y has " << y.rows();
        fail(ErrorKind::Dimension, msg.str());
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        fail(ErrorKind::Config, "ridge_solve: lambda must be a finite non-negative number");
    }

    const Eigen::Index n = x.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    gram.diagonal().array() += lambda;
    const Eigen::MatrixXd rhs = x.transpose() * y;

    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    bool singular = llt.info() != Eigen::Success;
    if (!singular) {
        // A pivot that is tiny relative to the largest diagonal entry means
        // the factorization only succeeded by rounding.
        const Eigen::VectorXd pivots = llt.matrixLLT().diagonal();
        const double max_diag = gram.diagonal().maxCoeff();
        const double min_pivot_sq = pivots.array().square().minCoeff();
        const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * max_diag;
        singular = !(min_pivot_sq > floor);
    }
    if (singular) {
        fail(ErrorKind::Singular,
             lambda == 0.0
                 ? "ridge_solve: X^T X is singular; use lambda > 0"
                 : "ridge_solve: X^T X + lambda I is not numerically positive definite");
    }

    Eigen::MatrixXd solution = llt.solve(rhs);
    const Eigen::MatrixXd residual = rhs - gram * solution;
    solution += llt.solve(residual);

    Matrix w_out = solution.transpose();
    if (!w_out.allFinite()) {
        fail(ErrorKind::Singular, "ridge_solve: solution is not finite");
    }
    return w_out;
}

}  // namespace pbrc
