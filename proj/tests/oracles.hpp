// Reference computations used by the tests. Written with plain loops over
// std::vector so they share no code path with the library under test.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pbrc/numerics.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid to_grid(const pbrc::Matrix& m) {
    Grid g(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
    return g;
}

inline pbrc::Matrix to_matrix(const Grid& g) {
    pbrc::Matrix m(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.front().size()));
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g[i].size(); ++j) m(i, j) = g[i][j];
    return m;
}

inline Grid matmul(const Grid& a, const Grid& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.front().size();
    Grid c(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][p] * b[p][j];
    return c;
}

inline Grid transpose(const Grid& a) {
    Grid t(a.front().size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
    return t;
}

/// Solves A Z = B by Gaussian elimination with partial pivoting.
inline Grid gauss_solve(Grid a, Grid b) {
    const std::size_t n = a.size();
    const std::size_t m = b.front().size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) throw std::runtime_error("oracle: singular system");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            for (std::size_t c = 0; c < m; ++c) b[r][c] -= f * b[col][c];
        }
    }
    Grid z(n, std::vector<double>(m, 0.0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t c = 0; c < m; ++c) {
            double s = b[i][c];
            for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * z[j][c];
            z[i][c] = s / a[i][i];
        }
    }
    return z;
}

/// W_out = ((X^T X + lambda I)^{-1} X^T Y)^T via explicit normal equations.
inline pbrc::Matrix ridge(const pbrc::Matrix& x, const pbrc::Matrix& y, double lambda) {
    const Grid xg = to_grid(x);
    const Grid xt = transpose(xg);
    Grid gram = matmul(xt, xg);
    for (std::size_t i = 0; i < gram.size(); ++i) gram[i][i] += lambda;
    const Grid rhs = matmul(xt, to_grid(y));
    return to_matrix(transpose(gauss_solve(gram, rhs)));
}

/// Reference SplitMix64 stream.
struct SplitMix {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }
};

/// Random orthogonal n x n matrix: classical Gram-Schmidt on random columns.
inline Grid random_orthogonal(std::size_t n, SplitMix& rng) {
    Grid cols(n, std::vector<double>(n));
    for (auto& c : cols)
        for (auto& v : c) v = 2.0 * rng.unit() - 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < k; ++j) {
                double d = 0.0;
                for (std::size_t i = 0; i < n; ++i) d += cols[k][i] * cols[j][i];
                for (std::size_t i = 0; i < n; ++i) cols[k][i] -= d * cols[j][i];
            }
        }
        double norm = 0.0;
        for (double v : cols[k]) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : cols[k]) v /= norm;
    }
    return transpose(cols);
}

/// Q diag(d) Q^T for a random orthogonal Q: a symmetric matrix with spectrum d.
inline pbrc::Matrix known_spectrum(const std::vector<double>& d, SplitMix& rng) {
    const std::size_t n = d.size();
    const Grid q = random_orthogonal(n, rng);
    Grid qd = q;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) qd[i][j] *= d[j];
    return to_matrix(matmul(qd, transpose(q)));
}

/// Largest |eigenvalue| of a real 2 x 2 matrix from its characteristic polynomial.
inline double radius_2x2(double a, double b, double c, double d) {
    const double tr = a + d;
    const double det = a * d - b * c;
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return std::max(std::abs(tr / 2.0 + s), std::abs(tr / 2.0 - s));
    }
    return std::sqrt(det);
}

inline double max_abs_diff(const pbrc::Matrix& a, const pbrc::Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace oracle
