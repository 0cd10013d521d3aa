#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbrc/numerics.hpp"

namespace pbrc {

/// Linear classifier head: scores = W_out x, one row of W_out per class.
struct RidgeReadout {
    Matrix w_out;                      // C x feature_dim
    double lambda = 1e-3;
    std::vector<std::string> classes;  // sorted, unique

    Eigen::Index feature_dim() const { return w_out.cols(); }
    Eigen::Index n_classes() const { return w_out.rows(); }

    /// Index of `label` in classes, or nullopt.
    std::optional<Eigen::Index> class_index(const std::string& label) const;
};

struct ClassCounts {
    std::string label;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;
};

struct Metrics {
    std::map<int, double> top_k;
    std::int64_t n_samples = 0;
    /// One-vs-rest counts from the top-1 prediction.
    std::vector<ClassCounts> confusion;
    std::optional<double> train_time_ms;
};

inline constexpr double kDefaultLambda = 1e-3;

/// The lambda grid searched by validation sweeps: 1e-6, 1e-5, ..., 1e1.
std::vector<double> lambda_grid();

/// One-hot {0, 1} targets over the lexicographically sorted unique labels,
/// then ridge_solve. Throws DegenerateTask for fewer than two classes.
RidgeReadout fit_readout(const Matrix& x, std::span<const std::string> labels, double lambda);

Vector predict_scores(const RidgeReadout& r, const Vector& x);

/// Indices of the min(k, C) highest scores, descending; ties go to the lower index.
std::vector<Eigen::Index> top_k(const Vector& scores, int k);

/// top_k mapped to class labels.
std::vector<std::string> top_k_labels(const RidgeReadout& r, const Vector& scores, int k);

/// Fraction of rows whose true label is among the top-k scores, for each k in ks.
/// Throws UnknownLabel listing every label not in r.classes.
Metrics evaluate(const RidgeReadout& r, const Matrix& x, std::span<const std::string> labels,
                 std::span<const int> ks);

}  // namespace pbrc
