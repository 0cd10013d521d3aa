#include "pbrc/readout.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "pbrc/error.hpp"
#include "pbrc/log.hpp"

namespace pbrc {

std::optional<Eigen::Index> RidgeReadout::class_index(const std::string& label) const {
    const auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) return std::nullopt;
    return static_cast<Eigen::Index>(it - classes.begin());
}

std::vector<double> lambda_grid() {
    return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1};
}

RidgeReadout fit_readout(const Matrix& x, std::span<const std::string> labels, double lambda) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        std::ostringstream msg;
        msg << "fit_readout: " << x.rows() << " feature rows but " << labels.size() << " labels";
        fail(ErrorKind::Dimension, msg.str());
    }
    const std::set<std::string> unique(labels.begin(), labels.end());
    if (unique.size() < 2) {
        fail(ErrorKind::DegenerateTask, "fit_readout: training data must contain at least two classes");
    }

    RidgeReadout r;
    r.lambda = lambda;
    r.classes.assign(unique.begin(), unique.end());
    if (labels.size() < r.classes.size()) {
        log_warning("fit_readout: fewer samples than classes");
    }

    Matrix y = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(r.classes.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y(static_cast<Eigen::Index>(i), *r.class_index(labels[i])) = 1.0;
    }
    r.w_out = ridge_solve(x, y, lambda);
    return r;
}

Vector predict_scores(const RidgeReadout& r, const Vector& x) {
    if (x.size() != r.feature_dim()) {
        std::ostringstream msg;
        msg << "predict_scores: feature vector has " << x.size() << " entries, readout expects "
            << r.feature_dim();
        fail(ErrorKind::Dimension, msg.str());
    }
    return r.w_out * x;
}

std::vector<Eigen::Index> top_k(const Vector& scores, int k) {
    if (k < 1) fail(ErrorKind::Config, "top_k: k must be >= 1");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    order.resize(keep);
    return order;
}

std::vector<std::string> top_k_labels(const RidgeReadout& r, const Vector& scores, int k) {
    std::vector<std::string> out;
    for (const Eigen::Index i : top_k(scores, k)) out.push_back(r.classes.at(static_cast<std::size_t>(i)));
    return out;
}

Metrics evaluate(const RidgeReadout& r, const Matrix& x, std::span<const std::string> labels,
                 std::span<const int> ks) {
    if (x.rows() < 1) fail(ErrorKind::EmptyInput, "evaluate: no samples");
    if (static_cast<std::size_t>(x.rows()) != labels.size()) {
        fail(ErrorKind::Dimension, "evaluate: feature rows and labels differ in count");
    }
    if (x.cols() != r.feature_dim()) {
        std::ostringstream msg;
        msg << "evaluate: features have " << x.cols() << " columns, readout expects " << r.feature_dim();
        fail(ErrorKind::Dimension, msg.str());
    }
    if (ks.empty()) fail(ErrorKind::Config, "evaluate: no k values requested");
    for (const int k : ks) {
        if (k < 1) fail(ErrorKind::Config, "evaluate: every k must be >= 1");
    }

    std::vector<Eigen::Index> truth(labels.size());
    std::set<std::string> unknown;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto idx = r.class_index(labels[i]);
        if (!idx) {
            unknown.insert(labels[i]);
        } else {
            truth[i] = *idx;
        }
    }
    if (!unknown.empty()) {
        std::ostringstream msg;
        msg << "evaluate: labels not known to the model:";
        for (const auto& label : unknown) msg << " '" << label << "'";
        fail(ErrorKind::UnknownLabel, msg.str());
    }

    const Matrix scores = x * r.w_out.transpose();
    const int max_k = *std::max_element(ks.begin(), ks.end());
    const auto n_classes = static_cast<std::size_t>(r.n_classes());

    std::map<int, std::int64_t> hits;
    for (const int k : ks) hits[k] = 0;
    Metrics m;
    m.n_samples = x.rows();
    m.confusion.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) m.confusion[c].label = r.classes[c];

    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto ranked = top_k(scores.row(i).transpose(), max_k);
        const Eigen::Index target = truth[static_cast<std::size_t>(i)];
        const auto rank = std::find(ranked.begin(), ranked.end(), target) - ranked.begin();
        for (auto& [k, count] : hits) {
            if (rank < k) ++count;
        }
        const auto predicted = static_cast<std::size_t>(ranked.front());
        if (predicted == static_cast<std::size_t>(target)) {
            ++m.confusion[predicted].tp;
        } else {
            ++m.confusion[predicted].fp;
            ++m.confusion[static_cast<std::size_t>(target)].fn;
        }
    }
    for (auto& counts : m.confusion) {
        counts.tn = m.n_samples - counts.tp - counts.fp - counts.fn;
    }
    for (const auto& [k, count] : hits) {
        m.top_k[k] = static_cast<double>(count) / static_cast<double>(m.n_samples);
    }
    return m;
}

}  // namespace pbrc
