#pragma once

// Stratified k-fold cross-validation and the PCA component-pair grid search.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/feature_store.hpp"
#include "stegica/pca.hpp"
#include "stegica/rng.hpp"
#include "stegica/svm.hpp"

namespace stegica {

struct CVReport {
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::uint64_t seed = 0;
    int k = 0;
    /// Worst KKT violation over all fold models (standardized training space).
    double max_kkt_violation = 0.0;
    bool all_converged = true;
};

struct CVOptions {
    int k = 5;
    double C = 1.0;
    double gamma_k = 0.125;
    std::uint64_t seed = 0;
    /// Pick (C, gamma_k) from a small grid by inner CV on each training split.
    bool tune = false;
};

/// Called once per fold with that fold's training and test row indices,
/// before anything is fitted.
using FoldObserver = std::function<void(int fold, std::span<const std::size_t> train, std::span<const std::size_t> test)>;

/// Fold index per row. Each class is shuffled independently and dealt
/// round-robin; the next class continues where the previous one stopped, so
/// per-class and total fold sizes differ by at most one.
/// Both classes are dealt round-robin in the order of one shared shuffle of
/// within-class positions, so the t-th cover and the t-th stego always land in
/// the same fold (cover/stego twins never straddle train and test).
inline std::vector<int> stratified_folds(std::span<const int> targets, int k, std::uint64_t seed) {
    if (k < 2) throw UsageError("k must be at least 2");
    std::vector<int> fold(targets.size(), -1);
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] != -1 && targets[i] != 1) throw UsageError("targets must be -1 or +1");
        by_class[targets[i] > 0 ? 1 : 0].push_back(i);
    }
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < static_cast<std::size_t>(k))
            throw DataError("class " + std::string(c ? "stego" : "cover") + " has " + std::to_string(by_class[c].size()) +
                            " samples, fewer than k=" + std::to_string(k));
    std::vector<std::size_t> order(std::max(by_class[0].size(), by_class[1].size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "stratified_folds", 0));
    rng.shuffle(order.begin(), order.end());
    for (const auto& members : by_class) {
        int next = 0;
        for (std::size_t t : order) {
            if (t >= members.size()) continue;
            fold[members[t]] = next;
            next = (next + 1) % k;
        }
    }
    return fold;
}

inline double population_std(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

namespace detail {

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
    return out;
}

inline std::vector<int> gather(std::span<const int> v, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(v[r]);
    return out;
}

inline double accuracy(const SVMModel& model, const Eigen::MatrixXd& x, std::span<const int> y) {
    std::size_t ok = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto p = svm_predict(model, x.row(i).transpose());
        if (svm_target(p.label) == y[static_cast<std::size_t>(i)]) ++ok;
    }
    return x.rows() > 0 ? static_cast<double>(ok) / static_cast<double>(x.rows()) : 0.0;
}

} // namespace detail

inline constexpr std::array<double, 3> kTuneC = {0.1, 1.0, 10.0};
inline constexpr std::array<double, 3> kTuneGamma = {1.0 / 32, 1.0 / 8, 1.0 / 2};

inline CVReport kfold_cv(const Eigen::MatrixXd& x, std::span<const int> y, const CVOptions& opts,
                         const FoldObserver& observer = {});

/// Inner stratified 3-fold search over kTuneC x kTuneGamma; ties keep the
/// earlier grid point.
inline SVMParams select_hyperparameters(const Eigen::MatrixXd& x, std::span<const int> y, std::uint64_t seed) {
    SVMParams best;
    double best_acc = -1.0;
    for (double c : kTuneC) {
        for (double g : kTuneGamma) {
            CVOptions inner;
            inner.k = 3;
            inner.C = c;
            inner.gamma_k = g;
            inner.seed = derive_seed(seed, "tune", 0);
            const CVReport r = kfold_cv(x, y, inner);
            if (r.mean_accuracy > best_acc) {
                best_acc = r.mean_accuracy;
                best.C = c;
                best.gamma_k = g;
            }
        }
    }
    return best;
}

/// Stratified k-fold CV. Each fold fits its standardizer and SVM on that
/// fold's training rows only.
inline CVReport kfold_cv(const Eigen::MatrixXd& x, std::span<const int> y, const CVOptions& opts,
                         const FoldObserver& observer) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw UsageError("kfold_cv: label count does not match rows");
    const std::vector<int> fold = stratified_folds(y, opts.k, opts.seed);

    CVReport rep;
    rep.seed = opts.seed;
    rep.k = opts.k;
    for (int f = 0; f < opts.k; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test : train).push_back(i);
        if (observer) observer(f, train, test);

        const Eigen::MatrixXd xtr = detail::gather_rows(x, train);
        const std::vector<int> ytr = detail::gather(y, train);
        SVMParams params;
        if (opts.tune) {
            params = select_hyperparameters(xtr, ytr, derive_seed(opts.seed, "fold", static_cast<std::uint64_t>(f)));
        } else {
            params.C = opts.C;
            params.gamma_k = opts.gamma_k;
        }
        Standardizer s = standardize_fit(xtr);
        const Eigen::MatrixXd ztr = s.apply_rows(xtr);
        const SVMTrainResult tr = svm_train(ztr, ytr, params, std::move(s));
        rep.all_converged = rep.all_converged && tr.converged;
        rep.max_kkt_violation = std::max(rep.max_kkt_violation, kkt_max_violation(tr.model, ztr, ytr, tr.alpha));

        rep.fold_accuracies.push_back(detail::accuracy(tr.model, detail::gather_rows(x, test), detail::gather(y, test)));
    }
    rep.mean_accuracy = std::accumulate(rep.fold_accuracies.begin(), rep.fold_accuracies.end(), 0.0) / opts.k;
    rep.std_accuracy = population_std(rep.fold_accuracies);
    return rep;
}

/// Feature matrix (n x 8) and SVM targets from feature records.
struct LabeledMatrix {
    Eigen::MatrixXd x;
    std::vector<int> y;
};

inline LabeledMatrix to_matrix(const std::vector<FeatureRecord>& records) {
    LabeledMatrix m;
    m.x.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(kFeatureDim));
    m.y.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t k = 0; k < kFeatureDim; ++k)
            m.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = records[i].features[k];
        m.y.push_back(svm_target(records[i].label));
    }
    return m;
}

inline CVReport kfold_cv(const std::vector<FeatureRecord>& records, const CVOptions& opts,
                         const FoldObserver& observer = {}) {
    const LabeledMatrix m = to_matrix(records);
    return kfold_cv(m.x, m.y, opts, observer);
}

struct PairScore {
    int i = 0;
    int j = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

struct GridSearchResult {
    ComponentIndexPair best{1, 2};
    double best_mean_accuracy = 0.0;
    std::vector<PairScore> table;
};

/// All 66 unordered pairs (i < j) of components 1..12 in lexicographic order.
inline std::vector<ComponentIndexPair> all_component_pairs() {
    std::vector<ComponentIndexPair> out;
    for (int i = 1; i <= kNumBands; ++i)
        for (int j = i + 1; j <= kNumBands; ++j) out.emplace_back(i, j);
    return out;
}

/// Cross-validates the features produced for each candidate pair and keeps
/// the best mean accuracy; ties go to the lexicographically smaller pair.
/// `features_for(pair)` must re-run extraction for that pair.
template <class FeatureFn>
GridSearchResult grid_search_pca_pair(FeatureFn&& features_for, std::span<const ComponentIndexPair> candidates,
                                      const CVOptions& opts) {
    if (candidates.empty()) throw UsageError("grid search needs at least one candidate pair");
    std::vector<ComponentIndexPair> order(candidates.begin(), candidates.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.first() != b.first() ? a.first() < b.first() : a.second() < b.second();
    });
    GridSearchResult res;
    bool first = true;
    for (const auto& pair : order) {
        const std::vector<FeatureRecord> records = features_for(pair);
        const CVReport rep = kfold_cv(records, opts);
        res.table.push_back({pair.first(), pair.second(), rep.mean_accuracy, rep.std_accuracy});
        if (first || rep.mean_accuracy > res.best_mean_accuracy) {
            res.best = pair;
            res.best_mean_accuracy = rep.mean_accuracy;
            first = false;
        }
    }
    return res;
}

inline void write_score_table(const std::vector<PairScore>& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "i,j,mean_acc,std_acc\n";
    for (const auto& r : table)
        out << r.i << ',' << r.j << ',' << format_real(r.mean_accuracy) << ',' << format_real(r.std_accuracy) << '\n';
    if (!out) throw DataError("write failure on " + path.string());
}

} // namespace stegica
