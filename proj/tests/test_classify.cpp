#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "stegica/cross_validation.hpp"
#include "stegica/model_io.hpp"
#include "stegica/svm.hpp"

using namespace stegica;

namespace {

struct Data {
    Eigen::MatrixXd x;
    std::vector<int> y;
};

// Two Gaussian blobs, n per class, centered at -sep/2 and +sep/2 along every axis.
Data blobs(int n, int dim, double sep, Rng& rng) {
    Data d;
    d.x.resize(2 * n, dim);
    for (int i = 0; i < 2 * n; ++i) {
        const int lab = i < n ? -1 : 1;
        d.y.push_back(lab);
        for (int k = 0; k < dim; ++k) d.x(i, k) = lab * sep / 2 + rng.normal();
    }
    return d;
}

Data xor_data(int n, Rng& rng) {
    Data d;
    d.x.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        d.x(i, 0) = a + (a > 0 ? 0.2 : -0.2);
        d.x(i, 1) = b + (b > 0 ? 0.2 : -0.2);
        d.y.push_back(a * b > 0 ? 1 : -1);
    }
    return d;
}

double train_accuracy(const SVMModel& m, const Data& d) {
    int ok = 0;
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
        const int p = svm_predict(m, d.x.row(i).transpose()).label == Label::stego ? 1 : -1;
        ok += p == d.y[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(ok) / static_cast<double>(d.x.rows());
}

std::vector<FeatureRecord> records_from(const Data& d) {
    std::vector<FeatureRecord> out;
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
        FeatureRecord r;
        r.path = "img" + std::to_string(i);
        r.label = d.y[static_cast<std::size_t>(i)] > 0 ? Label::stego : Label::cover;
        for (std::size_t k = 0; k < kFeatureDim; ++k) r.features[k] = d.x(i, static_cast<Eigen::Index>(k));
        out.push_back(r);
    }
    return out;
}

} // namespace

TEST(Standardizer, TwoPointColumn) {
    Eigen::MatrixXd x(2, 2);
    x << 0, 5, 2, 5;
    const Standardizer s = standardize_fit(x);
    EXPECT_EQ(s.mean(0), 1.0);
    EXPECT_EQ(s.scale(0), 1.0);
    EXPECT_EQ(s.mean(1), 5.0);
    EXPECT_EQ(s.scale(1), 1.0); // constant column
    const Eigen::MatrixXd z = s.apply_rows(x);
    EXPECT_EQ(z(0, 0), -1.0);
    EXPECT_EQ(z(1, 0), 1.0);
    EXPECT_EQ(z(0, 1), 0.0);
}

TEST(Standardizer, TrainingColumnsCentered) {
    Rng rng(8);
    Eigen::MatrixXd x(137, 8);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = 100 * k + std::exp(static_cast<double>(k)) * rng.normal();
    const Eigen::MatrixXd z = standardize_fit(x).apply_rows(x);
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
        EXPECT_NEAR(z.col(k).mean(), 0.0, 1e-12);
        EXPECT_NEAR(std::sqrt(z.col(k).squaredNorm() / 137.0), 1.0, 1e-12);
    }
    EXPECT_THROW(standardize_fit(x.topRows(1)), DataError);
}

TEST(Svm, SeparableBlobsAndKkt) {
    Rng rng(1);
    const Data d = blobs(50, 8, 8.0, rng);
    SVMParams p;
    p.gamma_k = 1.0;
    const SVMTrainResult r = train_classifier(d.x, d.y, p);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(train_accuracy(r.model, d), 1.0);
    const Eigen::MatrixXd z = r.model.standardizer.apply_rows(d.x);
    EXPECT_LE(kkt_max_violation(r.model, z, d.y, r.alpha), 1e-3);
    EXPECT_LE(r.final_gap, 1e-3);
    for (Eigen::Index i = 0; i < r.alpha.size(); ++i) {
        EXPECT_GE(r.alpha(i), 0.0);
        EXPECT_LE(r.alpha(i), p.C);
    }
    // sum_i alpha_i y_i = 0
    double s = 0;
    for (Eigen::Index i = 0; i < r.alpha.size(); ++i) s += r.alpha(i) * d.y[static_cast<std::size_t>(i)];
    EXPECT_NEAR(s, 0.0, 1e-9);
}

TEST(Svm, XorWithRbfKernel) {
    Rng rng(2);
    const Data d = xor_data(200, rng);
    SVMParams p;
    p.C = 10.0;
    p.gamma_k = 1.0;
    const SVMTrainResult r = train_classifier(d.x, d.y, p);
    EXPECT_GE(train_accuracy(r.model, d), 0.95);
    EXPECT_LE(kkt_max_violation(r.model, r.model.standardizer.apply_rows(d.x), d.y, r.alpha), 1e-3);
}

TEST(Svm, ZeroDecisionIsCover) {
    SVMModel m;
    m.support_vectors = Eigen::MatrixXd::Zero(1, 2);
    m.dual_coefs = Eigen::VectorXd::Zero(1);
    m.standardizer = Standardizer::identity(2);
    const Prediction p = svm_predict(m, Eigen::Vector2d(3, 4));
    EXPECT_EQ(p.decision, 0.0);
    EXPECT_EQ(p.label, Label::cover);
}

TEST(Svm, DimensionAndLabelErrors) {
    Rng rng(3);
    const Data d = blobs(10, 8, 4.0, rng);
    const SVMTrainResult r = train_classifier(d.x, d.y, {});
    EXPECT_THROW(svm_predict(r.model, Eigen::VectorXd::Zero(7)), DataError);

    const std::vector<int> all_pos(d.y.size(), 1);
    EXPECT_THROW(train_classifier(d.x, all_pos, {}), Error);
    const std::vector<int> short_y(d.y.begin(), d.y.end() - 1);
    EXPECT_THROW(train_classifier(d.x, short_y, {}), UsageError);
}

TEST(Svm, InvariantToRowPermutation) {
    Rng rng(4);
    const Data d = blobs(40, 8, 1.5, rng);
    const SVMTrainResult a = train_classifier(d.x, d.y, {});
    std::vector<std::size_t> perm(d.y.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    Data e;
    e.x.resize(d.x.rows(), d.x.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        e.x.row(static_cast<Eigen::Index>(i)) = d.x.row(static_cast<Eigen::Index>(perm[i]));
        e.y.push_back(d.y[perm[i]]);
    }
    const SVMTrainResult b = train_classifier(e.x, e.y, {});
    // Both solutions are within the stopping tolerance of the same optimum.
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd q(8);
        for (auto& v : q) v = 2 * rng.normal();
        EXPECT_NEAR(a.model.decision(q), b.model.decision(q), 5e-3);
    }
}

TEST(ModelIo, RoundTripPreservesDecisions) {
    Rng rng(5);
    const Data d = blobs(30, 8, 2.0, rng);
    const SVMModel m = train_classifier(d.x, d.y, {}).model;
    std::stringstream ss;
    save_model(m, ss);
    const SVMModel back = load_model(ss);
    for (Eigen::Index i = 0; i < d.x.rows(); ++i)
        EXPECT_EQ(m.decision(d.x.row(i).transpose()), back.decision(d.x.row(i).transpose()));
    std::stringstream junk("not a model\n");
    EXPECT_THROW(load_model(junk), DataError);
}

TEST(Folds, BalancedSizes) {
    std::vector<int> y(100);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = i < 50 ? -1 : 1;
    const std::vector<int> f = stratified_folds(y, 5, 7);
    for (int k = 0; k < 5; ++k) {
        int cov = 0, st = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (f[i] == k) (y[i] < 0 ? cov : st)++;
        EXPECT_EQ(cov, 10);
        EXPECT_EQ(st, 10);
    }
    EXPECT_THROW(stratified_folds(y, 1, 0), UsageError);
    const std::vector<int> bad = {-1, 0, 1};
    EXPECT_THROW(stratified_folds(bad, 2, 0), UsageError);
}

// Property: per-class fold sizes never differ by more than one; with equal
// class sizes the t-th member of each class shares a fold.
TEST(Folds, PropertyRandomClassSizes) {
    Rng rng(6);
    for (int t = 0; t < 200; ++t) {
        const int k = 2 + static_cast<int>(rng.below(9));
        const int nc = k + static_cast<int>(rng.below(60));
        const int ns = t % 2 ? nc : k + static_cast<int>(rng.below(60));
        std::vector<int> y;
        for (int i = 0; i < nc + ns; ++i) y.push_back(i < nc ? -1 : 1);
        rng.shuffle(y.begin(), y.end());
        const std::vector<int> f = stratified_folds(y, k, rng.next_u64());
        std::vector<int> cc(static_cast<std::size_t>(k)), sc(static_cast<std::size_t>(k));
        std::vector<int> cov_f, st_f;
        for (std::size_t i = 0; i < y.size(); ++i) {
            ASSERT_GE(f[i], 0);
            ASSERT_LT(f[i], k);
            (y[i] < 0 ? cc : sc)[static_cast<std::size_t>(f[i])]++;
            (y[i] < 0 ? cov_f : st_f).push_back(f[i]);
        }
        EXPECT_LE(*std::max_element(cc.begin(), cc.end()) - *std::min_element(cc.begin(), cc.end()), 1);
        EXPECT_LE(*std::max_element(sc.begin(), sc.end()) - *std::min_element(sc.begin(), sc.end()), 1);
        if (nc == ns) EXPECT_EQ(cov_f, st_f);
    }
}

TEST(Folds, TooFewSamplesIsDataError) {
    const std::vector<int> y = {-1, -1, 1, 1, 1, 1, 1};
    EXPECT_THROW(stratified_folds(y, 3, 0), DataError);
}

TEST(CrossValidation, NoLeakageBetweenTrainAndTest) {
    Rng rng(7);
    const Data d = blobs(25, 8, 3.0, rng);
    std::vector<int> seen(d.y.size(), 0);
    CVOptions o;
    o.seed = 11;
    const CVReport r = kfold_cv(d.x, d.y, o, [&](int, std::span<const std::size_t> train, std::span<const std::size_t> test) {
        std::set<std::size_t> tr(train.begin(), train.end());
        for (std::size_t i : test) {
            EXPECT_EQ(tr.count(i), 0u);
            ++seen[i];
        }
        EXPECT_EQ(train.size() + test.size(), d.y.size());
    });
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_EQ(r.fold_accuracies.size(), 5u);
    EXPECT_LE(r.max_kkt_violation, 1e-3);
}

TEST(CrossValidation, SeparableFeaturesScorePerfectly) {
    Rng rng(8);
    const Data d = blobs(50, 8, 12.0, rng);
    const CVReport r = kfold_cv(records_from(d), {});
    EXPECT_EQ(r.mean_accuracy, 1.0);
    EXPECT_EQ(r.std_accuracy, 0.0);
}

TEST(CrossValidation, RandomLabelsNearChance) {
    Rng rng(9);
    Data d;
    d.x.resize(400, 8);
    for (auto& v : d.x.reshaped()) v = rng.normal();
    for (int i = 0; i < 400; ++i) d.y.push_back(i < 200 ? -1 : 1);
    const CVReport r = kfold_cv(d.x, d.y, {});
    EXPECT_NEAR(r.mean_accuracy, 0.5, 0.1);
}

TEST(CrossValidation, SameSeedSameReport) {
    Rng rng(10);
    const Data d = blobs(30, 8, 1.0, rng);
    CVOptions o;
    o.seed = 3;
    const CVReport a = kfold_cv(d.x, d.y, o), b = kfold_cv(d.x, d.y, o);
    EXPECT_EQ(a.fold_accuracies, b.fold_accuracies);
}

TEST(CrossValidation, TunedHyperparametersFromGrid) {
    Rng rng(11);
    const Data d = xor_data(90, rng);
    const SVMParams p = select_hyperparameters(d.x, d.y, 1);
    EXPECT_NE(std::find(kTuneC.begin(), kTuneC.end(), p.C), kTuneC.end());
    EXPECT_NE(std::find(kTuneGamma.begin(), kTuneGamma.end(), p.gamma_k), kTuneGamma.end());
}

TEST(GridSearch, SingleCandidate) {
    Rng rng(12);
    const Data d = blobs(20, 8, 4.0, rng);
    const std::vector<ComponentIndexPair> cand = {{1, 2}};
    const GridSearchResult r = grid_search_pca_pair([&](ComponentIndexPair) { return records_from(d); }, cand, {});
    EXPECT_EQ(r.best, ComponentIndexPair(1, 2));
    ASSERT_EQ(r.table.size(), 1u);
    EXPECT_THROW(grid_search_pca_pair([&](ComponentIndexPair) { return records_from(d); },
                                      std::span<const ComponentIndexPair>{}, {}),
                 UsageError);
}

TEST(GridSearch, FindsTheInformativePair) {
    // Only the (9, 11) features carry the label.
    Rng rng(13);
    const Data informative = blobs(40, 8, 6.0, rng);
    Data noise = informative;
    for (auto& v : noise.x.reshaped()) v = rng.normal();
    const auto pairs = all_component_pairs();
    ASSERT_EQ(pairs.size(), 66u);
    const GridSearchResult r = grid_search_pca_pair(
        [&](ComponentIndexPair p) { return records_from(p == ComponentIndexPair(9, 11) ? informative : noise); }, pairs, {});
    EXPECT_EQ(r.best, ComponentIndexPair(9, 11));
    EXPECT_EQ(r.table.size(), 66u);
    EXPECT_EQ(r.table.front().i, 1);
    EXPECT_EQ(r.table.front().j, 2);
    EXPECT_EQ(r.table.back().i, 11);
    EXPECT_EQ(r.table.back().j, 12);
}

TEST(GridSearch, TiesGoToSmallerPair) {
    Rng rng(14);
    const Data d = blobs(20, 8, 12.0, rng);
    const std::vector<ComponentIndexPair> cand = {{3, 4}, {1, 5}, {2, 3}};
    const GridSearchResult r = grid_search_pca_pair([&](ComponentIndexPair) { return records_from(d); }, cand, {});
    EXPECT_EQ(r.best, ComponentIndexPair(1, 5));
}
