#include "disent/error.hpp"
#include "disent/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace disent;

TEST_CASE("contingency examples") {
    const int u[] = {0, 0, 1};
    auto t = contingency(u, u);
    CHECK(t.rows == 2);
    CHECK(t.cols == 2);
    CHECK(t.counts == std::vector<std::int64_t>{2, 0, 0, 1});

    const int a[] = {0, 1};
    const int b[] = {1, 0};
    CHECK(contingency(a, b).counts == std::vector<std::int64_t>{0, 1, 1, 0});

    const int c[] = {5, 5};
    CHECK_THROWS_AS(contingency(u, c), Error);

    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = oracle::random_labels(rng, 40, 4);
        auto y = oracle::random_labels(rng, 40, 3);
        auto tab = contingency(x, y);
        std::int64_t total = 0;
        for (auto v : tab.counts) total += v;
        CHECK(total == 40);
        // Rows follow ascending label order; check each marginal against a direct count.
        std::vector<int> seen(x.begin(), x.end());
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (std::size_t i = 0; i < seen.size(); ++i)
            CHECK(tab.row_sums[i] == std::count(x.begin(), x.end(), seen[i]));
    }
}

TEST_CASE("entropy examples") {
    const std::int64_t uniform[] = {5, 5, 5, 5};
    CHECK(entropy(uniform, 20) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    const std::int64_t single[] = {7};
    CHECK(entropy(single, 7) == 0.0);
    const std::int64_t skew[] = {3, 1};
    CHECK(entropy(skew, 4) == doctest::Approx(0.56233514461880829).epsilon(1e-14));
    CHECK_THROWS_AS(entropy(skew, 0), Error);
}

TEST_CASE("mutual information examples and brute-force agreement") {
    const int u[] = {0, 0, 1, 1};
    const int v[] = {0, 1, 0, 1};
    CHECK(mutual_information(contingency(u, u)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(std::abs(mutual_information(contingency(u, v))) <= 1e-15);

    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(50);
        auto a = oracle::random_labels(rng, n, 1 + static_cast<int>(rng.below(6)));
        auto b = oracle::random_labels(rng, n, 1 + static_cast<int>(rng.below(6)));
        auto t = contingency(a, b);
        const double mi = mutual_information(t);
        CHECK(std::abs(mi - oracle::brute_force_mi(a, b)) <= 1e-12);
        CHECK(mi <= std::min(oracle::brute_force_entropy(a), oracle::brute_force_entropy(b)) + 1e-12);
        CHECK(std::abs(mi - mutual_information(contingency(b, a))) <= 1e-12);
    }
}

TEST_CASE("expected mutual information") {
    const std::int64_t one[] = {10};
    const std::int64_t two[] = {4, 6};
    CHECK(expected_mutual_information(one, two, 10) == 0.0);
    CHECK(expected_mutual_information(two, one, 10) == 0.0);

    // Exact value for marginals [2,2] x [2,2], N = 4, by enumerating all 24
    // permutations: ln(2) / 3.
    const std::int64_t half[] = {2, 2};
    CHECK(expected_mutual_information(half, half, 4) == doctest::Approx(0.23104906018664842).epsilon(1e-13));

    auto u = oracle::labels_from_marginals({2, 2});
    CHECK(std::abs(expected_mutual_information(half, half, 4) - oracle::permutation_emi(u, u, 100000, 3)) <=
          0.005);

    const std::int64_t a[] = {3, 1, 4};
    const std::int64_t b[] = {5, 3};
    const double emi = expected_mutual_information(a, b, 8);
    const double ha = entropy(a, 8), hb = entropy(b, 8);
    CHECK(emi <= std::min(ha, hb));
    CHECK(emi >= 0.0);

    // Large N stays finite in log-Gamma space.
    const std::int64_t big_a[] = {400000, 600000};
    const std::int64_t big_b[] = {500000, 500000};
    const double big = expected_mutual_information(big_a, big_b, 1000000);
    CHECK(std::isfinite(big));
    CHECK(big >= 0.0);
    CHECK(big < 1e-5);
}

TEST_CASE("ami and nmi examples") {
    const int u[] = {0, 0, 1, 1, 2, 2};
    const int relabeled[] = {7, 7, 3, 3, 9, 9};
    CHECK(ami(u, u) == 1.0);
    CHECK(nmi(u, u) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ami(u, relabeled) == 1.0);
    CHECK(nmi(u, relabeled) == doctest::Approx(1.0).epsilon(1e-15));

    const int a[] = {0, 0, 1, 1};
    const int b[] = {0, 1, 0, 1};
    CHECK(ami(a, b) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(ami(a, b) <= 0.0);

    const int ones[] = {4, 4, 4, 4};
    CHECK(ami(ones, ones) == 1.0);
    CHECK(nmi(ones, ones) == 1.0);
    CHECK(ami(ones, a) == 0.0);
    CHECK(nmi(a, ones) == 0.0);

    const int short_labels[] = {0, 1};
    CHECK_THROWS_AS(ami(a, short_labels), Error);
    CHECK_THROWS_AS(nmi(a, short_labels), Error);
}

TEST_CASE("metric symmetry, relabeling invariance and bounds") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.below(60);
        auto a = oracle::random_labels(rng, n, 2 + static_cast<int>(rng.below(5)));
        auto b = oracle::random_labels(rng, n, 2 + static_cast<int>(rng.below(5)));
        for (auto norm : {Normalization::Max, Normalization::Arithmetic, Normalization::Geometric,
                          Normalization::Min}) {
            CHECK(std::abs(ami(a, b, norm) - ami(b, a, norm)) <= 1e-12);
            CHECK(std::abs(nmi(a, b, norm) - nmi(b, a, norm)) <= 1e-12);
            CHECK(ami(a, b, norm) <= 1.0);
            const double s = nmi(a, b, norm);
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
        std::vector<int> mapped(n);
        for (std::size_t i = 0; i < n; ++i) mapped[i] = 100 - 3 * b[i];
        CHECK(std::abs(ami(a, b) - ami(a, mapped)) <= 1e-12);
        CHECK(std::abs(nmi(a, b) - nmi(a, mapped)) <= 1e-12);
    }
}

TEST_CASE("ami of independent labelings averages to zero") {
    Rng rng(5);
    double sum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto a = oracle::random_labels(rng, 200, 5);
        auto b = oracle::random_labels(rng, 200, 5);
        sum += ami(a, b);
    }
    const double mean = sum / 100.0;
    CHECK(mean >= -0.02);
    CHECK(mean <= 0.02);
}

TEST_CASE("activation histogram") {
    DenseMatrix one(1, 5);
    one(0, 3) = 2.0;
    const int cls[] = {7};
    auto h = activation_histogram(one, cls);
    CHECK(h.classes == 8);
    CHECK(h(7, 3) == 1);
    std::int64_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == 1);

    Rng rng(6);
    auto acts = oracle::random_matrix(rng, 50, 4);
    auto labels = oracle::random_labels(rng, 50, 3);
    auto hist = activation_histogram(acts, labels);
    for (std::size_t c = 0; c < hist.classes; ++c) {
        std::int64_t row = 0;
        for (std::size_t t = 0; t < hist.neurons; ++t) row += hist(c, t);
        CHECK(row == std::count(labels.begin(), labels.end(), static_cast<int>(c)));
    }

    // One-hot activations: the histogram is the class-by-hot-index crosstab.
    DenseMatrix hot(30, 4);
    std::vector<int> hot_index(30);
    for (std::size_t i = 0; i < 30; ++i) {
        hot_index[i] = static_cast<int>(rng.below(4));
        hot(i, static_cast<std::size_t>(hot_index[i])) = 1.0;
    }
    const std::vector<int> first30(labels.begin(), labels.begin() + 30);
    auto crosstab_hist = activation_histogram(hot, first30);
    for (std::size_t c = 0; c < crosstab_hist.classes; ++c)
        for (std::size_t t = 0; t < 4; ++t) {
            std::int64_t expected = 0;
            for (std::size_t i = 0; i < 30; ++i)
                expected += labels[i] == static_cast<int>(c) && hot_index[i] == static_cast<int>(t);
            CHECK(crosstab_hist(c, t) == expected);
        }

    // Ties go to the lowest neuron index.
    DenseMatrix tie(1, 3, 1.0);
    const int zero[] = {0};
    CHECK(activation_histogram(tie, zero)(0, 0) == 1);
    CHECK_THROWS_AS(activation_histogram(acts, zero), Error);
}
