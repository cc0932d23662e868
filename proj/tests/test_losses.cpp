#include "disent/error.hpp"
#include "disent/losses.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace disent;

namespace {

void check_gradient(const std::function<double(const DenseMatrix&)>& f, const DenseMatrix& x,
                    const DenseMatrix& analytic) {
    const auto numeric = oracle::finite_difference(f, x);
    CHECK(oracle::max_relative_error(analytic, numeric, f(x)) <= 1e-4);
}

bool all_zero(const DenseMatrix& m) {
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return v == 0.0; });
}

}  // namespace

TEST_CASE("loss_single examples") {
    DenseMatrix same = DenseMatrix::from_rows({{0.3, -1.0, 2.0}, {0.3, -1.0, 2.0}});
    CHECK(loss_single(same, 1.0).value == doctest::Approx(2.0).epsilon(1e-12));

    Rng rng(1);
    auto w = oracle::random_matrix(rng, 6, 4);
    auto zero = loss_single(w, 0.0);
    CHECK(zero.value == 0.0);
    CHECK(all_zero(zero.grad));

    DenseMatrix w2 = DenseMatrix::from_rows({{0.0, 0.0}, {std::log(9.0), 0.0}});
    CHECK(loss_single(w2, 1.0).value == doctest::Approx(1.1211101690655121).epsilon(1e-12));

    CHECK_THROWS_AS(loss_single(DenseMatrix(1, 4), 1.0), Error);
}

TEST_CASE("loss_multi examples") {
    DenseMatrix same = DenseMatrix::from_rows({{1.0, 2.0, 0.5}, {1.0, 2.0, 0.5}});
    const int same_label[] = {1, 1};
    CHECK(loss_multi(same, same_label, 0.5).value == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(2);
    auto h = oracle::random_matrix(rng, 2, 4);
    const int diff_label[] = {0, 1};
    auto r = loss_multi(h, diff_label, 0.5);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(all_zero(r.grad));

    auto h3 = oracle::random_matrix(rng, 3, 5);
    const int labels3[] = {0, 0, 1};
    CHECK(std::abs(loss_multi(h3, labels3, 1.0).value -
                   reference::pairwise(LossKind::Multi, h3, labels3, 1.0)) <= 1e-12);

    CHECK_THROWS_AS(loss_multi(DenseMatrix(0, 3), {}, 1.0), Error);
    const int short_labels[] = {0};
    CHECK_THROWS_AS(loss_multi(h3, short_labels, 1.0), Error);
}

TEST_CASE("loss_multi_unlabeled examples") {
    for (std::size_t n : {1u, 2u, 5u}) {
        DenseMatrix h(n, 3);
        for (std::size_t r = 0; r < n; ++r) {
            h(r, 0) = 0.1;
            h(r, 1) = 0.7;
            h(r, 2) = -0.4;
        }
        auto res = loss_multi_unlabeled(h, 0.8);
        CHECK(res.value == doctest::Approx(1.6).epsilon(1e-12));
        if (n == 1) CHECK(all_zero(res.grad));
    }
    Rng rng(3);
    auto h = oracle::random_matrix(rng, 4, 3);
    const int constant[] = {2, 2, 2, 2};
    auto a = loss_multi_unlabeled(h, 1.0);
    auto b = loss_multi(h, constant, 1.0);
    CHECK(a.value == b.value);
    CHECK(a.grad == b.grad);
    CHECK_THROWS_AS(loss_multi_unlabeled(DenseMatrix(0, 2), 1.0), Error);
}

TEST_CASE("loss_decov examples") {
    DenseMatrix same = DenseMatrix::from_rows({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
    CHECK(loss_decov(same).value == 0.0);
    Rng rng(4);
    CHECK(loss_decov(oracle::random_matrix(rng, 7, 1)).value == 0.0);
    CHECK(loss_decov(DenseMatrix::from_rows({{1.0, 1.0}, {-1.0, -1.0}})).value ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(loss_decov(DenseMatrix(1, 3)), Error);
}

TEST_CASE("loss_xcov examples") {
    Rng rng(5);
    auto h = oracle::random_matrix(rng, 4, 3);
    DenseMatrix flat(4, 1, 0.7);
    CHECK(loss_xcov(h, flat).value == 0.0);
    DenseMatrix flat_h(4, 3, -1.0);
    CHECK(loss_xcov(flat_h, oracle::random_matrix(rng, 4, 2)).value == 0.0);
    auto r = loss_xcov(DenseMatrix::from_rows({{2.0}, {0.0}}), DenseMatrix::from_rows({{1.0}, {0.0}}));
    CHECK(r.value == doctest::Approx(0.125).epsilon(1e-15));
    CHECK_THROWS_AS(loss_xcov(DenseMatrix(1, 2), DenseMatrix(1, 1)), Error);
}

TEST_CASE("loss_bce examples") {
    const int y[] = {0, 1, 1, 0};
    CHECK(loss_bce(DenseMatrix(4, 1, 0.5), y).value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(loss_bce(DenseMatrix::from_rows({{0.0}, {1.0}, {1.0}, {0.0}}), y).value <= 1e-11);
    const int one[] = {1};
    CHECK(loss_bce(DenseMatrix(1, 1, 0.9), one).value ==
          doctest::Approx(0.10536051565782628).epsilon(1e-14));
    CHECK_THROWS_AS(loss_bce(DenseMatrix(3, 1, 0.5), y), Error);
}

TEST_CASE("loss_autoencoder examples") {
    Rng rng(6);
    auto x = oracle::random_matrix(rng, 3, 4);
    DenseMatrix h(3, 2, 0.3);
    CHECK(loss_autoencoder(x, x, oracle::random_matrix(rng, 3, 2), 1.0, 0.0).value == 0.0);
    CHECK(loss_autoencoder(x, oracle::random_matrix(rng, 3, 4), h, 0.7, 1.0).value ==
          doctest::Approx(1.4).epsilon(1e-12));

    // Every reconstruction row off by (1, 1, 0, 0): squared norm 2.
    DenseMatrix xhat = x;
    for (std::size_t r = 0; r < 3; ++r) {
        xhat(r, 0) += 1.0;
        xhat(r, 1) -= 1.0;
    }
    CHECK(loss_autoencoder(x, xhat, h, 1.0, 0.5).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(loss_autoencoder(x, DenseMatrix(3, 3), h, 1.0, 0.5), Error);
}

TEST_CASE("every loss is non-negative") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        auto h = oracle::random_matrix(rng, 6, 4, 2.0);
        auto y = oracle::random_labels(rng, 6, 2);
        CHECK(loss_single(h, 3.0).value >= 0.0);
        CHECK(loss_multi(h, y, 0.5).value >= 0.0);
        CHECK(loss_multi_unlabeled(h, 0.5).value >= 0.0);
        CHECK(loss_decov(h).value >= 0.0);
        CHECK(loss_xcov(h, oracle::random_matrix(rng, 6, 1)).value >= 0.0);
    }
}

TEST_CASE("pairwise losses respect their upper bounds") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng.below(7);
        const double m = rng.uniform(0.0, 6.0);
        auto w = oracle::random_matrix(rng, k, 5, 0.3);
        CHECK(loss_single(w, m).value <= static_cast<double>(k * (k - 1)) * m + 1e-12);
        auto y = oracle::random_labels(rng, k, 2);
        CHECK(loss_multi(w, y, m).value <= 2.0 * m + 1e-12);
    }
}

TEST_CASE("loss_single is invariant to per-row shifts") {
    Rng rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        auto w = oracle::random_matrix(rng, 5, 6);
        auto shifted = w;
        const auto row = rng.below(5);
        const double c = rng.uniform(-10.0, 10.0);
        for (auto& v : shifted.row(row)) v += c;
        CHECK(std::abs(loss_single(w, 5.0).value - loss_single(shifted, 5.0).value) <= 1e-12);
    }
}

TEST_CASE("loss_multi is invariant to joint permutation") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + rng.below(8);
        auto h = oracle::random_matrix(rng, n, 4);
        auto y = oracle::random_labels(rng, n, 2);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm.begin(), perm.end());
        auto hp = h.select_rows(perm);
        std::vector<int> yp(n);
        for (std::size_t i = 0; i < n; ++i) yp[i] = y[perm[i]];
        CHECK(std::abs(loss_multi(h, y, 1.0).value - loss_multi(hp, yp, 1.0).value) <= 1e-12);
    }
}

TEST_CASE("vectorized pairwise losses match the nested-loop reference") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        auto w = oracle::random_matrix(rng, 8, 16);
        CHECK(std::abs(loss_single(w, 5.0).value - reference::pairwise(LossKind::Single, w, {}, 5.0)) <=
              1e-12);
        auto h = oracle::random_matrix(rng, 12, 6);
        auto y = oracle::random_labels(rng, 12, 2);
        CHECK(std::abs(loss_multi(h, y, 0.5).value - reference::pairwise(LossKind::Multi, h, y, 0.5)) <=
              1e-12);
        CHECK(std::abs(loss_multi_unlabeled(h, 0.5).value -
                       reference::pairwise(LossKind::Multi2, h, {}, 0.5)) <= 1e-12);
    }
    CHECK_THROWS_AS(reference::pairwise(LossKind::Decov, DenseMatrix(2, 2), {}, 1.0), Error);
}

TEST_CASE("analytic gradients match central differences") {
    Rng rng(14);
    int checked_single = 0, checked_multi = 0;
    while (checked_single < 20) {
        auto w = oracle::random_matrix(rng, 5, 4, 1.5);
        const double m = rng.uniform(0.2, 3.0);
        if (oracle::hinge_clearance(w, m, [](std::size_t, std::size_t) { return true; }) < 1e-4) continue;
        check_gradient([&](const DenseMatrix& x) { return loss_single(x, m).value; }, w,
                       loss_single(w, m).grad);
        ++checked_single;
    }
    while (checked_multi < 20) {
        auto h = oracle::random_matrix(rng, 7, 4, 1.5);
        auto y = oracle::random_labels(rng, 7, 2);
        const double m = rng.uniform(0.1, 1.5);
        auto same = [&](std::size_t i, std::size_t j) { return y[i] == y[j]; };
        if (oracle::hinge_clearance(h, m, same) < 1e-4) continue;
        check_gradient([&](const DenseMatrix& x) { return loss_multi(x, y, m).value; }, h,
                       loss_multi(h, y, m).grad);
        if (oracle::hinge_clearance(h, m, [](std::size_t, std::size_t) { return true; }) >= 1e-4)
            check_gradient([&](const DenseMatrix& x) { return loss_multi_unlabeled(x, m).value; }, h,
                           loss_multi_unlabeled(h, m).grad);
        ++checked_multi;
    }
    for (int trial = 0; trial < 20; ++trial) {
        auto h = oracle::random_matrix(rng, 6, 4);
        check_gradient([](const DenseMatrix& x) { return loss_decov(x).value; }, h, loss_decov(h).grad);

        auto yhat = oracle::random_matrix(rng, 6, 2);
        auto xc = loss_xcov(h, yhat);
        check_gradient([&](const DenseMatrix& x) { return loss_xcov(x, yhat).value; }, h, xc.grad_h);
        check_gradient([&](const DenseMatrix& x) { return loss_xcov(h, x).value; }, yhat, xc.grad_yhat);

        DenseMatrix probs(6, 1);
        for (auto& p : probs.data()) p = rng.uniform(0.05, 0.95);
        auto y = oracle::random_labels(rng, 6, 2);
        check_gradient([&](const DenseMatrix& x) { return loss_bce(x, y).value; }, probs,
                       loss_bce(probs, y).grad);

        auto x = oracle::random_matrix(rng, 6, 3);
        auto xhat = oracle::random_matrix(rng, 6, 3);
        const double alpha = rng.uniform();
        if (oracle::hinge_clearance(h, 0.5, [](std::size_t, std::size_t) { return true; }) < 1e-4) continue;
        auto ae = loss_autoencoder(x, xhat, h, 0.5, alpha);
        check_gradient([&](const DenseMatrix& z) { return loss_autoencoder(x, z, h, 0.5, alpha).value; },
                       xhat, ae.grad_xhat);
        check_gradient([&](const DenseMatrix& z) { return loss_autoencoder(x, xhat, z, 0.5, alpha).value; },
                       h, ae.grad_h);
    }
}

TEST_CASE("loss spec validation") {
    auto spec = LossSpec::with_defaults(LossKind::Single);
    CHECK(spec.margin == 5.0);
    CHECK(LossSpec::with_defaults(LossKind::Multi).margin == 0.5);
    CHECK(LossSpec::with_defaults(LossKind::Multi2).margin == 0.5);
    spec.validate(3);
    CHECK(spec.resolved_layer(3) == 1);
    spec.target_layer = 3;
    CHECK_THROWS_AS(spec.validate(3), Error);
    spec.target_layer = 0;
    spec.margin = -1.0;
    CHECK_THROWS_AS(spec.validate(3), Error);
    spec.margin = 1.0;
    spec.alpha = 1.5;
    CHECK_THROWS_AS(spec.validate(3), Error);
    CHECK(parse_loss_kind("baseline") == LossKind::None);
    CHECK(parse_loss_kind("multi2") == LossKind::Multi2);
    CHECK_FALSE(parse_loss_kind("bogus").has_value());
}
