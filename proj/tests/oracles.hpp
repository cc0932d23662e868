#pragma once

// Test-only reference computations. Nothing here calls into the production
// loss, metric, or clustering code paths it is used to check.

#include "disent/numerics.hpp"
#include "disent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

namespace oracle {

using disent::DenseMatrix;

inline DenseMatrix random_matrix(disent::Rng& rng, std::size_t rows, std::size_t cols,
                                 double scale = 1.0) {
    DenseMatrix m(rows, cols);
    for (auto& v : m.data()) v = scale * rng.normal();
    return m;
}

inline std::vector<int> random_labels(disent::Rng& rng, std::size_t n, int classes) {
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    return y;
}

// Central differences of f over every entry of x.
inline DenseMatrix finite_difference(const std::function<double(const DenseMatrix&)>& f,
                                     const DenseMatrix& x, double step = 1e-6) {
    DenseMatrix g(x.rows(), x.cols());
    DenseMatrix probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe.data()[i];
        probe.data()[i] = orig + step;
        const double up = f(probe);
        probe.data()[i] = orig - step;
        const double down = f(probe);
        probe.data()[i] = orig;
        g.data()[i] = (up - down) / (2.0 * step);
    }
    return g;
}

// Largest elementwise relative error. Entries smaller than the
// central-difference round-off level (eps * |loss| / step, times 1e5 so the
// 1e-4 tolerance sits above it) are compared against that floor instead.
inline double max_relative_error(const DenseMatrix& analytic, const DenseMatrix& numeric,
                                 double loss_value, double step = 1e-6) {
    const double noise = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(loss_value)) / step;
    const double floor = std::max(1e-6, 1e5 * noise);
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double a = analytic.data()[i];
        const double n = numeric.data()[i];
        const double denom = std::max({std::abs(a), std::abs(n), floor});
        worst = std::max(worst, std::abs(a - n) / denom);
    }
    return worst;
}

inline std::vector<double> direct_softmax(std::span<const double> v) {
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    std::vector<double> p(v.size());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (p[i] = std::exp(v[i] - mx));
    for (auto& x : p) x /= s;
    return p;
}

inline double direct_kl(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / q[i]);
    return s;
}

// Distance of the closest directed KL (over pairs accepted by `use`) to the margin.
inline double hinge_clearance(const DenseMatrix& rows, double margin,
                              const std::function<bool(std::size_t, std::size_t)>& use) {
    std::vector<std::vector<double>> p;
    for (std::size_t r = 0; r < rows.rows(); ++r) p.push_back(direct_softmax(rows.row(r)));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j)
            if (i != j && use(i, j)) best = std::min(best, std::abs(direct_kl(p[i], p[j]) - margin));
    return best;
}

// MI from joint and marginal probabilities by explicit double loops over the
// label alphabets.
inline double brute_force_mi(const std::vector<int>& u, const std::vector<int>& v) {
    const double n = static_cast<double>(u.size());
    std::map<int, double> pu, pv;
    std::map<std::pair<int, int>, double> puv;
    for (std::size_t s = 0; s < u.size(); ++s) {
        pu[u[s]] += 1.0 / n;
        pv[v[s]] += 1.0 / n;
        puv[{u[s], v[s]}] += 1.0 / n;
    }
    double mi = 0.0;
    for (const auto& [a, pa] : pu)
        for (const auto& [b, pb] : pv) {
            auto it = puv.find({a, b});
            if (it == puv.end()) continue;
            mi += it->second * std::log(it->second / (pa * pb));
        }
    return mi;
}

inline double brute_force_entropy(const std::vector<int>& u) {
    std::map<int, double> counts;
    for (int x : u) counts[x] += 1.0;
    double h = 0.0;
    for (const auto& [label, c] : counts) {
        const double p = c / static_cast<double>(u.size());
        h -= p * std::log(p);
    }
    return h;
}

// Monte-Carlo estimate of E[MI] under random permutation of the second
// labeling, with marginals fixed.
inline double permutation_emi(const std::vector<int>& u, std::vector<int> v, int shuffles,
                              std::uint64_t seed) {
    disent::Rng rng(seed);
    double sum = 0.0;
    for (int s = 0; s < shuffles; ++s) {
        rng.shuffle(v.begin(), v.end());
        sum += brute_force_mi(u, v);
    }
    return sum / shuffles;
}

inline std::vector<int> labels_from_marginals(const std::vector<int>& counts) {
    std::vector<int> out;
    for (std::size_t c = 0; c < counts.size(); ++c)
        for (int i = 0; i < counts[c]; ++i) out.push_back(static_cast<int>(c));
    return out;
}

}  // namespace oracle
