#include "disent/clustering.hpp"

#include "disent/error.hpp"
#include "disent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace disent {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Returns (index, distance) of the nearest centroid.
std::pair<int, double> nearest(std::span<const double> point, const DenseMatrix& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(point, centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return {best, best_d};
}

DenseMatrix kmeans_plus_plus(const DenseMatrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows();
    DenseMatrix centroids(k, x.cols());
    auto first = x.row(rng.below(n));
    std::copy(first.begin(), first.end(), centroids.row(0).begin());

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), centroids.row(0));

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            while (d2[pick] == 0.0 && pick > 0) --pick;
        } else {
            // Every point coincides with a chosen centroid.
            pick = rng.below(n);
        }
        auto row = x.row(pick);
        std::copy(row.begin(), row.end(), centroids.row(c).begin());
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], squared_distance(x.row(i), centroids.row(c)));
    }
    return centroids;
}

struct RestartResult {
    std::vector<int> assignments;
    DenseMatrix centroids;
    double inertia = 0.0;
    std::size_t iterations = 0;
    std::vector<double> trace;
};

RestartResult lloyd(const DenseMatrix& x, const KMeansOptions& opt, Rng& rng) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t k = opt.k;

    RestartResult r;
    r.centroids = kmeans_plus_plus(x, k, rng);
    r.assignments.assign(n, 0);
    std::vector<double> dist(n);
    std::vector<std::size_t> counts(k);

    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        double total = 0.0;
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto [c, dd] = nearest(x.row(i), r.centroids);
            r.assignments[i] = c;
            dist[i] = dd;
            ++counts[static_cast<std::size_t>(c)];
            total += dd;
        }

        // Empty clusters seize the point farthest from its current centroid.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i)
                if (counts[static_cast<std::size_t>(r.assignments[i])] > 1 && dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            if (far == n) break;
            --counts[static_cast<std::size_t>(r.assignments[far])];
            r.assignments[far] = static_cast<int>(c);
            ++counts[c];
            total -= dist[far];
            dist[far] = 0.0;
            auto row = x.row(far);
            std::copy(row.begin(), row.end(), r.centroids.row(c).begin());
        }
        r.trace.push_back(total);
        r.iterations = it + 1;

        DenseMatrix updated(k, d);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = x.row(i);
            auto dst = updated.row(static_cast<std::size_t>(r.assignments[i]));
            for (std::size_t j = 0; j < d; ++j) dst[j] += row[j];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            auto dst = updated.row(c);
            if (counts[c] == 0) {
                auto old = r.centroids.row(c);
                std::copy(old.begin(), old.end(), dst.begin());
                continue;
            }
            for (auto& v : dst) v /= static_cast<double>(counts[c]);
            shift = std::max(shift, std::sqrt(squared_distance(dst, r.centroids.row(c))));
        }
        r.centroids = std::move(updated);
        if (shift < opt.tol) break;
    }

    r.assignments = assign(x, r.centroids);
    r.inertia = inertia(x, r.centroids, r.assignments);
    return r;
}

}  // namespace

std::vector<int> assign(const DenseMatrix& x, const DenseMatrix& centroids) {
    require(x.cols() == centroids.cols(), ErrorKind::Shape,
            "assign: point and centroid dimensions differ");
    require(centroids.rows() >= 1, ErrorKind::InvalidInput, "assign: no centroids");
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = nearest(x.row(i), centroids).first;
    return out;
}

double inertia(const DenseMatrix& x, const DenseMatrix& centroids, std::span<const int> assignments) {
    require(assignments.size() == x.rows(), ErrorKind::Shape, "inertia: assignment count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto c = static_cast<std::size_t>(assignments[i]);
        require(c < centroids.rows(), ErrorKind::InvalidInput, "inertia: assignment out of range");
        total += squared_distance(x.row(i), centroids.row(c));
    }
    return total;
}

ClusteringResult kmeans(const DenseMatrix& x, const KMeansOptions& options) {
    const std::size_t n = x.rows();
    require(options.k >= 1, ErrorKind::InvalidInput, "kmeans: k must be >= 1");
    require(options.k <= n, ErrorKind::InvalidInput,
            "kmeans: k = " + std::to_string(options.k) + " exceeds sample count " + std::to_string(n));
    require(options.n_init >= 1, ErrorKind::InvalidInput, "kmeans: n_init must be >= 1");
    require(options.max_iter >= 1, ErrorKind::InvalidInput, "kmeans: max_iter must be >= 1");
    require(x.all_finite(), ErrorKind::InvalidInput, "kmeans: input contains non-finite values");

    ClusteringResult best;
    bool have = false;
    for (std::size_t restart = 0; restart < options.n_init; ++restart) {
        Rng rng(mix_seed(options.seed, restart));
        RestartResult r = lloyd(x, options, rng);
        best.restart_inertias.push_back(r.inertia);
        if (!have || r.inertia < best.inertia) {
            have = true;
            best.assignments = std::move(r.assignments);
            best.centroids = std::move(r.centroids);
            best.inertia = r.inertia;
            best.iterations_run = r.iterations;
            best.restart_index = restart;
            best.inertia_trace = std::move(r.trace);
        }
    }
    return best;
}

}  // namespace disent
