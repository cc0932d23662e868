#pragma once

#include "disent/numerics.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace disent {

struct KMeansOptions {
    std::size_t k = 10;
    std::size_t n_init = 10;
    std::size_t max_iter = 300;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

struct ClusteringResult {
    std::vector<int> assignments;
    DenseMatrix centroids;
    double inertia = 0.0;
    std::size_t iterations_run = 0;
    std::size_t restart_index = 0;
    // Inertia after each assignment step of the winning restart.
    std::vector<double> inertia_trace;
    // Final inertia of every restart, in restart order.
    std::vector<double> restart_inertias;
};

// Lloyd's algorithm with k-means++ seeding and restarts. Restart r draws from
// a generator derived from (seed, r) only, so results do not depend on how
// restarts are scheduled, and a larger n_init sees a superset of restarts.
ClusteringResult kmeans(const DenseMatrix& x, const KMeansOptions& options);

// Nearest centroid by squared Euclidean distance; ties go to the lowest index.
std::vector<int> assign(const DenseMatrix& x, const DenseMatrix& centroids);

double inertia(const DenseMatrix& x, const DenseMatrix& centroids, std::span<const int> assignments);

}  // namespace disent
