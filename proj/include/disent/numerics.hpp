#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace disent {

// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool all_finite() const noexcept;

    DenseMatrix transposed() const;
    DenseMatrix select_rows(std::span<const std::size_t> indices) const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using DenseVector = std::vector<double>;

// A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// A * B^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
// A^T * B
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

DenseVector column_means(const DenseMatrix& x);
DenseMatrix center_columns(const DenseMatrix& x);

// Softmax outputs are floored here before any logarithm is taken.
inline constexpr double kProbFloor = 1e-12;

// Strictly positive probability vector summing to one.
class ProbVector {
public:
    ProbVector() = default;
    // Validates positivity and normalization.
    explicit ProbVector(std::vector<double> p);

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    std::span<const double> values() const noexcept { return p_; }

private:
    friend ProbVector softmax(std::span<const double> v);
    struct Unchecked {};
    ProbVector(std::vector<double> p, Unchecked) : p_(std::move(p)) {}
    std::vector<double> p_;
};

// Max-subtracted softmax, floored at kProbFloor.
ProbVector softmax(std::span<const double> v);

// Writes softmax of `v` into `out`. Same arithmetic as softmax().
void softmax_into(std::span<const double> v, std::span<double> out);

// Row-wise softmax of a matrix.
DenseMatrix softmax_rows(const DenseMatrix& x);

// D_KL(p || q) in nats.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const ProbVector& p, const ProbVector& q);

// max(0, m - D_KL(p || q)).
double hinged_kl(const ProbVector& p, const ProbVector& q, double margin);
double hinged_kl(std::span<const double> p, std::span<const double> q, double margin);

struct PcaResult {
    DenseMatrix components;   // k x d, orthonormal rows
    DenseMatrix projected;    // n x k
    DenseVector eigenvalues;  // k, descending
};

// Top-k principal components by power iteration with deflation on the
// sample covariance (1/(n-1) normalization).
PcaResult pca_project(const DenseMatrix& x, std::size_t k);

}  // namespace disent
