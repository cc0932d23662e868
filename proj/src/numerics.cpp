#include "disent/numerics.hpp"

#include "disent/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace disent {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, ErrorKind::Shape,
            "matrix data length " + std::to_string(data_.size()) + " != " +
                std::to_string(rows_) + "x" + std::to_string(cols_));
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    DenseMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r].size() == cols, ErrorKind::Shape, "ragged rows");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> indices) const {
    DenseMatrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        require(indices[i] < rows_, ErrorKind::InvalidInput, "row index out of range");
        auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.rows(), ErrorKind::Shape, "matmul: inner dimensions differ");
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.cols(), ErrorKind::Shape, "matmul_nt: inner dimensions differ");
    DenseMatrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto arow = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            auto brow = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
            out(i, j) = s;
        }
    }
    return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows() == b.rows(), ErrorKind::Shape, "matmul_tn: inner dimensions differ");
    DenseMatrix out(a.cols(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto arow = a.row(r);
        auto brow = b.row(r);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double ai = arow[i];
            if (ai == 0.0) continue;
            auto orow = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += ai * brow[j];
        }
    }
    return out;
}

DenseVector column_means(const DenseMatrix& x) {
    DenseVector mu(x.cols(), 0.0);
    if (x.rows() == 0) return mu;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = x.row(r);
        for (std::size_t c = 0; c < x.cols(); ++c) mu[c] += row[c];
    }
    for (auto& v : mu) v /= static_cast<double>(x.rows());
    return mu;
}

DenseMatrix center_columns(const DenseMatrix& x) {
    const auto mu = column_means(x);
    DenseMatrix out = x;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < x.cols(); ++c) row[c] -= mu[c];
    }
    return out;
}

ProbVector::ProbVector(std::vector<double> p) : p_(std::move(p)) {
    require(!p_.empty(), ErrorKind::InvalidInput, "empty probability vector");
    double sum = 0.0;
    for (double v : p_) {
        require(std::isfinite(v) && v > 0.0, ErrorKind::Domain,
                "probability entries must be strictly positive");
        sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::Domain,
            "probability vector does not sum to 1");
}

void softmax_into(std::span<const double> v, std::span<double> out) {
    require(!v.empty(), ErrorKind::InvalidInput, "softmax of empty vector");
    require(v.size() == out.size(), ErrorKind::Shape, "softmax output size mismatch");
    double mx = v[0];
    for (double x : v) {
        require(std::isfinite(x), ErrorKind::InvalidInput, "softmax input not finite");
        mx = std::max(mx, x);
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < v.size(); ++t) {
        out[t] = std::exp(v[t] - mx);
        sum += out[t];
    }
    for (auto& p : out) p = std::max(p / sum, kProbFloor);
}

ProbVector softmax(std::span<const double> v) {
    std::vector<double> p(v.size());
    softmax_into(v, p);
    return ProbVector(std::move(p), ProbVector::Unchecked{});
}

DenseMatrix softmax_rows(const DenseMatrix& x) {
    DenseMatrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) softmax_into(x.row(r), out.row(r));
    return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), ErrorKind::Shape, "kl_divergence: length mismatch");
    double kl = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) {
        require(p[t] > 0.0 && q[t] > 0.0, ErrorKind::Domain,
                "kl_divergence: entries must be strictly positive");
        kl += p[t] * std::log(p[t] / q[t]);
    }
    return kl;
}

double kl_divergence(const ProbVector& p, const ProbVector& q) {
    return kl_divergence(p.values(), q.values());
}

double hinged_kl(std::span<const double> p, std::span<const double> q, double margin) {
    require(margin >= 0.0, ErrorKind::InvalidInput, "margin must be non-negative");
    return std::max(0.0, margin - kl_divergence(p, q));
}

double hinged_kl(const ProbVector& p, const ProbVector& q, double margin) {
    return hinged_kl(p.values(), q.values(), margin);
}

namespace {

DenseVector mat_vec(const DenseMatrix& a, const DenseVector& v) {
    DenseVector out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto row = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * v[j];
        out[i] = s;
    }
    return out;
}

double dot(const DenseVector& a, const DenseVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double normalize(DenseVector& v) {
    const double n = std::sqrt(dot(v, v));
    if (n > 0.0)
        for (auto& x : v) x /= n;
    return n;
}

// Removes the components of v along each (orthonormal) row of basis[0..count).
void orthogonalize(DenseVector& v, const DenseMatrix& basis, std::size_t count) {
    for (std::size_t c = 0; c < count; ++c) {
        auto b = basis.row(c);
        double s = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) s += v[j] * b[j];
        for (std::size_t j = 0; j < v.size(); ++j) v[j] -= s * b[j];
    }
}

}  // namespace

PcaResult pca_project(const DenseMatrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    require(k <= d, ErrorKind::Shape, "pca: k exceeds the feature dimension");
    require(n >= 2, ErrorKind::InvalidInput, "pca: need at least two samples");

    const DenseMatrix centered = center_columns(x);
    DenseMatrix cov = matmul_tn(centered, centered);
    for (auto& v : cov.data()) v /= static_cast<double>(n - 1);

    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, cov(i, i));

    PcaResult result{DenseMatrix(k, d), DenseMatrix(n, k), DenseVector(k, 0.0)};
    DenseMatrix deflated = cov;

    constexpr int kMaxIter = 100000;
    for (std::size_t c = 0; c < k; ++c) {
        // Deterministic start: a fixed non-symmetric ramp, orthogonalized
        // against the components already found.
        DenseVector v(d);
        for (std::size_t j = 0; j < d; ++j) v[j] = 1.0 + 0.01 * static_cast<double>(j);
        orthogonalize(v, result.components, c);
        if (normalize(v) == 0.0) {
            v.assign(d, 0.0);
            v[c] = 1.0;
            orthogonalize(v, result.components, c);
            normalize(v);
        }

        double lambda = 0.0;
        if (scale > 0.0) {
            for (int it = 0; it < kMaxIter; ++it) {
                DenseVector w = mat_vec(deflated, v);
                orthogonalize(w, result.components, c);
                const double norm = normalize(w);
                if (norm <= 1e-300) {
                    lambda = 0.0;
                    break;
                }
                lambda = dot(w, mat_vec(deflated, w));
                // Residual ||C w - lambda w|| relative to the top of the spectrum.
                DenseVector cw = mat_vec(deflated, w);
                double res = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double e = cw[j] - lambda * w[j];
                    res += e * e;
                }
                v = std::move(w);
                if (std::sqrt(res) <= 1e-13 * scale) break;
            }
        }

        // Sign convention: largest-magnitude entry positive.
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j)
            if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
        if (v[arg] < 0.0)
            for (auto& e : v) e = -e;

        std::copy(v.begin(), v.end(), result.components.row(c).begin());
        result.eigenvalues[c] = std::max(lambda, 0.0);

        // Hotelling deflation.
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) deflated(i, j) -= lambda * v[i] * v[j];
    }

    result.projected = matmul_nt(centered, result.components);
    return result;
}

}  // namespace disent
