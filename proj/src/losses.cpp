#include "disent/losses.hpp"

#include "disent/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace disent {

std::string_view to_string(LossKind kind) noexcept {
    switch (kind) {
        case LossKind::None: return "none";
        case LossKind::Single: return "single";
        case LossKind::Multi: return "multi";
        case LossKind::Multi2: return "multi2";
        case LossKind::Decov: return "decov";
        case LossKind::Xcov: return "xcov";
    }
    return "none";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) noexcept {
    for (auto k : {LossKind::None, LossKind::Single, LossKind::Multi, LossKind::Multi2,
                   LossKind::Decov, LossKind::Xcov})
        if (to_string(k) == name) return k;
    if (name == "baseline") return LossKind::None;
    return std::nullopt;
}

double default_margin(LossKind kind) noexcept {
    switch (kind) {
        case LossKind::Single: return kDefaultSingleMargin;
        case LossKind::Multi:
        case LossKind::Multi2: return kDefaultMultiMargin;
        default: return 0.0;
    }
}

LossSpec LossSpec::with_defaults(LossKind kind) {
    LossSpec spec;
    spec.kind = kind;
    spec.margin = default_margin(kind);
    return spec;
}

void LossSpec::validate(std::size_t depth) const {
    require(std::isfinite(margin) && margin >= 0.0, ErrorKind::InvalidConfig,
            "loss margin must be >= 0");
    require(std::isfinite(weight) && weight >= 0.0, ErrorKind::InvalidConfig,
            "loss weight must be >= 0");
    require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::InvalidConfig,
            "loss alpha must lie in [0, 1]");
    require(target_layer >= -1, ErrorKind::InvalidConfig, "loss target layer must be >= -1");
    if (depth > 0)
        require(target_layer < static_cast<int>(depth), ErrorKind::InvalidConfig,
                "loss target layer " + std::to_string(target_layer) +
                    " outside model depth " + std::to_string(depth));
}

std::size_t LossSpec::resolved_layer(std::size_t depth) const {
    if (target_layer >= 0) return static_cast<std::size_t>(target_layer);
    return depth >= 2 ? depth - 2 : 0;
}

namespace {

// Shared kernel for the pairwise hinged-KL losses.
//
// value = sum_{i != j} coef(i,j) * max(0, m - KL(p_i || p_j)) + m * sum_i coef(i,i)
//
// KL for all ordered pairs comes from one matrix product:
//   KL(i||j) = sum_t p_it log p_it - (P log(P)^T)_ij.
// The diagonal is exactly zero by definition and carries no gradient.
template <class Coef>
LossValueAndGrad pairwise_hinged_kl(const DenseMatrix& logits, double margin, Coef coef) {
    const std::size_t n = logits.rows();
    const std::size_t d = logits.cols();

    const DenseMatrix p = softmax_rows(logits);
    DenseMatrix logp(n, d);
    for (std::size_t i = 0; i < p.size(); ++i) logp.data()[i] = std::log(p.data()[i]);

    DenseVector neg_entropy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto pi = p.row(i);
        auto li = logp.row(i);
        for (std::size_t t = 0; t < d; ++t) neg_entropy[i] += pi[t] * li[t];
    }
    const DenseMatrix cross = matmul_nt(p, logp);

    double value = 0.0;
    DenseMatrix active(n, n);
    DenseVector active_rowsum(n, 0.0);
    bool any_active = false;
    for (std::size_t i = 0; i < n; ++i) {
        value += coef(i, i) * margin;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double c = coef(i, j);
            if (c == 0.0) continue;
            const double gap = margin - (neg_entropy[i] - cross(i, j));
            if (gap > 0.0) {
                value += c * gap;
                active(i, j) = c;
                active_rowsum[i] += c;
                any_active = true;
            }
        }
    }

    DenseMatrix grad(n, d);
    if (!any_active) return {value, std::move(grad)};

    // With G the active coefficient matrix and r its row sums, the gradient
    // w.r.t. the logits of row a is s_a - p_a * sum(s_a), where
    //   s_a = -r_a p_a (log p_a + 1) + p_a (G log P)_a + (G^T P)_a.
    const DenseMatrix g_logp = matmul(active, logp);
    const DenseMatrix gt_p = matmul_tn(active, p);
    for (std::size_t a = 0; a < n; ++a) {
        auto pa = p.row(a);
        auto la = logp.row(a);
        auto out = grad.row(a);
        double total = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            const double s = -active_rowsum[a] * pa[t] * (la[t] + 1.0) +
                             pa[t] * g_logp(a, t) + gt_p(a, t);
            out[t] = s;
            total += s;
        }
        for (std::size_t t = 0; t < d; ++t) out[t] -= pa[t] * total;
    }
    return {value, std::move(grad)};
}

void check_margin(double margin) {
    require(std::isfinite(margin) && margin >= 0.0, ErrorKind::InvalidInput,
            "margin must be >= 0");
}

}  // namespace

LossValueAndGrad loss_single(const DenseMatrix& w, double margin) {
    require(w.rows() >= 2, ErrorKind::InvalidInput, "loss_single needs at least two rows");
    check_margin(margin);
    return pairwise_hinged_kl(w, margin,
                              [](std::size_t i, std::size_t j) { return i == j ? 0.0 : 1.0; });
}

LossValueAndGrad loss_multi(const DenseMatrix& h, std::span<const int> labels, double margin) {
    require(h.rows() >= 1, ErrorKind::InvalidInput, "loss_multi on empty batch");
    require(labels.size() == h.rows(), ErrorKind::Shape, "loss_multi: label count mismatch");
    check_margin(margin);

    std::map<int, std::size_t> counts;
    for (int y : labels) ++counts[y];
    double pairs = 0.0;
    for (const auto& [label, c] : counts) pairs += static_cast<double>(c) * static_cast<double>(c);

    // Each unordered term f(i,j) + f(j,i) over ordered (i,j) counts every
    // directed KL twice.
    const double c = 2.0 / pairs;
    return pairwise_hinged_kl(h, margin, [&](std::size_t i, std::size_t j) {
        return labels[i] == labels[j] ? c : 0.0;
    });
}

LossValueAndGrad loss_multi_unlabeled(const DenseMatrix& h, double margin) {
    require(h.rows() >= 1, ErrorKind::InvalidInput, "loss_multi_unlabeled on empty batch");
    check_margin(margin);
    const double n = static_cast<double>(h.rows());
    const double c = 2.0 / (n * n);
    return pairwise_hinged_kl(h, margin, [c](std::size_t, std::size_t) { return c; });
}

LossValueAndGrad loss_decov(const DenseMatrix& h) {
    const std::size_t n = h.rows();
    require(n >= 2, ErrorKind::InvalidInput, "loss_decov needs at least two samples");
    const DenseMatrix hc = center_columns(h);
    DenseMatrix cov = matmul_tn(hc, hc);
    for (auto& v : cov.data()) v /= static_cast<double>(n);

    double value = 0.0;
    for (std::size_t a = 0; a < cov.rows(); ++a) {
        cov(a, a) = 0.0;
        for (std::size_t b = 0; b < cov.cols(); ++b) value += cov(a, b) * cov(a, b);
    }
    value *= 0.5;

    DenseMatrix grad = matmul(hc, cov);
    for (auto& v : grad.data()) v *= 2.0 / static_cast<double>(n);
    return {value, std::move(grad)};
}

XcovValueAndGrad loss_xcov(const DenseMatrix& h, const DenseMatrix& yhat) {
    const std::size_t n = h.rows();
    require(n >= 2, ErrorKind::InvalidInput, "loss_xcov needs at least two samples");
    require(yhat.rows() == n, ErrorKind::Shape, "loss_xcov: batch sizes differ");
    const DenseMatrix hc = center_columns(h);
    const DenseMatrix yc = center_columns(yhat);
    const double inv_n = 1.0 / static_cast<double>(n);

    DenseMatrix v = matmul_tn(yc, hc);  // c x d
    double value = 0.0;
    for (auto& x : v.data()) {
        x *= inv_n;
        value += x * x;
    }
    value *= 0.5;

    DenseMatrix grad_h = matmul(yc, v);        // n x d
    DenseMatrix grad_y = matmul_nt(hc, v);     // n x c
    for (auto& x : grad_h.data()) x *= inv_n;
    for (auto& x : grad_y.data()) x *= inv_n;
    return {value, std::move(grad_h), std::move(grad_y)};
}

LossValueAndGrad loss_bce(const DenseMatrix& yhat, std::span<const int> labels) {
    require(yhat.cols() == 1, ErrorKind::Shape, "loss_bce expects an n x 1 prediction matrix");
    require(yhat.rows() == labels.size(), ErrorKind::Shape, "loss_bce: label count mismatch");
    require(!labels.empty(), ErrorKind::InvalidInput, "loss_bce on empty batch");
    const double n = static_cast<double>(labels.size());
    constexpr double lo = 1e-12;
    constexpr double hi = 1.0 - 1e-12;

    double value = 0.0;
    DenseMatrix grad(yhat.rows(), 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] == 0 || labels[i] == 1, ErrorKind::InvalidInput,
                "loss_bce labels must be 0 or 1");
        const double p = std::clamp(yhat(i, 0), lo, hi);
        const double y = labels[i];
        value -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        grad(i, 0) = -(y / p - (1.0 - y) / (1.0 - p)) / n;
    }
    return {value / n, std::move(grad)};
}

AutoencoderValueAndGrad loss_autoencoder(const DenseMatrix& x, const DenseMatrix& xhat,
                                         const DenseMatrix& h, double margin, double alpha) {
    require(x.rows() == xhat.rows() && x.cols() == xhat.cols(), ErrorKind::Shape,
            "loss_autoencoder: reconstruction shape mismatch");
    require(x.rows() >= 1, ErrorKind::InvalidInput, "loss_autoencoder on empty batch");
    require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::InvalidInput, "alpha must lie in [0, 1]");
    const double n = static_cast<double>(x.rows());

    double recon = 0.0;
    DenseMatrix grad_xhat(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = xhat.data()[i] - x.data()[i];
        recon += diff * diff;
        grad_xhat.data()[i] = (1.0 - alpha) * 2.0 * diff / n;
    }
    recon /= n;

    auto aux = loss_multi_unlabeled(h, margin);
    for (auto& v : aux.grad.data()) v *= alpha;
    return {(1.0 - alpha) * recon + alpha * aux.value, std::move(grad_xhat),
            std::move(aux.grad)};
}

namespace reference {

double pairwise(LossKind kind, const DenseMatrix& input, std::span<const int> labels,
                double margin) {
    require(margin >= 0.0, ErrorKind::InvalidInput, "margin must be >= 0");
    const std::size_t n = input.rows();
    std::vector<ProbVector> dist;
    dist.reserve(n);
    for (std::size_t r = 0; r < n; ++r) dist.push_back(softmax(input.row(r)));

    auto f = [&](std::size_t i, std::size_t j) { return hinged_kl(dist[i], dist[j], margin); };

    switch (kind) {
        case LossKind::Single: {
            require(n >= 2, ErrorKind::InvalidInput, "loss_single needs at least two rows");
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) sum += f(i, j) + f(j, i);
            return sum;
        }
        case LossKind::Multi: {
            require(n >= 1, ErrorKind::InvalidInput, "loss_multi on empty batch");
            require(labels.size() == n, ErrorKind::Shape, "loss_multi: label count mismatch");
            double sum = 0.0;
            double same = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (labels[i] != labels[j]) continue;
                    sum += f(i, j) + f(j, i);
                    same += 1.0;
                }
            return sum / same;
        }
        case LossKind::Multi2: {
            require(n >= 1, ErrorKind::InvalidInput, "loss_multi_unlabeled on empty batch");
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) sum += f(i, j) + f(j, i);
            return sum / (static_cast<double>(n) * static_cast<double>(n));
        }
        default:
            fail(ErrorKind::InvalidInput, "reference::pairwise supports single, multi, multi2");
    }
}

}  // namespace reference

}  // namespace disent
