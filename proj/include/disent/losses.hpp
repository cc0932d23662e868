#pragma once

#include "disent/numerics.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace disent {

enum class LossKind { None, Single, Multi, Multi2, Decov, Xcov };

std::string_view to_string(LossKind kind) noexcept;
std::optional<LossKind> parse_loss_kind(std::string_view name) noexcept;

inline constexpr double kDefaultSingleMargin = 5.0;
inline constexpr double kDefaultMultiMargin = 0.5;

double default_margin(LossKind kind) noexcept;

// Which auxiliary term is active and how it is applied.
struct LossSpec {
    LossKind kind = LossKind::None;
    double margin = 0.0;
    double weight = 1.0;     // lambda: total = task + weight * auxiliary
    int target_layer = -1;   // -1 resolves to the penultimate layer
    double alpha = 0.5;      // autoencoder mixing only

    static LossSpec with_defaults(LossKind kind);

    // Throws InvalidConfig on violated invariants. `depth` is the number of
    // layers of the model the spec is applied to (0 skips the layer check).
    void validate(std::size_t depth = 0) const;
    std::size_t resolved_layer(std::size_t depth) const;
};

struct LossValueAndGrad {
    double value = 0.0;
    DenseMatrix grad;
};

struct XcovValueAndGrad {
    double value = 0.0;
    DenseMatrix grad_h;
    DenseMatrix grad_yhat;
};

struct AutoencoderValueAndGrad {
    double value = 0.0;
    DenseMatrix grad_xhat;
    DenseMatrix grad_h;
};

// Pairwise hinged-KL penalty over the softmax-normalized rows of a weight
// matrix: sum over i<j of f(d_i, d_j) + f(d_j, d_i). Gradient w.r.t. W.
LossValueAndGrad loss_single(const DenseMatrix& w, double margin);

// Same-label pairwise hinged-KL penalty over softmax-normalized activations,
// normalized by the number of ordered same-label pairs (diagonal included).
LossValueAndGrad loss_multi(const DenseMatrix& h, std::span<const int> labels, double margin);

// Label-free variant: every ordered pair, normalized by n^2.
LossValueAndGrad loss_multi_unlabeled(const DenseMatrix& h, double margin);

// Off-diagonal covariance penalty 0.5 * (||C||_F^2 - ||diag C||^2).
LossValueAndGrad loss_decov(const DenseMatrix& h);

// 0.5 * ||cross-cov(yhat, h)||_F^2 with gradients for both inputs.
XcovValueAndGrad loss_xcov(const DenseMatrix& h, const DenseMatrix& yhat);

// Mean binary cross-entropy; predictions clamped to [1e-12, 1 - 1e-12].
// Gradient is w.r.t. yhat.
LossValueAndGrad loss_bce(const DenseMatrix& yhat, std::span<const int> labels);

// (1 - alpha) * mean squared reconstruction error + alpha * loss_multi_unlabeled(h).
AutoencoderValueAndGrad loss_autoencoder(const DenseMatrix& x, const DenseMatrix& xhat,
                                         const DenseMatrix& h, double margin, double alpha);

// Literal nested-loop evaluation of the pairwise losses. Test oracle only:
// no matrix products, no shared code with the production path beyond
// softmax/kl_divergence.
namespace reference {

double pairwise(LossKind kind, const DenseMatrix& input, std::span<const int> labels,
                double margin);

}  // namespace reference

}  // namespace disent
