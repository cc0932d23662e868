#include "disent/metrics.hpp"

#include "disent/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace disent {

namespace {

// Dense ids for labels, assigned in ascending label order.
std::vector<std::size_t> encode(std::span<const int> labels, std::size_t& distinct) {
    std::vector<int> values(labels.begin(), labels.end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        out[i] = static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), labels[i]) -
                                          values.begin());
    distinct = values.size();
    return out;
}

double combine(double hu, double hv, Normalization norm) {
    switch (norm) {
        case Normalization::Max: return std::max(hu, hv);
        case Normalization::Arithmetic: return 0.5 * (hu + hv);
        case Normalization::Geometric: return std::sqrt(hu * hv);
        case Normalization::Min: return std::min(hu, hv);
    }
    return std::max(hu, hv);
}

}  // namespace

ContingencyTable contingency(std::span<const int> u, std::span<const int> v) {
    require(u.size() == v.size(), ErrorKind::Shape, "contingency: labelings differ in length");
    require(!u.empty(), ErrorKind::InvalidInput, "contingency: empty labelings");
    ContingencyTable t;
    const auto eu = encode(u, t.rows);
    const auto ev = encode(v, t.cols);
    t.counts.assign(t.rows * t.cols, 0);
    t.row_sums.assign(t.rows, 0);
    t.col_sums.assign(t.cols, 0);
    for (std::size_t s = 0; s < u.size(); ++s) {
        ++t.counts[eu[s] * t.cols + ev[s]];
        ++t.row_sums[eu[s]];
        ++t.col_sums[ev[s]];
    }
    t.total = static_cast<std::int64_t>(u.size());
    return t;
}

double entropy(std::span<const std::int64_t> counts, std::int64_t total) {
    require(total > 0, ErrorKind::InvalidInput, "entropy: total count is zero");
    const double n = static_cast<double>(total);
    double h = 0.0;
    for (auto c : counts) {
        require(c >= 0, ErrorKind::InvalidInput, "entropy: negative count");
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information(const ContingencyTable& t) {
    const double n = static_cast<double>(t.total);
    double mi = 0.0;
    for (std::size_t i = 0; i < t.rows; ++i)
        for (std::size_t j = 0; j < t.cols; ++j) {
            const auto nij = t(i, j);
            if (nij == 0) continue;
            const double v = static_cast<double>(nij);
            mi += (v / n) * std::log(n * v / (static_cast<double>(t.row_sums[i]) *
                                               static_cast<double>(t.col_sums[j])));
        }
    return std::max(mi, 0.0);
}

double expected_mutual_information(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                                   std::int64_t total) {
    if (a.size() <= 1 || b.size() <= 1) return 0.0;
    const double n = static_cast<double>(total);
    const double lg_n = std::lgamma(n + 1.0);
    double emi = 0.0;
    for (auto ai : a) {
        if (ai == 0) continue;
        const double da = static_cast<double>(ai);
        const double lg_a = std::lgamma(da + 1.0) + std::lgamma(n - da + 1.0);
        for (auto bj : b) {
            if (bj == 0) continue;
            const double db = static_cast<double>(bj);
            const double lg_ab = lg_a + std::lgamma(db + 1.0) + std::lgamma(n - db + 1.0) - lg_n;
            const std::int64_t lo = std::max<std::int64_t>(1, ai + bj - total);
            const std::int64_t hi = std::min(ai, bj);
            for (std::int64_t k = lo; k <= hi; ++k) {
                const double dk = static_cast<double>(k);
                const double log_p = lg_ab - std::lgamma(dk + 1.0) - std::lgamma(da - dk + 1.0) -
                                     std::lgamma(db - dk + 1.0) - std::lgamma(n - da - db + dk + 1.0);
                emi += (dk / n) * std::log(n * dk / (da * db)) * std::exp(log_p);
            }
        }
    }
    return emi;
}

double expected_mutual_information(const ContingencyTable& t) {
    return expected_mutual_information(t.row_sums, t.col_sums, t.total);
}

std::string_view to_string(Normalization n) noexcept {
    switch (n) {
        case Normalization::Max: return "max";
        case Normalization::Arithmetic: return "arithmetic";
        case Normalization::Geometric: return "geometric";
        case Normalization::Min: return "min";
    }
    return "max";
}

std::optional<Normalization> parse_normalization(std::string_view name) noexcept {
    for (auto n : {Normalization::Max, Normalization::Arithmetic, Normalization::Geometric,
                   Normalization::Min})
        if (to_string(n) == name) return n;
    return std::nullopt;
}

double ami(std::span<const int> u, std::span<const int> v, Normalization norm) {
    const auto t = contingency(u, v);
    // Two single-cluster labelings are the same partition.
    if (t.rows == 1 && t.cols == 1) return 1.0;
    // A single cluster against a real partition carries no information.
    if (t.rows == 1 || t.cols == 1) return 0.0;
    const double hu = entropy(t.row_sums, t.total);
    const double hv = entropy(t.col_sums, t.total);
    const double mi = mutual_information(t);
    const double emi = expected_mutual_information(t);
    const double denom = combine(hu, hv, norm) - emi;
    if (std::abs(denom) < 1e-15) {
        const bool identical = t.rows == t.cols && [&] {
            for (std::size_t i = 0; i < t.rows; ++i) {
                std::size_t nonzero = 0;
                for (std::size_t j = 0; j < t.cols; ++j) nonzero += t(i, j) != 0;
                if (nonzero != 1) return false;
            }
            return true;
        }();
        return identical ? 1.0 : 0.0;
    }
    return std::min(1.0, (mi - emi) / denom);
}

double nmi(std::span<const int> u, std::span<const int> v, Normalization norm) {
    const auto t = contingency(u, v);
    if (t.rows == 1 && t.cols == 1) return 1.0;
    if (t.rows == 1 || t.cols == 1) return 0.0;
    const double hu = entropy(t.row_sums, t.total);
    const double hv = entropy(t.col_sums, t.total);
    const double denom = combine(hu, hv, norm);
    if (denom <= 0.0) return 0.0;
    return std::clamp(mutual_information(t) / denom, 0.0, 1.0);
}

ClusterScores score(std::span<const int> truth, std::span<const int> predicted,
                    Normalization ami_norm, Normalization nmi_norm) {
    return {ami(truth, predicted, ami_norm), nmi(truth, predicted, nmi_norm)};
}

ActivationHistogram activation_histogram(const DenseMatrix& h, std::span<const int> fine_labels) {
    require(h.rows() >= 1, ErrorKind::InvalidInput, "activation_histogram: no samples");
    require(h.rows() == fine_labels.size(), ErrorKind::Shape,
            "activation_histogram: label count mismatch");
    int max_label = 0;
    for (int c : fine_labels) {
        require(c >= 0, ErrorKind::InvalidInput, "activation_histogram: negative class label");
        max_label = std::max(max_label, c);
    }
    ActivationHistogram hist;
    hist.classes = static_cast<std::size_t>(max_label) + 1;
    hist.neurons = h.cols();
    hist.counts.assign(hist.classes * hist.neurons, 0);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        auto row = h.row(i);
        const auto arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        ++hist.counts[static_cast<std::size_t>(fine_labels[i]) * hist.neurons + arg];
    }
    return hist;
}

std::size_t count_spread_neurons(const DenseMatrix& h, double fraction) {
    if (h.rows() == 0) return 0;
    std::vector<std::size_t> hits(h.cols(), 0);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        auto row = h.row(i);
        ++hits[static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin())];
    }
    const double threshold = fraction * static_cast<double>(h.rows());
    return static_cast<std::size_t>(
        std::count_if(hits.begin(), hits.end(), [&](std::size_t c) { return static_cast<double>(c) >= threshold; }));
}

}  // namespace disent
