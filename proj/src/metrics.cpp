#include "keymix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace keymix::metrics {

double smape(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size())
        throw std::invalid_argument("smape: length mismatch (" + std::to_string(predicted.size()) +
                                    " vs " + std::to_string(actual.size()) + ")");
    if (predicted.empty()) throw std::invalid_argument("smape: empty input");

    double total = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double p = predicted[i];
        const double a = actual[i];
        const double denom = std::abs(p) + std::abs(a);
        if (denom == 0.0) continue;
        if (std::isinf(denom)) {
            // Exactly one side unbounded: the ratio tends to 1.
            total += std::isinf(p) && std::isinf(a) ? 0.0 : 1.0;
            continue;
        }
        total += std::abs(p - a) / denom;
    }
    return total / static_cast<double>(predicted.size());
}

double mean_lag(std::span<const double> lags) {
    if (lags.empty()) throw std::invalid_argument("mean_lag: empty input");
    return std::accumulate(lags.begin(), lags.end(), 0.0) / static_cast<double>(lags.size());
}

std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<std::size_t> bin(n);
    std::size_t rank = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || values[order[i]] != values[order[i - 1]]) rank = i;
        bin[order[i]] = rank * bins / n;
    }
    return bin;
}

double entropy_bits(std::span<const double> counts) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

double mutual_information_counts(std::span<const double> joint, std::size_t rows,
                                 std::size_t cols) {
    if (joint.size() != rows * cols)
        throw std::invalid_argument("mutual_information: table size does not match shape");
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = joint[r * cols + c];
            if (v < 0.0) throw std::invalid_argument("mutual_information: negative count");
            row_sum[r] += v;
            col_sum[c] += v;
            total += v;
        }
    }
    if (total <= 0.0) throw std::invalid_argument("mutual_information: empty table");

    double mi = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = joint[r * cols + c];
            if (v > 0.0) mi += (v / total) * std::log2(v * total / (row_sum[r] * col_sum[c]));
        }
    }
    return std::max(mi, 0.0);
}

double mutual_information(std::span<const double> xs, std::span<const double> ys,
                          std::size_t bins) {
    if (xs.size() != ys.size()) throw std::invalid_argument("mutual_information: length mismatch");
    if (bins < 2) throw std::invalid_argument("mutual_information: bins must be >= 2");
    if (xs.size() < bins * bins)
        throw std::invalid_argument("mutual_information: need at least " +
                                    std::to_string(bins * bins) + " samples for " +
                                    std::to_string(bins) + " bins, got " +
                                    std::to_string(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw std::invalid_argument("mutual_information: non-finite sample");

    const auto bx = quantile_bins(xs, bins);
    const auto by = quantile_bins(ys, bins);
    std::vector<double> joint(bins * bins, 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) joint[bx[i] * bins + by[i]] += 1.0;
    return mutual_information_counts(joint, bins, bins);
}

double anonymity_rate(const std::vector<std::vector<double>>& posteriors) {
    if (posteriors.empty()) throw std::invalid_argument("anonymity_rate: empty sequence");
    const std::size_t users = posteriors.front().size();
    if (users == 0) throw std::invalid_argument("anonymity_rate: posterior over zero users");

    double total = 0.0;
    for (std::size_t n = 0; n < posteriors.size(); ++n) {
        const auto& p = posteriors[n];
        if (p.size() != users)
            throw std::invalid_argument("anonymity_rate: posterior " + std::to_string(n) +
                                        " has a different number of users");
        double sum = 0.0;
        for (double v : p) {
            if (!(v >= 0.0)) throw std::invalid_argument("anonymity_rate: negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("anonymity_rate: posterior " + std::to_string(n) +
                                        " does not sum to 1");
        total += entropy_bits(p);
    }
    return total / static_cast<double>(posteriors.size());
}

}  // namespace keymix::metrics
