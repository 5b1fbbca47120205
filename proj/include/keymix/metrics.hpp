#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace keymix::metrics {

/// Symmetric mean absolute percentage error, mean of |p - a| / (|p| + |a|).
/// Lies in [0, 1]. A (0, 0) pair is an exact prediction and contributes 0.
/// Throws std::invalid_argument on empty or mismatched input.
double smape(std::span<const double> predicted, std::span<const double> actual);

/// Arithmetic mean of per-event lags. Throws on empty input.
double mean_lag(std::span<const double> lags);

/// Equal-frequency bin index per value. Bins are assigned by rank, and tied
/// values share the bin of their lowest rank, so any strictly increasing
/// transform of the input yields the same assignment.
std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins);

/// Shannon entropy in bits of a discrete distribution given as counts.
double entropy_bits(std::span<const double> counts);

/// Plug-in mutual information in bits of a joint count table (row-major,
/// rows x cols).
double mutual_information_counts(std::span<const double> joint, std::size_t rows,
                                  std::size_t cols);

/// Mutual information in bits between paired samples, estimated by binning
/// each marginal into `bins` equal-frequency bins and evaluating the plug-in
/// estimator on the joint histogram.
///
/// Requires equal lengths, bins >= 2 and at least bins^2 samples.
double mutual_information(std::span<const double> xs, std::span<const double> ys,
                          std::size_t bins = 8);

/// Per-event anonymity rate in bits: the mean entropy of the per-event
/// identity posteriors. Events are treated as independent, which makes this an
/// upper bound on the joint-entropy rate. Each posterior must have the same
/// number of users, be non-negative, and sum to 1 within 1e-9.
double anonymity_rate(const std::vector<std::vector<double>>& posteriors);

}  // namespace keymix::metrics
