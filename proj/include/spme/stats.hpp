#pragma once

#include <cstddef>
#include <span>

namespace spme {

/// Binomial-style estimate with a Wilson score interval.
struct ProportionEstimate {
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
};

/// Wilson score interval for `mean` estimated from n samples in [0, 1].
/// For Bernoulli data mean = successes / n. For averages of [0, 1]-valued
/// variables the interval remains conservative, since their variance is at
/// most mean * (1 - mean).
ProportionEstimate wilson_interval(double mean, std::size_t n, double z = 1.959963984540054);
ProportionEstimate wilson_from_counts(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Sample mean and standard error of independent observations.
MeanEstimate mean_with_error(std::span<const double> samples);

/// Batch-means estimate for a correlated series: the series is split into
/// n_batches contiguous batches (trailing remainder dropped) and the standard
/// error is taken across batch averages.
MeanEstimate batch_means(std::span<const double> series, std::size_t n_batches);

/// Left-to-right pairwise summation; fixed association order.
double pairwise_sum(std::span<const double> values);

}  // namespace spme
