#include "spme/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spme/errors.hpp"

namespace spme {

ProportionEstimate wilson_interval(double mean, std::size_t n, double z) {
    ProportionEstimate out;
    out.n = n;
    if (n == 0) {
        out.ci_high = 1.0;
        return out;
    }
    const double p = std::clamp(mean, 0.0, 1.0);
    const double nn = static_cast<double>(n);
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    out.estimate = p;
    out.ci_low = std::max(0.0, std::min(p, centre - half));
    out.ci_high = std::min(1.0, std::max(p, centre + half));
    // At p == 0 or p == 1 one endpoint is exact.
    if (p == 0.0) out.ci_low = 0.0;
    if (p == 1.0) out.ci_high = 1.0;
    return out;
}

ProportionEstimate wilson_from_counts(std::size_t successes, std::size_t n, double z) {
    if (successes > n) throw ConfigError("more successes than trials");
    const double mean = n == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(n);
    return wilson_interval(mean, n, z);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t mid = values.size() / 2;
    return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

MeanEstimate mean_with_error(std::span<const double> samples) {
    MeanEstimate out;
    out.n = samples.size();
    if (samples.empty()) return out;
    const double nn = static_cast<double>(samples.size());
    out.mean = pairwise_sum(samples) / nn;
    if (samples.size() > 1) {
        std::vector<double> sq(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double d = samples[i] - out.mean;
            sq[i] = d * d;
        }
        out.std_error = std::sqrt(pairwise_sum(sq) / (nn - 1.0) / nn);
    }
    return out;
}

MeanEstimate batch_means(std::span<const double> series, std::size_t n_batches) {
    if (n_batches < 2) throw ConfigError("batch means needs at least two batches");
    const std::size_t batch_len = series.size() / n_batches;
    if (batch_len == 0) throw ConfigError("series shorter than the number of batches");
    std::vector<double> averages(n_batches);
    for (std::size_t b = 0; b < n_batches; ++b) {
        averages[b] = pairwise_sum(series.subspan(b * batch_len, batch_len)) / static_cast<double>(batch_len);
    }
    return mean_with_error(averages);
}

}  // namespace spme
