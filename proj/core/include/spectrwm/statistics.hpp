#pragma once

// Streaming moment accumulators shared by the replica estimators and the MCMC
// baseline.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace spectrwm {

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Welford mean and sum of squared deviations per component; merging uses the
/// pairwise (Chan et al.) update.
class MomentAccumulator {
public:
    MomentAccumulator() = default;
    explicit MomentAccumulator(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

    std::size_t dim() const noexcept { return mean_.size(); }
    std::size_t count() const noexcept { return count_; }

    void add(std::span<const double> x);
    void add(double x) { add(std::span<const double>(&x, 1)); }
    void merge(const MomentAccumulator& other);

    double mean(std::size_t i = 0) const { return mean_[i]; }
    double m2(std::size_t i = 0) const { return m2_[i]; }
    /// Sample variance m2 / (count - 1); zero for fewer than two samples.
    double variance(std::size_t i = 0) const;
    /// sqrt(variance / count).
    double std_error(std::size_t i = 0) const;
    Estimate estimate(std::size_t i = 0) const { return {mean(i), std_error(i)}; }
    std::vector<Estimate> estimates() const;

private:
    std::size_t count_ = 0;
    std::vector<double> mean_;
    std::vector<double> m2_;
};

/// Standard error of a correlated stream from the spread of non-overlapping
/// batch means. Samples past the last full batch count toward the mean only.
class BatchMeans {
public:
    BatchMeans(std::size_t dim, std::size_t batch_size);

    std::size_t dim() const noexcept { return batch_sum_.size(); }
    void add(std::span<const double> x);

    std::size_t samples() const noexcept { return samples_; }
    std::size_t batches() const noexcept { return batches_.count(); }
    double mean(std::size_t i = 0) const;
    double std_error(std::size_t i = 0) const;
    Estimate estimate(std::size_t i = 0) const { return {mean(i), std_error(i)}; }

private:
    std::size_t batch_size_;
    std::size_t in_batch_ = 0;
    std::size_t samples_ = 0;
    std::vector<double> batch_sum_;
    std::vector<double> total_;
    MomentAccumulator batches_;
};

/// Batch means for time averages of a piecewise-constant path: the time axis
/// is cut into batches of equal length and each segment is split across them.
class TimeBatchMeans {
public:
    TimeBatchMeans(std::size_t dim, double batch_length);

    std::size_t dim() const noexcept { return batch_integral_.size(); }
    /// Adds value * duration; `value` holds on the whole segment.
    void add(std::span<const double> value, double duration);

    double elapsed() const noexcept { return elapsed_; }
    std::size_t batches() const noexcept { return batches_.count(); }
    double mean(std::size_t i = 0) const;
    double std_error(std::size_t i = 0) const;
    Estimate estimate(std::size_t i = 0) const { return {mean(i), std_error(i)}; }

private:
    void close_batch();

    double batch_length_;
    double in_batch_ = 0.0;
    double elapsed_ = 0.0;
    std::vector<double> batch_integral_;
    std::vector<double> total_;
    std::vector<double> scratch_;
    MomentAccumulator batches_;
};

}  // namespace spectrwm
