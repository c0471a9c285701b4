#include "spectrwm/statistics.hpp"

#include <algorithm>
#include <stdexcept>

namespace spectrwm {

void MomentAccumulator::add(std::span<const double> x) {
    if (x.size() != mean_.size()) throw std::invalid_argument("accumulator dimension mismatch");
    ++count_;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double delta = x[i] - mean_[i];
        mean_[i] += delta * inv;
        m2_[i] += delta * (x[i] - mean_[i]);
    }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.dim() != dim()) throw std::invalid_argument("accumulator dimension mismatch");
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    for (std::size_t i = 0; i < dim(); ++i) {
        const double delta = other.mean_[i] - mean_[i];
        mean_[i] = (na * mean_[i] + nb * other.mean_[i]) / n;
        m2_[i] += other.m2_[i] + delta * delta * na * nb / n;
    }
    count_ += other.count_;
}

double MomentAccumulator::variance(std::size_t i) const {
    if (count_ < 2) return 0.0;
    return std::max(0.0, m2_[i]) / static_cast<double>(count_ - 1);
}

double MomentAccumulator::std_error(std::size_t i) const {
    if (count_ < 2) return 0.0;
    return std::sqrt(variance(i) / static_cast<double>(count_));
}

std::vector<Estimate> MomentAccumulator::estimates() const {
    std::vector<Estimate> out(dim());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = estimate(i);
    return out;
}

BatchMeans::BatchMeans(std::size_t dim, std::size_t batch_size)
    : batch_size_(batch_size), batch_sum_(dim, 0.0), total_(dim, 0.0), batches_(dim) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
}

void BatchMeans::add(std::span<const double> x) {
    if (x.size() != dim()) throw std::invalid_argument("batch means dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        batch_sum_[i] += x[i];
        total_[i] += x[i];
    }
    ++samples_;
    if (++in_batch_ == batch_size_) {
        const double inv = 1.0 / static_cast<double>(batch_size_);
        for (double& s : batch_sum_) s *= inv;
        batches_.add(batch_sum_);
        std::fill(batch_sum_.begin(), batch_sum_.end(), 0.0);
        in_batch_ = 0;
    }
}

double BatchMeans::mean(std::size_t i) const {
    return samples_ == 0 ? 0.0 : total_[i] / static_cast<double>(samples_);
}

double BatchMeans::std_error(std::size_t i) const { return batches_.std_error(i); }

TimeBatchMeans::TimeBatchMeans(std::size_t dim, double batch_length)
    : batch_length_(batch_length),
      batch_integral_(dim, 0.0),
      total_(dim, 0.0),
      scratch_(dim, 0.0),
      batches_(dim) {
    if (!(batch_length > 0.0)) throw std::invalid_argument("batch length must be positive");
}

void TimeBatchMeans::close_batch() {
    const double inv = 1.0 / batch_length_;
    for (std::size_t i = 0; i < dim(); ++i) scratch_[i] = batch_integral_[i] * inv;
    batches_.add(scratch_);
    std::fill(batch_integral_.begin(), batch_integral_.end(), 0.0);
    in_batch_ = 0.0;
}

void TimeBatchMeans::add(std::span<const double> value, double duration) {
    if (value.size() != dim()) throw std::invalid_argument("batch means dimension mismatch");
    if (!(duration >= 0.0)) throw std::invalid_argument("duration must be non-negative");
    for (std::size_t i = 0; i < dim(); ++i) total_[i] += value[i] * duration;
    elapsed_ += duration;
    // Batch edges are matched to a relative 1e-9 so that summing many short
    // segments does not leave the last batch a rounding error short.
    const double slack = 1e-9 * batch_length_;
    double left = duration;
    while (left > 0.0) {
        const double room = std::max(0.0, batch_length_ - in_batch_);
        const bool closes = left >= room - slack;
        const double take = closes ? std::min(left, room) : left;
        for (std::size_t i = 0; i < dim(); ++i) batch_integral_[i] += value[i] * take;
        in_batch_ += take;
        left -= closes ? room : take;
        if (closes) close_batch();
    }
}

double TimeBatchMeans::mean(std::size_t i) const {
    return elapsed_ > 0.0 ? total_[i] / elapsed_ : 0.0;
}

double TimeBatchMeans::std_error(std::size_t i) const { return batches_.std_error(i); }

}  // namespace spectrwm
