#pragma once

#include <cstdint>
#include <random>

namespace spectrwm {

/// Reproducible random stream keyed by (seed, stream_id).
///
/// Replica r of an experiment uses stream_id = r under the experiment's master
/// seed, so results do not depend on how replicas are spread over workers.
class RngStream {
public:
    using result_type = std::mt19937_64::result_type;

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Uniform on [2^-53, 1 - 2^-53]; never exactly 0 or 1.
    double uniform();

    /// Standard normal variate.
    double normal();

    result_type operator()() { return engine_(); }
    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> gaussian_{0.0, 1.0};
};

}  // namespace spectrwm
