#include "spectrwm/rng.hpp"
#include "spectrwm/errors.hpp"

#include <algorithm>
#include <sstream>

namespace spectrwm {

StiffnessError::StiffnessError(std::size_t mode, double exponent, double cap)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "jump-rate exponent " << exponent << " on mode " << mode
             << " exceeds cap " << cap;
          return os.str();
      }()),
      mode_(mode),
      exponent_(exponent) {}

BudgetError::BudgetError(std::uint64_t steps, double time_reached, double horizon)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "step budget of " << steps << " events exhausted at t=" << time_reached
             << " before horizon T=" << horizon;
          return os.str();
      }()),
      steps_(steps),
      time_reached_(time_reached),
      horizon_(horizon) {}

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream_id) {
    return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(stream_id),
                         static_cast<std::uint32_t>(stream_id >> 32), 0x5eC7u};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    auto seq = make_seed_seq(seed, stream_id);
    engine_.seed(seq);
}

double RngStream::uniform() {
    constexpr double kUlp = 0x1.0p-53;
    const double u = static_cast<double>(engine_() >> 11) * kUlp;
    return std::clamp(u, kUlp, 1.0 - kUlp);
}

double RngStream::normal() { return gaussian_(engine_); }

}  // namespace spectrwm
