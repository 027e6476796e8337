#pragma once

#include <cstdint>
#include <random>

namespace ecofence {

// Purpose-specific sub-streams derived from one run seed. Spawn randomness and
// coin tosses never share a stream, so a baseline run (no tosses) sees the
// same spawn draws as a controlled run.
enum class StreamPurpose : std::uint64_t { Spawn = 1, CoinToss = 2, Workload = 3 };

// Seeded uniform stream on [0, 1). mt19937_64's output sequence is fixed by the
// standard and the conversion below is done by hand, so draws are identical
// across standard libraries.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, StreamPurpose purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose)};
    engine_.seed(seq);
  }

  double next() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi].
  int next_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next() * static_cast<double>(span));
  }

  std::uint64_t draws() const noexcept { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace ecofence
