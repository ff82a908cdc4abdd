#pragma once

#include <cstdint>
#include <random>

namespace fdamimo {

// Counter-based stream derivation: every (seed, index) pair maps to an
// independent, reproducible generator, so pulses and trials can be produced
// in any order or in parallel.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t index) : engine_(stream_seed(seed, index)) {}

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fdamimo
