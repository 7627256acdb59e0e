#pragma once

// Reproducible random streams.
//
// One 64-bit master seed fans out into independent streams addressed by a
// counter: stream k is seeded with
//
//   derive_seed(master, k) = splitmix64(splitmix64(master) + 0x9E3779B97F4A7C15 * (k + 1))
//
// and drives a std::mt19937_64, whose output sequence is fixed by the
// standard. Uniforms and exponentials are built from raw engine output here
// rather than through <random> distributions, whose algorithms are
// implementation-defined, so draws are identical across platforms.

#include <cstdint>
#include <random>
#include <span>

namespace ifv {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Purpose tags so forward/dual/diagnostic runs sharing a master seed never
// share a stream.
enum class StreamTag : std::uint64_t {
  forward = 0x464f5257ULL,
  dual = 0x4455414cULL,
  diagnostic = 0x44494147ULL,
};

std::uint64_t derive_seed(std::uint64_t master, StreamTag tag);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::uint64_t stream) : engine_(derive_seed(master, stream)) {}

  std::uint64_t next() { return engine_(); }
  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double rate);
  // Index drawn with probability weights[i] / total; total must be the sum.
  std::size_t categorical(std::span<const double> weights, double total);
  std::size_t uniform_index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ifv
