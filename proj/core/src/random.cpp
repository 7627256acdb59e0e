#include "ifv/random.hpp"

#include <cmath>

namespace ifv {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

std::uint64_t derive_seed(std::uint64_t master, StreamTag tag) {
  return derive_seed(master, static_cast<std::uint64_t>(tag));
}

double RandomStream::exponential(double rate) {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  return -std::log(1.0 - uniform()) / rate;
}

std::size_t RandomStream::categorical(std::span<const double> weights, double total) {
  double target = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    target -= weights[i];
    if (target < 0.0) return i;
  }
  // Rounding left target marginally >= 0: return the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return weights.size() - 1;
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  auto idx = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

}  // namespace ifv
