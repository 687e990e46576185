#pragma once

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <vector>

namespace spoofbench {

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// splitmix64 finalizer; also used to derive child stream seeds.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic splittable generator. Every randomized stage of the pipeline
// owns a stream derived from (parent seed, label), so adding or reordering
// stages never perturbs the draws of the others.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // [0, n); n must be > 0.
  std::uint64_t bounded(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // uniform in [-1, 1)
  double next_signed() { return next_double() * 2.0 - 1.0; }

  Rng split(std::uint64_t salt) const {
    return Rng(mix64(state_ ^ mix64(salt + 0x633d5d90f9e4a2b1ull)));
  }
  Rng split(std::string_view label) const { return split(fnv1a64(label)); }
  Rng split(std::string_view label, std::uint64_t salt) const {
    return split(label).split(salt);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

  std::vector<std::uint8_t> bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; i += 8) {
      std::uint64_t w = next_u64();
      for (std::size_t j = 0; j < 8 && i + j < n; ++j)
        out[i + j] = static_cast<std::uint8_t>(w >> (8 * j));
    }
    return out;
  }

private:
  std::uint64_t state_;
};

}  // namespace spoofbench
