#ifndef FLOWPLAN_RNG_HPP
#define FLOWPLAN_RNG_HPP

#include <cmath>
#include <cstdint>

namespace flowplan {

// Counter-based generator: draw i of stream (seed, stream) is a pure hash of
// (key, i). Streams can be split per worker and replayed in any order, so
// parallel sweeps reproduce serial results bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ 0x9e3779b97f4a7c15ull, stream)) {}

  std::uint64_t next_u64() { return mix(key_, counter_++); }

  // [0, 1), 53-bit resolution
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // (0, 1], safe as a log argument
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; consumes exactly two draws per call
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // integer in [0, n), n > 0; modulo bias is irrelevant for n << 2^64
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // independent child stream; children with distinct tags never collide
  Rng derive(std::uint64_t tag) const { return Rng(key_, ~tag); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static Rng restore(std::uint64_t key, std::uint64_t counter) {
    Rng r(0);
    r.key_ = key;
    r.counter_ = counter;
    return r;
  }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace flowplan

#endif  // FLOWPLAN_RNG_HPP
