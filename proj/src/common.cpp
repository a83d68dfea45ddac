// SPDX-License-Identifier: Apache-2.0
#include "dcsum/common.hpp"

#include <cstdio>

namespace dcsum {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t seed_chain(uint64_t base, std::initializer_list<uint64_t> parts) {
  uint64_t s = splitmix64(base);
  for (uint64_t p : parts) s = splitmix64(s ^ p);
  return s;
}

uint64_t seed_chain(uint64_t base, std::string_view label, uint64_t a,
                    uint64_t b, uint64_t c) {
  return seed_chain(base, {fnv1a(label), a, b, c});
}

uint64_t Rng::next_u64() {
  state_ = splitmix64(state_);
  return state_;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::next_below(uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  if (n == 0) return 0;
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

bool Rng::next_bernoulli(double p) { return next_double() < p; }

uint64_t fnv1a(const void* data, size_t len, uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a(std::string_view text, uint64_t seed) {
  return fnv1a(text.data(), text.size(), seed);
}

std::string to_hex(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

}  // namespace dcsum
