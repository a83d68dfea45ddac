// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dcsum {

// Malformed or missing input data (bad records, hash mismatches, absent files).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite losses or activations during training/inference.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

uint64_t splitmix64(uint64_t x);

// Folds a base seed with stream labels/indices so every random draw in the
// pipeline has its own independent, resumable stream.
uint64_t seed_chain(uint64_t base, std::initializer_list<uint64_t> parts);
uint64_t seed_chain(uint64_t base, std::string_view label, uint64_t a = 0,
                    uint64_t b = 0, uint64_t c = 0);

// Deterministic RNG for parameter init, shuffling, dropout and label sampling.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  uint64_t next_u64();
  // Uniform on [0, 1).
  double next_double();
  // Uniform on [0, n).
  uint64_t next_below(uint64_t n);
  bool next_bernoulli(double p);

 private:
  uint64_t state_;
};

uint64_t fnv1a(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a(std::string_view text, uint64_t seed = 0xcbf29ce484222325ull);
std::string to_hex(uint64_t value);

}  // namespace dcsum
