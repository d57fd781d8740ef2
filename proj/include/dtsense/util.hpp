// Copyright 2026 The dtsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DTSENSE_UTIL_HPP_
#define DTSENSE_UTIL_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace dtsense::util {

// 64-bit FNV-1a. Used for config hashes and seed derivation tags.
std::uint64_t fnv1a64(std::string_view s);

// splitmix64 finalizer; decorrelates derived seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic seed for a named sub-computation of a run.
// All stage/run seeds are derived this way from the single global seed.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view tag) {
  return splitmix64(global_seed ^ fnv1a64(tag));
}

// Uniform draw in [0, n). Uses the raw mt19937_64 stream with rejection so the
// result is identical on every platform (std::uniform_int_distribution is not
// portable across standard library implementations).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n);

// Portable Fisher-Yates shuffle (std::shuffle is not reproducible either).
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Shortest decimal that round-trips the double (printf %.17g trimmed by
// precision search). Stage files must be byte-stable across reruns.
std::string format_double(double x);

// Fixed-point with n digits, for human-facing report columns.
std::string format_fixed(double x, int digits);

// Parses a non-negative integer; returns false on any stray character.
bool parse_u64(std::string_view s, std::uint64_t* out);
bool parse_double(std::string_view s, double* out);

}  // namespace dtsense::util

#endif  // DTSENSE_UTIL_HPP_
