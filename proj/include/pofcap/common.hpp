// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pofcap {

// Bad user input: missing/invalid config files, unusable CLI arguments.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed data files (tensor containers, sequence directories).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid inputs that do not fit together (joint set mismatch etc).
struct MismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failures inside the solver.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a over raw bytes. Stable across platforms; used for config hashes and
// artifact determinism checks.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v);
std::uint64_t hash_file(const std::string& path);

}  // namespace pofcap
