// Copyright 2026 The prunelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace prunelab {

// Seeded RNG used by every generator in the toolkit. All sampling goes
// through this wrapper so that a (seed, parameters) pair fully determines
// the output stream.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Inclusive on both ends.
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(gen_);
    }

    std::uint64_t next_u64() { return gen_(); }

    double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        std::shuffle(v.begin(), v.end(), gen_);
    }

    std::mt19937_64& engine() { return gen_; }

  private:
    std::mt19937_64 gen_;
};

// FNV-1a over bytes; stable across platforms.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Stable per-role seed derivation, so independent components never share
// an RNG stream even when the master seed is reused.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view role) {
    std::uint64_t h = fnv1a64(role);
    // splitmix64 finalizer over (master ^ role hash)
    std::uint64_t z = master ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace prunelab
