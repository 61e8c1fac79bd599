#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gaze2afc {

namespace detail {

/// splitmix64 finalizer; used to decorrelate derived stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Deterministic random stream.
///
/// The engine is std::mt19937_64 (its sequence is pinned by the standard) and
/// all transforms to uniforms/normals are implemented here rather than via
/// std::*_distribution, whose output is implementation-defined. Two runs with
/// the same seed therefore produce bit-identical streams on any conforming
/// standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(detail::mix64(seed)) {}

    /// Independent substream; pure function of (seed, stream).
    Rng derive(std::uint64_t stream) const {
        return Rng(detail::mix64(seed_ ^ detail::mix64(stream + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1); safe as a log argument.
    double uniform_pos() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [lo, hi], inclusive, via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t reject_above = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= reject_above);
        return lo + static_cast<std::int64_t>(v % range);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via the polar method; pairs are cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * m;
        have_cached_ = true;
        return u * m;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace gaze2afc
