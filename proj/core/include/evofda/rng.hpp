#pragma once

#include <cmath>
#include <cstdint>

/// Small deterministic random-number helpers shared by clustering restarts and
/// the synthetic-corpus generator.  Everything here is specified exactly (no
/// implementation-defined standard-library distributions), so a given seed
/// produces the same stream on every standard-conforming platform.

namespace evofda {

/// SplitMix64 step: advances `state` and returns the next 64-bit output.
/// Used both as a tiny generator and as a seed mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a9c82ba57c53ULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and a stream index,
/// so per-restart / per-project generators never overlap trivially.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + stream * 0x3c6ef372fe94f82bULL);
    std::uint64_t out = splitmix64(s);
    out ^= splitmix64(s);
    return out;
}

/// Deterministic uniform draw in [0, n) without modulo bias (rejection on the
/// top slice of the 64-bit range).  `Engine` is anything with operator()()
/// returning uint64_t, e.g. std::mt19937_64, whose output sequence the
/// standard pins down exactly.
template <class Engine>
std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw;
    do {
        draw = eng();
    } while (draw >= limit);
    return draw % n;
}

/// Uniform double in (0, 1]; 53-bit resolution.  The closed upper end makes
/// log(u) safe below.
template <class Engine>
double uniform_unit(Engine& eng) {
    return static_cast<double>((eng() >> 11) + 1) * (1.0 / 9007199254740992.0);
}

/// Standard normal via Box-Muller.  Consumes two engine outputs per call and
/// keeps no spare, so call sites stay reproducible regardless of interleaving.
template <class Engine>
double normal_draw(Engine& eng) {
    const double u1 = uniform_unit(eng);
    const double u2 = uniform_unit(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace evofda
