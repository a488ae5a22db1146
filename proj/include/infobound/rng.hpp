#pragma once

#include <cstdint>

namespace infobound::rng {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Counter-based stream: a pure function of (seed, stream, index), so draws do
/// not depend on evaluation order or thread layout.
///   h = mix64(seed + γ)
///   h = mix64(h + (stream + 1)·γ)
///   out = mix64(h ^ ((index + 1)·κ))
/// with γ = 0x9E3779B97F4A7C15 and κ = 0xC2B2AE3D27D4EB4F.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

/// Uniform double in [0, 1) from the top 53 bits of counter_hash.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

}  // namespace infobound::rng
