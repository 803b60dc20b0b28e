#pragma once

#include <cstdint>

namespace covop::seeds {

// Domain tags for stream derivation. Every random stream is an xoshiro256**
// generator seeded by a splitmix64 chain over (master seed, tag, indices...),
// so any single work item can be regenerated in isolation and schedules
// never change outputs. Tags are ASCII mnemonics.

inline constexpr std::uint64_t kScores = 0x73636f7265ULL;      // "score"
inline constexpr std::uint64_t kWeights = 0x776569676874ULL;   // "weight"
inline constexpr std::uint64_t kGaussNorm = 0x676e6f726dULL;   // "gnorm"
inline constexpr std::uint64_t kReference = 0x726566ULL;       // "ref"
inline constexpr std::uint64_t kDataset = 0x64617461ULL;       // "data"
inline constexpr std::uint64_t kBootstrap = 0x626f6f74ULL;     // "boot"
inline constexpr std::uint64_t kSelfTest = 0x73656c66ULL;      // "self"
inline constexpr std::uint64_t kCoupling = 0x636f7570ULL;      // "coup"
inline constexpr std::uint64_t kDecomposition = 0x6465636fULL; // "deco"
inline constexpr std::uint64_t kMoment = 0x6d6f6dULL;          // "mom"
inline constexpr std::uint64_t kTransition = 0x7472616eULL;    // "tran"

// Human-readable record of the scheme, embedded in experiment manifests so a
// single replicate can be replayed from the manifest alone.
inline constexpr const char* kSchemeDescription =
    "streams: xoshiro256** seeded by h=mix64(master); h=mix64(h^mix64(x)) per path element "
    "(mix64 = splitmix64 finalizer). paths: reference draw i at grid index ni -> "
    "(seed, 'ref', ni, i); dataset r at ni -> (seed, 'data', ni, r); bootstrap replicate b "
    "for dataset r at ni -> (seed, 'boot', ni, r) then ('weight', b); observation scores "
    "within a dataset stream -> ('score').";

}  // namespace covop::seeds
