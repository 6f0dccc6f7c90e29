// SPDX-License-Identifier: Apache-2.0
//
// qostbc: turbo-coded quasi-orthogonal STBC link-level simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace qostbc
{

// Every random quantity in a simulation is drawn from its own stream, keyed by
// (master seed, index, purpose). No generator is shared between frames, so the
// outcome of a frame does not depend on which thread ran it or in what order.
enum class StreamTag : std::uint64_t
{
    InfoBits = 1,
    PathGains = 2,
    Noise = 3,
    ChannelInterleaver = 4,
    TurboInterleaver = 5,
};

using Engine = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index, StreamTag tag) noexcept
{
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ index);
    return mix64(h ^ (static_cast<std::uint64_t>(tag) << 56));
}

inline Engine make_stream(std::uint64_t master_seed, std::uint64_t index, StreamTag tag)
{
    return Engine{stream_seed(master_seed, index, tag)};
}

// Uniform integer in [0, bound). Rejection sampling, so the result only
// depends on the engine output and not on the standard library's distributions.
inline std::uint64_t uniform_below(Engine &rng, std::uint64_t bound)
{
    const std::uint64_t limit = Engine::max() - (Engine::max() % bound + 1) % bound;
    std::uint64_t v = rng();
    while (v > limit)
        v = rng();
    return v % bound;
}

// Fisher-Yates permutation of 0..n-1 derived from a single seed.
inline std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Engine rng{mix64(seed)};
    for (std::size_t i = n; i > 1; --i)
    {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

} // namespace qostbc
