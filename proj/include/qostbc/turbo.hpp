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

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "modem.hpp"
#include "rng.hpp"

namespace qostbc
{

// Octal generator pair of a recursive systematic convolutional code, written
// with the most significant bit as the D^0 coefficient: 07 = 1 + D + D^2.
struct Generator
{
    unsigned feedback = 07;
    unsigned forward = 05;

    unsigned memory() const
    {
        if (feedback == 0 || (feedback & 1u) == 0)
            throw std::invalid_argument("feedback polynomial must have a D^memory term");
        return static_cast<unsigned>(std::bit_width(feedback)) - 1;
    }
};

// State-transition tables of an RSC encoder. State bit i-1 holds the
// register value a_{k-i}, so bit 0 is the most recent one.
class RscTrellis
{
public:
    explicit RscTrellis(Generator g = {}) : memory_(g.memory())
    {
        if (static_cast<unsigned>(std::bit_width(g.forward)) > memory_ + 1)
            throw std::invalid_argument("forward polynomial degree exceeds the feedback memory");
        const unsigned n = num_states();
        next_.resize(2 * n);
        parity_.resize(2 * n);
        tail_input_.resize(n);
        for (unsigned s = 0; s < n; ++s)
        {
            unsigned feedback = 0;
            unsigned forward = 0;
            for (unsigned i = 1; i <= memory_; ++i)
            {
                const unsigned reg = (s >> (i - 1)) & 1u;
                feedback ^= reg & coefficient(g.feedback, i);
                forward ^= reg & coefficient(g.forward, i);
            }
            tail_input_[s] = static_cast<std::uint8_t>(feedback);
            for (unsigned u = 0; u < 2; ++u)
            {
                const unsigned a = u ^ feedback;
                next_[2 * s + u] = ((s << 1) | a) & (n - 1);
                parity_[2 * s + u] = static_cast<std::uint8_t>((a & coefficient(g.forward, 0)) ^ forward);
            }
        }
    }

    unsigned memory() const noexcept { return memory_; }
    unsigned num_states() const noexcept { return 1u << memory_; }
    unsigned next(unsigned state, unsigned input) const noexcept { return next_[2 * state + input]; }
    std::uint8_t parity(unsigned state, unsigned input) const noexcept { return parity_[2 * state + input]; }
    // Input that feeds a zero into the register, i.e. moves toward state 0.
    std::uint8_t tail_input(unsigned state) const noexcept { return tail_input_[state]; }

private:
    // Coefficient of D^i in an octal polynomial of degree memory_.
    unsigned coefficient(unsigned poly, unsigned i) const noexcept { return (poly >> (memory_ - i)) & 1u; }

    unsigned memory_;
    std::vector<unsigned> next_;
    std::vector<std::uint8_t> parity_;
    std::vector<std::uint8_t> tail_input_;
};

struct RscOutput
{
    Bits parity;
    // memory() pairs (tail input, tail parity) that return the encoder to state 0.
    Bits tail;
};

inline RscOutput rsc_encode(std::span<const std::uint8_t> bits, const RscTrellis &trellis)
{
    if (bits.empty())
        throw std::invalid_argument("cannot encode an empty frame");
    RscOutput out;
    out.parity.reserve(bits.size());
    unsigned state = 0;
    for (const auto b : bits)
    {
        const unsigned u = b & 1u;
        out.parity.push_back(trellis.parity(state, u));
        state = trellis.next(state, u);
    }
    for (unsigned i = 0; i < trellis.memory(); ++i)
    {
        const unsigned u = trellis.tail_input(state);
        out.tail.push_back(static_cast<std::uint8_t>(u));
        out.tail.push_back(trellis.parity(state, u));
        state = trellis.next(state, u);
    }
    return out;
}

inline RscOutput rsc_encode(std::span<const std::uint8_t> bits, Generator g = {})
{
    return rsc_encode(bits, RscTrellis{g});
}

template <typename T>
std::vector<T> permute(std::span<const T> in, std::span<const std::size_t> perm)
{
    if (in.size() != perm.size())
        throw std::length_error("permutation length mismatch");
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
        out[i] = in[perm[i]];
    return out;
}

template <typename T>
std::vector<T> unpermute(std::span<const T> in, std::span<const std::size_t> perm)
{
    if (in.size() != perm.size())
        throw std::length_error("permutation length mismatch");
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
        out[perm[i]] = in[i];
    return out;
}

// ---------------------------------------------------------------------------
// Log-MAP (BCJR) constituent decoder
// ---------------------------------------------------------------------------

namespace detail
{
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Jacobian logarithm ln(e^a + e^b).
inline double max_star(double a, double b) noexcept
{
    if (a == kNegInf)
        return b;
    if (b == kNegInf)
        return a;
    const double d = std::abs(a - b);
    // ln(1 + e^-d) < 5e-18 here.
    if (d > 40.0)
        return std::max(a, b);
    return std::max(a, b) + std::log1p(std::exp(-d));
}
} // namespace detail

struct BcjrResult
{
    LlrFrame posterior;
    LlrFrame extrinsic;
};

// Exact Log-MAP over a terminated trellis.
//
// `apriori` has one entry per information bit (K). `sys` and `par` carry the
// channel LLRs of the systematic and parity streams; they are either K long
// (tail treated as unobserved) or K + memory long, where the last entries are
// the tail inputs and tail parities. The trellis starts and ends in state 0.
//
// posterior = apriori + sys + extrinsic holds for every information bit.
inline BcjrResult bcjr_decode(std::span<const double> sys, std::span<const double> par,
                              std::span<const double> apriori, const RscTrellis &trellis)
{
    using detail::kNegInf;
    using detail::max_star;

    const std::size_t k_info = apriori.size();
    const std::size_t nu = trellis.memory();
    if (k_info == 0)
        throw std::invalid_argument("cannot decode an empty frame");
    if (sys.size() != par.size() || (sys.size() != k_info && sys.size() != k_info + nu))
        throw std::length_error("bcjr_decode: systematic/parity/apriori lengths are inconsistent");

    const std::size_t steps = k_info + nu;
    const unsigned ns = trellis.num_states();

    // Branch metric in symmetric form: half the sum of +-LLR over the branch's
    // input and parity bits (+ for 0). Stored per step as [u][p]; branches a
    // tail step cannot take are marked with -inf.
    std::vector<std::array<double, 4>> gamma(steps);
    for (std::size_t k = 0; k < steps; ++k)
    {
        const double lu = (k < sys.size() ? sys[k] : 0.0) + (k < k_info ? apriori[k] : 0.0);
        const double lp = k < par.size() ? par[k] : 0.0;
        gamma[k] = {0.5 * (lu + lp), 0.5 * (lu - lp), 0.5 * (-lu + lp), 0.5 * (-lu - lp)};
    }
    const auto branch = [&](std::size_t k, unsigned s, unsigned u) {
        if (k >= k_info && u != trellis.tail_input(s))
            return kNegInf;
        return gamma[k][2 * u + trellis.parity(s, u)];
    };

    std::vector<double> alpha((steps + 1) * ns, kNegInf);
    std::vector<double> beta((steps + 1) * ns, kNegInf);
    alpha[0] = 0.0;
    beta[steps * ns] = 0.0;

    for (std::size_t k = 0; k < steps; ++k)
    {
        const double *a = &alpha[k * ns];
        double *an = &alpha[(k + 1) * ns];
        for (unsigned s = 0; s < ns; ++s)
        {
            if (a[s] == kNegInf)
                continue;
            for (unsigned u = 0; u < 2; ++u)
            {
                const double g = branch(k, s, u);
                if (g != kNegInf)
                {
                    const unsigned t = trellis.next(s, u);
                    an[t] = max_star(an[t], a[s] + g);
                }
            }
        }
        const double norm = *std::max_element(an, an + ns);
        for (unsigned s = 0; s < ns; ++s)
            an[s] -= norm;
    }

    for (std::size_t k = steps; k-- > 0;)
    {
        const double *bn = &beta[(k + 1) * ns];
        double *b = &beta[k * ns];
        for (unsigned s = 0; s < ns; ++s)
            for (unsigned u = 0; u < 2; ++u)
            {
                const double g = branch(k, s, u);
                const double next = bn[trellis.next(s, u)];
                if (g != kNegInf && next != kNegInf)
                    b[s] = max_star(b[s], g + next);
            }
        const double norm = *std::max_element(b, b + ns);
        if (norm != kNegInf)
            for (unsigned s = 0; s < ns; ++s)
                b[s] -= norm;
    }

    BcjrResult out;
    out.posterior.resize(k_info);
    out.extrinsic.resize(k_info);
    for (std::size_t k = 0; k < k_info; ++k)
    {
        double num[2] = {kNegInf, kNegInf};
        for (unsigned s = 0; s < ns; ++s)
        {
            const double a = alpha[k * ns + s];
            if (a == kNegInf)
                continue;
            for (unsigned u = 0; u < 2; ++u)
            {
                const double b = beta[(k + 1) * ns + trellis.next(s, u)];
                if (b != kNegInf)
                    num[u] = max_star(num[u], a + gamma[k][2 * u + trellis.parity(s, u)] + b);
            }
        }
        const double post = std::clamp(num[0] - num[1], -kMaxLlr, kMaxLlr);
        out.posterior[k] = post;
        out.extrinsic[k] = post - apriori[k] - sys[k];
    }
    return out;
}

inline BcjrResult bcjr_decode(std::span<const double> sys, std::span<const double> par,
                              std::span<const double> apriori, Generator g = {})
{
    return bcjr_decode(sys, par, apriori, RscTrellis{g});
}

// ---------------------------------------------------------------------------
// Parallel concatenated turbo code
// ---------------------------------------------------------------------------

struct TurboConfig
{
    Generator generators{};
    std::uint64_t interleaver_seed = 0x7E4B0C0DEULL;
    int iterations = 4;

    void validate() const
    {
        if (iterations < 1)
            throw std::invalid_argument("turbo iterations must be >= 1, got " + std::to_string(iterations));
        (void)generators.memory();
    }
};

// Rate-1/3 code word with both constituent encoders terminated.
// Serialized order: systematic | parity1 | parity2 | tail1 | tail2, where each
// tail is memory() pairs (tail input, tail parity).
struct CodedFrame
{
    Bits systematic;
    Bits parity1;
    Bits parity2;
    Bits tail1;
    Bits tail2;

    std::size_t total_length() const noexcept
    {
        return systematic.size() + parity1.size() + parity2.size() + tail1.size() + tail2.size();
    }

    Bits serialize() const
    {
        Bits out;
        out.reserve(total_length());
        for (const Bits *part : {&systematic, &parity1, &parity2, &tail1, &tail2})
            out.insert(out.end(), part->begin(), part->end());
        return out;
    }
};

inline std::size_t turbo_coded_length(std::size_t k_info, unsigned memory) { return 3 * k_info + 4 * memory; }

// Encoder/decoder pair for one frame length. Immutable after construction;
// encode() and decode() may run concurrently.
class TurboCodec
{
public:
    TurboCodec(std::size_t k_info, TurboConfig cfg)
        : k_(k_info), cfg_(cfg), trellis_(cfg.generators),
          perm_(random_permutation(k_info, stream_seed(cfg.interleaver_seed, k_info, StreamTag::TurboInterleaver)))
    {
        if (k_info == 0)
            throw std::invalid_argument("turbo frame length must be >= 1");
        cfg_.validate();
    }

    std::size_t info_length() const noexcept { return k_; }
    std::size_t coded_length() const noexcept { return turbo_coded_length(k_, trellis_.memory()); }
    const TurboConfig &config() const noexcept { return cfg_; }
    const RscTrellis &trellis() const noexcept { return trellis_; }
    const std::vector<std::size_t> &permutation() const noexcept { return perm_; }

    CodedFrame encode(std::span<const std::uint8_t> bits) const
    {
        if (bits.size() != k_)
            throw std::length_error("turbo_encode: expected " + std::to_string(k_) + " bits, got " +
                                    std::to_string(bits.size()));
        CodedFrame cf;
        cf.systematic.assign(bits.begin(), bits.end());
        auto first = rsc_encode(bits, trellis_);
        const Bits shuffled = permute<std::uint8_t>(bits, perm_);
        auto second = rsc_encode(shuffled, trellis_);
        cf.parity1 = std::move(first.parity);
        cf.tail1 = std::move(first.tail);
        cf.parity2 = std::move(second.parity);
        cf.tail2 = std::move(second.tail);
        return cf;
    }

    // Final a-posteriori LLRs of the information bits after `iterations`
    // rounds of extrinsic exchange. Input is in serialized CodedFrame order.
    LlrFrame decode_llr(std::span<const double> coded, int iterations) const
    {
        if (coded.size() != coded_length())
            throw std::length_error("turbo_decode: expected " + std::to_string(coded_length()) + " LLRs, got " +
                                    std::to_string(coded.size()));
        if (iterations < 1)
            throw std::invalid_argument("turbo iterations must be >= 1");

        const std::size_t nu = trellis_.memory();
        const auto sys = coded.subspan(0, k_);
        const auto par1 = coded.subspan(k_, k_);
        const auto par2 = coded.subspan(2 * k_, k_);
        const auto tail1 = coded.subspan(3 * k_, 2 * nu);
        const auto tail2 = coded.subspan(3 * k_ + 2 * nu, 2 * nu);

        // Constituent inputs with their tails appended.
        std::vector<double> sys1(sys.begin(), sys.end());
        std::vector<double> p1(par1.begin(), par1.end());
        std::vector<double> sys2 = permute<double>(sys, perm_);
        std::vector<double> p2(par2.begin(), par2.end());
        for (std::size_t i = 0; i < nu; ++i)
        {
            sys1.push_back(tail1[2 * i]);
            p1.push_back(tail1[2 * i + 1]);
            sys2.push_back(tail2[2 * i]);
            p2.push_back(tail2[2 * i + 1]);
        }

        std::vector<double> extrinsic2(k_, 0.0);
        LlrFrame posterior;
        for (int it = 0; it < iterations; ++it)
        {
            const auto apriori1 = unpermute<double>(extrinsic2, perm_);
            const auto d1 = bcjr_decode(sys1, p1, apriori1, trellis_);
            const auto apriori2 = permute<double>(d1.extrinsic, perm_);
            auto d2 = bcjr_decode(sys2, p2, apriori2, trellis_);
            extrinsic2 = std::move(d2.extrinsic);
            posterior = unpermute<double>(d2.posterior, perm_);
        }
        return posterior;
    }

    Bits decode(std::span<const double> coded) const { return hard_decisions(decode_llr(coded, cfg_.iterations)); }

private:
    std::size_t k_;
    TurboConfig cfg_;
    RscTrellis trellis_;
    std::vector<std::size_t> perm_;
};

inline CodedFrame turbo_encode(std::span<const std::uint8_t> frame, const TurboConfig &cfg)
{
    return TurboCodec{frame.size(), cfg}.encode(frame);
}

inline Bits turbo_decode(std::span<const double> coded_llrs, const TurboConfig &cfg)
{
    const unsigned nu = cfg.generators.memory();
    if (coded_llrs.size() < 4 * nu + 3 || (coded_llrs.size() - 4 * nu) % 3 != 0)
        throw std::length_error("turbo_decode: " + std::to_string(coded_llrs.size()) +
                                " is not a valid coded length 3K + " + std::to_string(4 * nu));
    return TurboCodec{(coded_llrs.size() - 4 * nu) / 3, cfg}.decode(coded_llrs);
}

// ---------------------------------------------------------------------------
// Channel interleaver
// ---------------------------------------------------------------------------

class ChannelInterleaver
{
public:
    ChannelInterleaver(std::size_t length, std::uint64_t seed)
        : perm_(random_permutation(length, stream_seed(seed, length, StreamTag::ChannelInterleaver)))
    {
    }

    std::size_t length() const noexcept { return perm_.size(); }
    const std::vector<std::size_t> &permutation() const noexcept { return perm_; }

    template <typename T>
    std::vector<T> interleave(std::span<const T> in) const
    {
        return permute<T>(in, perm_);
    }

    template <typename T>
    std::vector<T> deinterleave(std::span<const T> in) const
    {
        return unpermute<T>(in, perm_);
    }

private:
    std::vector<std::size_t> perm_;
};

inline Bits channel_interleave(std::span<const std::uint8_t> bits, std::uint64_t seed)
{
    return ChannelInterleaver{bits.size(), seed}.interleave(bits);
}

inline Bits channel_deinterleave(std::span<const std::uint8_t> bits, std::uint64_t seed)
{
    return ChannelInterleaver{bits.size(), seed}.deinterleave(bits);
}

} // namespace qostbc
