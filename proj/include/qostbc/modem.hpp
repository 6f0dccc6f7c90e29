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
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"

namespace qostbc
{

enum class Scheme
{
    QPSK,
    QAM4,
    PSK16,
    QAM16,
};

inline std::string_view to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::QPSK: return "qpsk";
    case Scheme::QAM4: return "qam4";
    case Scheme::PSK16: return "psk16";
    case Scheme::QAM16: return "qam16";
    }
    throw std::invalid_argument("unknown modulation scheme");
}

inline std::optional<Scheme> parse_scheme(std::string_view name)
{
    for (auto s : {Scheme::QPSK, Scheme::QAM4, Scheme::PSK16, Scheme::QAM16})
        if (to_string(s) == name)
            return s;
    return std::nullopt;
}

// A unit-average-energy constellation with Gray labels.
// labels[i] is the label of points[i], read MSB first: the first bit of a
// group of bits_per_symbol input bits is the label's most significant bit.
struct Constellation
{
    Scheme scheme;
    std::vector<cplx> points;
    std::vector<unsigned> labels;
    unsigned bits_per_symbol;

    std::size_t size() const noexcept { return points.size(); }

    // Bit `b` (0 = first/most significant) of the label of point `index`.
    unsigned label_bit(std::size_t index, unsigned b) const noexcept
    {
        return (labels[index] >> (bits_per_symbol - 1 - b)) & 1u;
    }

    std::size_t index_of_label(unsigned label) const
    {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label)
                return i;
        throw std::out_of_range("label not in constellation");
    }
};

namespace detail
{
constexpr unsigned gray(unsigned k) noexcept { return k ^ (k >> 1); }
} // namespace detail

// Label tables (index, label, point):
//   QPSK  : index == label; first bit selects the sign of I, second the sign
//           of Q (0 -> +). Points (+-1 +-j)/sqrt(2).
//   QAM4  : index k at angle k*pi/2 (1, j, -1, -j), label gray(k).
//   PSK16 : index k at angle 2*pi*k/16, label gray(k).
//   QAM16 : index == label; first two bits Gray-select the I level, last two
//           the Q level, levels {-3,-1,+1,+3} <- {00,01,11,10}, scaled 1/sqrt(10).
inline Constellation make_constellation(Scheme scheme)
{
    Constellation c{scheme, {}, {}, 0};
    switch (scheme)
    {
    case Scheme::QPSK:
    {
        c.bits_per_symbol = 2;
        const double a = 1.0 / std::numbers::sqrt2;
        for (unsigned label = 0; label < 4; ++label)
        {
            const double re = (label & 2u) ? -a : a;
            const double im = (label & 1u) ? -a : a;
            c.points.emplace_back(re, im);
            c.labels.push_back(label);
        }
        break;
    }
    case Scheme::QAM4:
    {
        c.bits_per_symbol = 2;
        const cplx axes[] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
        for (unsigned k = 0; k < 4; ++k)
        {
            c.points.push_back(axes[k]);
            c.labels.push_back(detail::gray(k));
        }
        break;
    }
    case Scheme::PSK16:
    {
        c.bits_per_symbol = 4;
        for (unsigned k = 0; k < 16; ++k)
        {
            c.points.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / 16.0));
            c.labels.push_back(detail::gray(k));
        }
        break;
    }
    case Scheme::QAM16:
    {
        c.bits_per_symbol = 4;
        // Level for a two-bit Gray code 00,01,11,10 -> -3,-1,+1,+3.
        const auto level = [](unsigned two_bits) {
            constexpr double table[4] = {-3.0, -1.0, 3.0, 1.0};
            return table[two_bits];
        };
        const double scale = 1.0 / std::sqrt(10.0);
        for (unsigned label = 0; label < 16; ++label)
        {
            c.points.emplace_back(scale * level(label >> 2), scale * level(label & 3u));
            c.labels.push_back(label);
        }
        break;
    }
    default:
        throw std::invalid_argument("unknown modulation scheme");
    }
    return c;
}

inline std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, const Constellation &c)
{
    if (bits.size() % c.bits_per_symbol != 0)
        throw std::length_error("bit count " + std::to_string(bits.size()) + " is not a multiple of " +
                                std::to_string(c.bits_per_symbol) + " bits per symbol");

    // label -> point index
    std::vector<std::size_t> by_label(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        by_label[c.labels[i]] = i;

    std::vector<cplx> symbols;
    symbols.reserve(bits.size() / c.bits_per_symbol);
    for (std::size_t k = 0; k < bits.size(); k += c.bits_per_symbol)
    {
        unsigned label = 0;
        for (unsigned b = 0; b < c.bits_per_symbol; ++b)
            label = (label << 1) | (bits[k + b] & 1u);
        symbols.push_back(c.points[by_label[label]]);
    }
    return symbols;
}

// Nearest point by Euclidean distance, lowest index on ties.
inline std::size_t nearest_point(cplx y, const Constellation &c) noexcept
{
    std::size_t best = 0;
    double best_d = std::norm(y - c.points[0]);
    for (std::size_t i = 1; i < c.size(); ++i)
    {
        const double d = std::norm(y - c.points[i]);
        if (d < best_d)
        {
            best_d = d;
            best = i;
        }
    }
    return best;
}

inline void append_label_bits(std::size_t index, const Constellation &c, Bits &out)
{
    for (unsigned b = 0; b < c.bits_per_symbol; ++b)
        out.push_back(static_cast<std::uint8_t>(c.label_bit(index, b)));
}

inline Bits demap_hard(std::span<const cplx> symbols, const Constellation &c)
{
    Bits bits;
    bits.reserve(symbols.size() * c.bits_per_symbol);
    for (const cplx y : symbols)
        append_label_bits(nearest_point(y, c), c, bits);
    return bits;
}

enum class DemapMode
{
    Hard,
    MaxLog,
};

// Detector output for one symbol position. `metrics[i]` is the smallest
// detection metric among all hypotheses in which this symbol equals point i;
// it is only read in MaxLog mode.
struct SymbolSoftInput
{
    std::size_t decided = 0;
    std::span<const double> metrics;
};

// Hard mode emits +-4/noise_var per bit. MaxLog mode emits
// (min metric over bit=1 - min metric over bit=0) / noise_var, where
// noise_var is the complex noise variance E|n|^2. LLRs are clamped to +-kMaxLlr.
inline LlrFrame demap_soft(std::span<const SymbolSoftInput> symbols, const Constellation &c, double noise_var,
                           DemapMode mode)
{
    if (!(noise_var >= 0.0))
        throw std::invalid_argument("noise variance must be non-negative");
    if (mode != DemapMode::Hard && mode != DemapMode::MaxLog)
        throw std::invalid_argument("unknown demapping mode");

    const auto scaled = [noise_var](double gap) {
        if (gap == 0.0)
            return 0.0;
        const double v = noise_var > 0.0 ? gap / noise_var : std::copysign(kMaxLlr, gap);
        return std::clamp(v, -kMaxLlr, kMaxLlr);
    };

    LlrFrame llr;
    llr.reserve(symbols.size() * c.bits_per_symbol);
    for (const auto &s : symbols)
    {
        if (mode == DemapMode::Hard)
        {
            for (unsigned b = 0; b < c.bits_per_symbol; ++b)
                llr.push_back(scaled(c.label_bit(s.decided, b) ? -4.0 : 4.0));
            continue;
        }
        if (s.metrics.size() != c.size())
            throw std::length_error("soft demapping needs one metric per constellation point");
        for (unsigned b = 0; b < c.bits_per_symbol; ++b)
        {
            double min0 = std::numeric_limits<double>::infinity();
            double min1 = min0;
            for (std::size_t i = 0; i < c.size(); ++i)
            {
                double &slot = c.label_bit(i, b) ? min1 : min0;
                slot = std::min(slot, s.metrics[i]);
            }
            llr.push_back(scaled(min1 - min0));
        }
    }
    return llr;
}

inline Bits hard_decisions(std::span<const double> llr)
{
    Bits bits(llr.size());
    std::transform(llr.begin(), llr.end(), bits.begin(), [](double l) { return static_cast<std::uint8_t>(l < 0.0); });
    return bits;
}

} // namespace qostbc
