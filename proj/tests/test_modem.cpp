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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include <qostbc/modem.hpp>
#include <qostbc/rng.hpp>

using namespace qostbc;

namespace
{
const Scheme kAllSchemes[] = {Scheme::QPSK, Scheme::QAM4, Scheme::PSK16, Scheme::QAM16};

Bits random_bits(Engine &rng, std::size_t n)
{
    Bits b(n);
    for (auto &v : b)
        v = static_cast<std::uint8_t>(rng() & 1u);
    return b;
}

double min_distance(const Constellation &c)
{
    double d = INFINITY;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            d = std::min(d, std::abs(c.points[i] - c.points[j]));
    return d;
}
} // namespace

TEST(Constellation, UnitAverageEnergy)
{
    for (auto s : kAllSchemes)
    {
        const auto c = make_constellation(s);
        double e = 0.0;
        for (auto p : c.points)
            e += std::norm(p);
        EXPECT_NEAR(e / static_cast<double>(c.size()), 1.0, 1e-12) << to_string(s);
        EXPECT_EQ(c.size(), 1u << c.bits_per_symbol);
    }
}

TEST(Constellation, QpskPointsOnDiagonals)
{
    const auto c = make_constellation(Scheme::QPSK);
    ASSERT_EQ(c.size(), 4u);
    for (auto p : c.points)
    {
        EXPECT_NEAR(std::abs(p), 1.0, 1e-15);
        EXPECT_NEAR(std::abs(p.real()), 1.0 / std::numbers::sqrt2, 1e-15);
        EXPECT_NEAR(std::abs(p.imag()), 1.0 / std::numbers::sqrt2, 1e-15);
    }
}

TEST(Constellation, Qam4OnAxes)
{
    const auto c = make_constellation(Scheme::QAM4);
    const std::set<std::pair<double, double>> expected = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::set<std::pair<double, double>> got;
    for (auto p : c.points)
        got.insert({p.real(), p.imag()});
    EXPECT_EQ(got, expected);
}

TEST(Constellation, Psk16OnUnitCircle)
{
    const auto c = make_constellation(Scheme::PSK16);
    ASSERT_EQ(c.size(), 16u);
    for (std::size_t k = 0; k < 16; ++k)
    {
        EXPECT_NEAR(std::abs(c.points[k]), 1.0, 1e-15);
        EXPECT_NEAR(std::abs(c.points[k] - std::polar(1.0, 2.0 * std::numbers::pi * k / 16.0)), 0.0, 1e-15);
    }
}

TEST(Constellation, Qam16ScaledSquareLattice)
{
    const auto c = make_constellation(Scheme::QAM16);
    std::set<std::pair<int, int>> lattice;
    for (auto p : c.points)
    {
        const double re = p.real() * std::sqrt(10.0), im = p.imag() * std::sqrt(10.0);
        EXPECT_NEAR(re, std::round(re), 1e-12);
        EXPECT_NEAR(im, std::round(im), 1e-12);
        lattice.insert({int(std::lround(re)), int(std::lround(im))});
    }
    std::set<std::pair<int, int>> expected;
    for (int i : {-3, -1, 1, 3})
        for (int q : {-3, -1, 1, 3})
            expected.insert({i, q});
    EXPECT_EQ(lattice, expected);
}

TEST(Constellation, LabelsAreBijective)
{
    for (auto s : kAllSchemes)
    {
        const auto c = make_constellation(s);
        std::set<unsigned> labels(c.labels.begin(), c.labels.end());
        EXPECT_EQ(labels.size(), c.size());
        EXPECT_EQ(*labels.rbegin(), c.size() - 1);
    }
}

TEST(Constellation, GrayAdjacency)
{
    for (auto s : kAllSchemes)
    {
        const auto c = make_constellation(s);
        const double dmin = min_distance(c);
        int neighbours = 0;
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = i + 1; j < c.size(); ++j)
                if (std::abs(c.points[i] - c.points[j]) < dmin * (1.0 + 1e-9))
                {
                    ++neighbours;
                    EXPECT_EQ(std::popcount(c.labels[i] ^ c.labels[j]), 1) << to_string(s) << " " << i << "," << j;
                }
        EXPECT_GT(neighbours, 0);
    }
}

TEST(MapBits, ZeroBitsQam16)
{
    const auto c = make_constellation(Scheme::QAM16);
    const auto sym = map_bits(Bits(8, 0), c);
    ASSERT_EQ(sym.size(), 2u);
    EXPECT_EQ(sym[0], c.points[c.index_of_label(0)]);
    EXPECT_EQ(sym[1], sym[0]);
}

TEST(MapBits, AllLabelsCoverConstellation)
{
    const auto c = make_constellation(Scheme::QAM16);
    Bits bits;
    for (unsigned label = 0; label < 16; ++label)
        for (int b = 3; b >= 0; --b)
            bits.push_back((label >> b) & 1u);
    const auto sym = map_bits(bits, c);
    std::set<std::pair<double, double>> distinct;
    for (auto p : sym)
        distinct.insert({p.real(), p.imag()});
    EXPECT_EQ(distinct.size(), 16u);
}

TEST(MapBits, RejectsPartialSymbol)
{
    EXPECT_THROW(map_bits(Bits(7, 0), make_constellation(Scheme::QAM16)), std::length_error);
    EXPECT_THROW(map_bits(Bits(3, 0), make_constellation(Scheme::QPSK)), std::length_error);
}

TEST(MapBits, RoundTripProperty)
{
    Engine rng{7};
    for (auto s : kAllSchemes)
    {
        const auto c = make_constellation(s);
        for (int trial = 0; trial < 200; ++trial)
        {
            const std::size_t n = c.bits_per_symbol * (1 + uniform_below(rng, 64));
            const auto bits = random_bits(rng, n);
            EXPECT_EQ(demap_hard(map_bits(bits, c), c), bits);
        }
    }
}

TEST(DemapHard, ExactPointsReturnOwnLabels)
{
    for (auto s : kAllSchemes)
    {
        const auto c = make_constellation(s);
        for (std::size_t i = 0; i < c.size(); ++i)
        {
            const auto bits = demap_hard(std::span<const cplx>(&c.points[i], 1), c);
            unsigned label = 0;
            for (auto b : bits)
                label = (label << 1) | b;
            EXPECT_EQ(label, c.labels[i]);
        }
    }
}

TEST(DemapHard, PerturbationInsideVoronoiCell)
{
    Engine rng{11};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto s : kAllSchemes)
    {
        const auto c = make_constellation(s);
        const double radius = 0.499 * min_distance(c);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (int t = 0; t < 20; ++t)
            {
                const cplx y = c.points[i] + std::polar(radius * u(rng), 2.0 * std::numbers::pi * u(rng));
                EXPECT_EQ(nearest_point(y, c), i);
            }
    }
}

TEST(DemapHard, MidpointTieGoesToLowerIndex)
{
    const auto c = make_constellation(Scheme::QPSK);
    // Points 0 and 1 differ only in the sign of Q, so they are adjacent.
    const cplx mid = 0.5 * (c.points[0] + c.points[1]);
    EXPECT_EQ(nearest_point(mid, c), 0u);
    const cplx mid23 = 0.5 * (c.points[2] + c.points[3]);
    EXPECT_EQ(nearest_point(mid23, c), 2u);
}

TEST(DemapSoft, HardModeMagnitude)
{
    const auto c = make_constellation(Scheme::QPSK);
    // Label 01: first bit 0, second bit 1.
    const SymbolSoftInput in{c.index_of_label(0b01), {}};
    const auto llr = demap_soft(std::span(&in, 1), c, 1.0, DemapMode::Hard);
    ASSERT_EQ(llr.size(), 2u);
    EXPECT_DOUBLE_EQ(llr[0], 4.0);
    EXPECT_DOUBLE_EQ(llr[1], -4.0);
}

TEST(DemapSoft, MaxLogToyCases)
{
    const Constellation bpsk{Scheme::QPSK, {{1.0, 0.0}, {-1.0, 0.0}}, {0, 1}, 1};
    const std::vector<double> unequal = {1.0, 3.0};
    const std::vector<double> equal = {2.5, 2.5};
    const SymbolSoftInput a{0, unequal};
    const SymbolSoftInput b{0, equal};
    EXPECT_DOUBLE_EQ(demap_soft(std::span(&a, 1), bpsk, 1.0, DemapMode::MaxLog)[0], 2.0);
    EXPECT_DOUBLE_EQ(demap_soft(std::span(&b, 1), bpsk, 1.0, DemapMode::MaxLog)[0], 0.0);
}

TEST(DemapSoft, UnknownModeRejected)
{
    const auto c = make_constellation(Scheme::QPSK);
    const SymbolSoftInput in{0, {}};
    EXPECT_THROW(demap_soft(std::span(&in, 1), c, 1.0, static_cast<DemapMode>(7)), std::invalid_argument);
}

TEST(DemapSoft, ZeroNoiseStaysFinite)
{
    const auto c = make_constellation(Scheme::QPSK);
    const std::vector<double> m = {0.0, 1.0, 2.0, 3.0};
    const SymbolSoftInput in{0, m};
    for (auto mode : {DemapMode::Hard, DemapMode::MaxLog})
        for (double l : demap_soft(std::span(&in, 1), c, 0.0, mode))
        {
            EXPECT_TRUE(std::isfinite(l));
            EXPECT_EQ(std::abs(l), kMaxLlr);
        }
}

TEST(DemapSoft, MaxLogSignAgreesWithHardDecision)
{
    Engine rng{3};
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (auto s : kAllSchemes)
    {
        const auto c = make_constellation(s);
        for (int trial = 0; trial < 500; ++trial)
        {
            std::vector<double> metrics(c.size());
            for (auto &m : metrics)
                m = u(rng);
            const auto best = static_cast<std::size_t>(std::min_element(metrics.begin(), metrics.end()) - metrics.begin());
            const SymbolSoftInput in{best, metrics};
            const auto llr = demap_soft(std::span(&in, 1), c, 0.7, DemapMode::MaxLog);
            for (unsigned b = 0; b < c.bits_per_symbol; ++b)
            {
                if (llr[b] == 0.0)
                    continue;
                EXPECT_EQ(llr[b] < 0.0, c.label_bit(best, b) == 1u);
            }
        }
    }
}
