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
#include <random>

#include <qostbc/channel.hpp>
#include <qostbc/stbc.hpp>

#include "oracles.hpp"

using namespace qostbc;

namespace
{
cplx cgauss(Engine &rng, double var = 1.0)
{
    std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
    const double re = g(rng);
    return {re, g(rng)};
}

SymbolBlock random_block(Engine &rng)
{
    SymbolBlock b;
    for (auto &x : b.x)
        x = cgauss(rng);
    return b;
}

SymbolBlock random_points(Engine &rng, const Constellation &c, std::array<std::size_t, 4> *idx = nullptr)
{
    SymbolBlock b;
    for (std::size_t k = 0; k < 4; ++k)
    {
        const auto i = static_cast<std::size_t>(uniform_below(rng, c.size()));
        b.x[k] = c.points[i];
        if (idx)
            (*idx)[k] = i;
    }
    return b;
}

ReceivedBlock noisy_receive(const SymbolBlock &b, const PathGains &g, double noise_var, Engine &rng)
{
    auto r = propagate(encode_block(b), g);
    for (auto &s : r.samples)
        s += cgauss(rng, noise_var);
    return r;
}

std::array<cplx, 4> as_array(const std::vector<cplx> &v) { return {v[0], v[1], v[2], v[3]}; }
} // namespace

TEST(EncodeBlock, RowsAsPrinted)
{
    const SymbolBlock b{{cplx{1, 2}, cplx{3, 4}, cplx{5, 6}, cplx{7, 8}}};
    const auto c = encode_block(b);
    const auto &[x1, x2, x3, x4] = b.x;
    EXPECT_EQ(c[0], (std::array<cplx, 4>{x1, x2, x3, x4}));
    EXPECT_EQ(c[1], (std::array<cplx, 4>{-std::conj(x2), std::conj(x1), -std::conj(x4), std::conj(x3)}));
    EXPECT_EQ(c[2], (std::array<cplx, 4>{-std::conj(x3), -std::conj(x4), std::conj(x1), std::conj(x2)}));
    EXPECT_EQ(c[3], (std::array<cplx, 4>{x4, -x3, -x2, x1}));
}

TEST(EncodeBlock, RealSymbolsGiveSignMatrix)
{
    const auto c = encode_block(SymbolBlock{{1.0, 1.0, 1.0, 1.0}});
    for (const auto &row : c)
        for (auto v : row)
        {
            EXPECT_EQ(v.imag(), 0.0);
            EXPECT_EQ(std::abs(v.real()), 1.0);
        }
}

TEST(EncodeBlock, GramStructure)
{
    Engine rng{1};
    for (int trial = 0; trial < 1000; ++trial)
    {
        const auto b = random_block(rng);
        const auto c = encode_block(b);
        const auto expected = oracle::gram_expected(b.x);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
            {
                cplx g{};
                for (int t = 0; t < 4; ++t)
                    g += std::conj(c[t][i]) * c[t][j];
                EXPECT_NEAR(std::abs(g - expected[i][j]), 0.0, 1e-12);
            }
    }
}

TEST(FullMetric, ZeroForTransmittedBlockWithoutNoise)
{
    Engine rng{2};
    const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
    const auto b = random_block(rng);
    EXPECT_NEAR(full_metric(propagate(encode_block(b), g), g, b), 0.0, 1e-24);
}

TEST(FullMetric, ZeroGainsGiveReceivedEnergy)
{
    Engine rng{3};
    PathGains g;
    ReceivedBlock r;
    double energy = 0.0;
    for (auto &s : r.samples)
    {
        s = cgauss(rng);
        energy += std::norm(s);
    }
    for (int trial = 0; trial < 10; ++trial)
        EXPECT_NEAR(full_metric(r, g, random_block(rng)), energy, 1e-12);
}

TEST(FullMetric, MatchesExpandedFormula)
{
    Engine rng{4};
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
        ReceivedBlock r;
        for (auto &s : r.samples)
            s = cgauss(rng, 3.0);
        const auto b = random_block(rng);
        EXPECT_NEAR(full_metric(r, g, b), oracle::full_metric_expanded(as_array(r.samples), as_array(g.values), b.x),
                    1e-12);
    }
}

TEST(PairMetrics, SumDiffersFromFullMetricByConstant)
{
    Engine rng{5};
    const auto c = make_constellation(Scheme::QPSK);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
        const auto r = noisy_receive(random_points(rng, c), g, 2.0, rng);
        double received_energy = 0.0;
        for (auto s : r.samples)
            received_energy += std::norm(s);
        double lo = INFINITY, hi = -INFINITY;
        for (auto x1 : c.points)
            for (auto x2 : c.points)
                for (auto x3 : c.points)
                    for (auto x4 : c.points)
                    {
                        const double d = pair_metric_f14(r, g, x1, x4) + pair_metric_f23(r, g, x2, x3) -
                                         full_metric(r, g, SymbolBlock{{x1, x2, x3, x4}});
                        lo = std::min(lo, d);
                        hi = std::max(hi, d);
                    }
        EXPECT_LT(hi - lo, 1e-9 * received_energy);
        EXPECT_NEAR(lo, -received_energy, 1e-9 * received_energy);
    }
}

TEST(PairMetrics, ConstantAlsoHoldsForTwoReceiveAntennasAndQam16)
{
    Engine rng{6};
    const auto c = make_constellation(Scheme::QAM16);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn, 2);
        auto r = propagate(encode_block(random_points(rng, c)), g);
        for (auto &s : r.samples)
            s += cgauss(rng, 0.5);
        double energy = 0.0;
        for (auto s : r.samples)
            energy += std::norm(s);
        for (int k = 0; k < 200; ++k)
        {
            const auto cand = random_points(rng, c);
            const double d = pair_metric_f14(r, g, cand.x[0], cand.x[3]) + pair_metric_f23(r, g, cand.x[1], cand.x[2]) -
                             full_metric(r, g, cand);
            EXPECT_NEAR(d, -energy, 1e-9 * energy);
        }
    }
}

TEST(PairMetrics, ZeroSignalZeroGains)
{
    const PathGains g;
    const ReceivedBlock r;
    EXPECT_EQ(pair_metric_f14(r, g, {0.3, 0.1}, {-1, 2}), 0.0);
    EXPECT_EQ(pair_metric_f23(r, g, {0.3, 0.1}, {-1, 2}), 0.0);
}

TEST(PairMetrics, NoiselessMinimumAtTruePair)
{
    Engine rng{7};
    const auto c = make_constellation(Scheme::QPSK);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
        std::array<std::size_t, 4> idx{};
        const auto b = random_points(rng, c, &idx);
        const auto r = propagate(encode_block(b), g);
        const double truth = pair_metric_f14(r, g, b.x[0], b.x[3]);
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j)
            {
                if (i != idx[0] || j != idx[3])
                {
                    EXPECT_GT(pair_metric_f14(r, g, c.points[i], c.points[j]), truth);
                }
            }
    }
}

TEST(MlDetect, NoiselessRecoversBlock)
{
    Engine rng{8};
    for (auto scheme : {Scheme::QPSK, Scheme::QAM4, Scheme::PSK16, Scheme::QAM16})
    {
        const auto c = make_constellation(scheme);
        for (int trial = 0; trial < 1000; ++trial)
        {
            const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
            std::array<std::size_t, 4> idx{};
            const auto b = random_points(rng, c, &idx);
            EXPECT_EQ(ml_detect(propagate(encode_block(b), g), g, c).index, idx);
        }
    }
}

TEST(MlDetect, AgreesWithJointSearch)
{
    Engine rng{9};
    const auto c = make_constellation(Scheme::QPSK);
    int ties = 0;
    for (int trial = 0; trial < 3000; ++trial)
    {
        const double noise_var = 4.0 / snr_db_to_linear(5.0 * (trial % 3));
        const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
        const auto r = noisy_receive(random_points(rng, c), g, noise_var, rng);
        const auto fast = ml_detect(r, g, c);
        const auto joint = ml_detect_joint(r, g, c);
        if (fast.index != joint.index)
        {
            ++ties;
            EXPECT_NEAR(full_metric(r, g, SymbolBlock{fast.symbols}), full_metric(r, g, SymbolBlock{joint.symbols}),
                        1e-9);
        }
    }
    EXPECT_LE(ties, 3);
}

TEST(MlDetect, SoftMetricsMatchJointSearchUpToOffset)
{
    Engine rng{10};
    const auto c = make_constellation(Scheme::QAM4);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
        const auto r = noisy_receive(random_points(rng, c), g, 1.0, rng);
        const auto fast = ml_detect(r, g, c);
        const auto joint = ml_detect_joint(r, g, c);
        for (std::size_t k = 0; k < 4; ++k)
        {
            const double offset = joint.symbol_metrics[k][0] - fast.symbol_metrics[k][0];
            for (std::size_t i = 0; i < c.size(); ++i)
                EXPECT_NEAR(joint.symbol_metrics[k][i] - fast.symbol_metrics[k][i], offset, 1e-9);
        }
    }
}

TEST(MlDetect, ZeroGainsTieBreakToFirstPair)
{
    const auto c = make_constellation(Scheme::QPSK);
    ReceivedBlock r;
    r.samples = {{0.3, 1}, {2, -1}, {0, 0.5}, {1, 1}};
    const PathGains g;
    EXPECT_EQ(ml_detect(r, g, c).index, (std::array<std::size_t, 4>{0, 0, 0, 0}));
    EXPECT_EQ(ml_detect_joint(r, g, c).index, (std::array<std::size_t, 4>{0, 0, 0, 0}));
}

TEST(MlDetect, JointRejectsLargeConstellation)
{
    const ReceivedBlock r;
    const PathGains g;
    EXPECT_THROW(ml_detect_joint(r, g, make_constellation(Scheme::QAM16)), std::invalid_argument);
    EXPECT_THROW(ml_detect_joint(r, g, make_constellation(Scheme::PSK16)), std::invalid_argument);
}

TEST(MlDetect, CommonPhaseRotationLeavesDecisionUnchanged)
{
    Engine rng{11};
    const auto c = make_constellation(Scheme::QAM16);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
        auto r = noisy_receive(random_points(rng, c), g, 1.0, rng);
        const auto before = ml_detect(r, g, c);
        const cplx phase = std::polar(1.0, 0.37 * trial);
        for (auto &a : g.values)
            a *= phase;
        for (auto &s : r.samples)
            s *= phase;
        EXPECT_EQ(ml_detect(r, g, c).index, before.index);
    }
}

TEST(MlDetect, Deterministic)
{
    Engine rng{12};
    const auto c = make_constellation(Scheme::PSK16);
    const auto g = draw_path_gains(rng, ChannelMode::RayleighAwgn);
    const auto r = noisy_receive(random_points(rng, c), g, 2.0, rng);
    const auto a = ml_detect(r, g, c), b = ml_detect(r, g, c);
    EXPECT_EQ(a.index, b.index);
    EXPECT_EQ(a.symbol_metrics, b.symbol_metrics);
}

TEST(MlDetect, MismatchedAntennaCountRejected)
{
    const auto g = PathGains{2, std::vector<cplx>(8)};
    const ReceivedBlock r;
    EXPECT_THROW(ml_detect(r, g, make_constellation(Scheme::QPSK)), std::length_error);
}
