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

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "channel.hpp"
#include "common.hpp"
#include "modem.hpp"

namespace qostbc
{

struct SymbolBlock
{
    std::array<cplx, 4> x{};
};

// Rows are time slots, columns transmit antennas.
using TransmissionMatrix = std::array<std::array<cplx, kTxAntennas>, kBlockSlots>;

//     |  x1    x2    x3    x4  |
// C = | -x2*   x1*  -x4*   x3* |
//     | -x3*  -x4*   x1*   x2* |
//     |  x4   -x3   -x2    x1  |
inline TransmissionMatrix encode_block(const SymbolBlock &b)
{
    const auto &[x1, x2, x3, x4] = b.x;
    return {{
        {x1, x2, x3, x4},
        {-std::conj(x2), std::conj(x1), -std::conj(x4), std::conj(x3)},
        {-std::conj(x3), -std::conj(x4), std::conj(x1), std::conj(x2)},
        {x4, -x3, -x2, x1},
    }};
}

// Samples r(t, m) of one code block for M receive antennas.
struct ReceivedBlock
{
    std::size_t rx_antennas = 1;
    std::vector<cplx> samples = std::vector<cplx>(kBlockSlots);

    cplx operator()(std::size_t t, std::size_t m) const { return samples[m * kBlockSlots + t]; }
    cplx &operator()(std::size_t t, std::size_t m) { return samples[m * kBlockSlots + t]; }
};

// r(t, m) = sum_n alpha(n, m) C(t, n), before noise.
inline ReceivedBlock propagate(const TransmissionMatrix &c, const PathGains &gains)
{
    ReceivedBlock r;
    r.rx_antennas = gains.rx_antennas;
    r.samples.assign(kBlockSlots * gains.rx_antennas, cplx{});
    for (std::size_t m = 0; m < gains.rx_antennas; ++m)
        for (std::size_t t = 0; t < kBlockSlots; ++t)
        {
            cplx acc{};
            for (std::size_t n = 0; n < kTxAntennas; ++n)
                acc += gains(n, m) * c[t][n];
            r(t, m) = acc;
        }
    return r;
}

namespace detail
{
inline void check_dims(const ReceivedBlock &r, const PathGains &gains)
{
    if (r.rx_antennas != gains.rx_antennas || r.samples.size() != kBlockSlots * r.rx_antennas ||
        gains.values.size() != kTxAntennas * gains.rx_antennas)
        throw std::length_error("received block and path gains disagree on receive antennas");
}
} // namespace detail

// Joint ML metric: sum_m sum_t |r(t,m) - sum_n alpha(n,m) C(t,n)|^2.
inline double full_metric(const ReceivedBlock &r, const PathGains &gains, const SymbolBlock &candidate)
{
    detail::check_dims(r, gains);
    const auto c = encode_block(candidate);
    double metric = 0.0;
    for (std::size_t m = 0; m < r.rx_antennas; ++m)
        for (std::size_t t = 0; t < kBlockSlots; ++t)
        {
            cplx s{};
            for (std::size_t n = 0; n < kTxAntennas; ++n)
                s += gains(n, m) * c[t][n];
            metric += std::norm(r(t, m) - s);
        }
    return metric;
}

// A decoupled pair metric in the form
//   f(xa, xb) = energy (|xa|^2 + |xb|^2) + 2 Re{ lin_a xa + lin_b xb + cross xa xb* }
// summed over receive antennas. f14 + f23 equals the joint metric minus
// sum |r|^2, which does not depend on the candidate.
struct PairMetric
{
    double energy = 0.0;
    cplx lin_a{};
    cplx lin_b{};
    cplx cross{};

    double operator()(cplx xa, cplx xb) const noexcept
    {
        return energy * (std::norm(xa) + std::norm(xb)) +
               2.0 * std::real(lin_a * xa + lin_b * xb + cross * xa * std::conj(xb));
    }
};

// Coefficients of f14(x1, x4).
inline PairMetric pair_metric_14(const ReceivedBlock &r, const PathGains &gains)
{
    detail::check_dims(r, gains);
    PairMetric f;
    for (std::size_t m = 0; m < r.rx_antennas; ++m)
    {
        const cplx a1 = gains(0, m), a2 = gains(1, m), a3 = gains(2, m), a4 = gains(3, m);
        const cplx r1 = r(0, m), r2 = r(1, m), r3 = r(2, m), r4 = r(3, m);
        using std::conj;
        f.energy += gains.energy(m);
        f.lin_a += -a1 * conj(r1) - conj(a2) * r2 - conj(a3) * r3 - a4 * conj(r4);
        f.lin_b += -a4 * conj(r1) + conj(a3) * r2 + conj(a2) * r3 - a1 * conj(r4);
        f.cross += a1 * conj(a4) - conj(a2) * a3 - a2 * conj(a3) + conj(a1) * a4;
    }
    return f;
}

// Coefficients of f23(x2, x3).
inline PairMetric pair_metric_23(const ReceivedBlock &r, const PathGains &gains)
{
    detail::check_dims(r, gains);
    PairMetric f;
    for (std::size_t m = 0; m < r.rx_antennas; ++m)
    {
        const cplx a1 = gains(0, m), a2 = gains(1, m), a3 = gains(2, m), a4 = gains(3, m);
        const cplx r1 = r(0, m), r2 = r(1, m), r3 = r(2, m), r4 = r(3, m);
        using std::conj;
        f.energy += gains.energy(m);
        f.lin_a += -a2 * conj(r1) + conj(a1) * r2 - conj(a4) * r3 + a3 * conj(r4);
        f.lin_b += -a3 * conj(r1) - conj(a4) * r2 + conj(a1) * r3 + a2 * conj(r4);
        f.cross += a2 * conj(a3) - conj(a1) * a4 - a1 * conj(a4) + conj(a2) * a3;
    }
    return f;
}

inline double pair_metric_f14(const ReceivedBlock &r, const PathGains &gains, cplx x1, cplx x4)
{
    return pair_metric_14(r, gains)(x1, x4);
}

inline double pair_metric_f23(const ReceivedBlock &r, const PathGains &gains, cplx x2, cplx x3)
{
    return pair_metric_23(r, gains)(x2, x3);
}

struct DetectedBlock
{
    // Point indices of s1..s4 in the constellation.
    std::array<std::size_t, 4> index{};
    std::array<cplx, 4> symbols{};
    // f14 at (s1, s4) and f23 at (s2, s3).
    double metric14 = 0.0;
    double metric23 = 0.0;
    // symbol_metrics[k][i]: smallest metric over hypotheses with x_{k+1} = point i.
    // Offsets are arbitrary but common within a symbol, as needed for max-log LLRs.
    std::array<std::vector<double>, 4> symbol_metrics;
};

namespace detail
{
struct PairDecision
{
    std::size_t a = 0;
    std::size_t b = 0;
    double metric = std::numeric_limits<double>::infinity();
};

// Exhaustive |Omega|^2 search; ties go to the smallest (a, b) in lexicographic order.
inline PairDecision search_pair(const PairMetric &f, const Constellation &c, std::vector<double> &min_a,
                                std::vector<double> &min_b)
{
    const std::size_t q = c.size();
    min_a.assign(q, std::numeric_limits<double>::infinity());
    min_b.assign(q, std::numeric_limits<double>::infinity());
    PairDecision best;
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j)
        {
            const double v = f(c.points[i], c.points[j]);
            if (v < best.metric)
                best = {i, j, v};
            min_a[i] = std::min(min_a[i], v);
            min_b[j] = std::min(min_b[j], v);
        }
    return best;
}
} // namespace detail

// Pairwise-decoupled ML detection: (s1, s4) minimizes f14 and (s2, s3)
// minimizes f23, 2|Omega|^2 metric evaluations per block.
inline DetectedBlock ml_detect(const ReceivedBlock &r, const PathGains &gains, const Constellation &c)
{
    if (c.size() == 0)
        throw std::invalid_argument("empty constellation");
    DetectedBlock d;
    const auto p14 = detail::search_pair(pair_metric_14(r, gains), c, d.symbol_metrics[0], d.symbol_metrics[3]);
    const auto p23 = detail::search_pair(pair_metric_23(r, gains), c, d.symbol_metrics[1], d.symbol_metrics[2]);
    d.index = {p14.a, p23.a, p23.b, p14.b};
    for (std::size_t k = 0; k < 4; ++k)
        d.symbols[k] = c.points[d.index[k]];
    d.metric14 = p14.metric;
    d.metric23 = p23.metric;
    return d;
}

// Largest constellation accepted by the |Omega|^4 joint search.
inline constexpr std::size_t kJointSearchMaxPoints = 8;

// Brute-force joint ML over all |Omega|^4 blocks, same tie rule as ml_detect.
inline DetectedBlock ml_detect_joint(const ReceivedBlock &r, const PathGains &gains, const Constellation &c)
{
    const std::size_t q = c.size();
    if (q == 0)
        throw std::invalid_argument("empty constellation");
    if (q > kJointSearchMaxPoints)
        throw std::invalid_argument("constellation too large for joint ML search: " + std::to_string(q) +
                                    " points (max " + std::to_string(kJointSearchMaxPoints) + ")");
    DetectedBlock d;
    for (auto &v : d.symbol_metrics)
        v.assign(q, std::numeric_limits<double>::infinity());
    double best = std::numeric_limits<double>::infinity();
    std::array<std::size_t, 4> idx{};
    for (idx[0] = 0; idx[0] < q; ++idx[0])
        for (idx[1] = 0; idx[1] < q; ++idx[1])
            for (idx[2] = 0; idx[2] < q; ++idx[2])
                for (idx[3] = 0; idx[3] < q; ++idx[3])
                {
                    const SymbolBlock cand{{c.points[idx[0]], c.points[idx[1]], c.points[idx[2]], c.points[idx[3]]}};
                    const double v = full_metric(r, gains, cand);
                    if (v < best)
                    {
                        best = v;
                        d.index = idx;
                    }
                    for (std::size_t k = 0; k < 4; ++k)
                        d.symbol_metrics[k][idx[k]] = std::min(d.symbol_metrics[k][idx[k]], v);
                }
    for (std::size_t k = 0; k < 4; ++k)
        d.symbols[k] = c.points[d.index[k]];
    d.metric14 = pair_metric_f14(r, gains, d.symbols[0], d.symbols[3]);
    d.metric23 = pair_metric_f23(r, gains, d.symbols[1], d.symbols[2]);
    return d;
}

} // namespace qostbc
