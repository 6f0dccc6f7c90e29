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

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace qostbc
{

enum class ChannelMode
{
    // i.i.d. CN(0,1) gains on all four transmit antennas.
    RayleighAwgn,
    // Gains fixed to (1,0,0,0); closed-form AWGN calibration.
    AwgnOnly,
    // Gains (h,0,0,0) with h ~ CN(0,1); single-antenna Rayleigh reference.
    RayleighSingle,
};

inline std::string_view to_string(ChannelMode m)
{
    switch (m)
    {
    case ChannelMode::RayleighAwgn: return "rayleigh";
    case ChannelMode::AwgnOnly: return "awgn";
    case ChannelMode::RayleighSingle: return "rayleigh1x1";
    }
    throw std::invalid_argument("unknown channel mode");
}

inline std::optional<ChannelMode> parse_channel_mode(std::string_view name)
{
    for (auto m : {ChannelMode::RayleighAwgn, ChannelMode::AwgnOnly, ChannelMode::RayleighSingle})
        if (to_string(m) == name)
            return m;
    return std::nullopt;
}

// Flat-fading gains alpha(n, m) from transmit antenna n to receive antenna m.
// Constant over one code block.
struct PathGains
{
    std::size_t rx_antennas = 1;
    std::vector<cplx> values = std::vector<cplx>(kTxAntennas);

    cplx operator()(std::size_t n, std::size_t m) const { return values[m * kTxAntennas + n]; }
    cplx &operator()(std::size_t n, std::size_t m) { return values[m * kTxAntennas + n]; }

    // sum |alpha(n,m)|^2 over transmit antennas for receive antenna m.
    double energy(std::size_t m = 0) const
    {
        double e = 0.0;
        for (std::size_t n = 0; n < kTxAntennas; ++n)
            e += std::norm((*this)(n, m));
        return e;
    }
};

// One complex Gaussian sample with variance `per_dim` in each of I and Q.
inline cplx complex_gaussian(Engine &rng, double per_dim)
{
    std::normal_distribution<double> g{0.0, std::sqrt(per_dim)};
    const double re = g(rng);
    const double im = g(rng);
    return {re, im};
}

inline PathGains draw_path_gains(Engine &rng, ChannelMode mode, std::size_t rx_antennas = 1)
{
    if (rx_antennas == 0)
        throw std::invalid_argument("need at least one receive antenna");
    PathGains g;
    g.rx_antennas = rx_antennas;
    g.values.assign(kTxAntennas * rx_antennas, cplx{});
    for (std::size_t m = 0; m < rx_antennas; ++m)
    {
        switch (mode)
        {
        case ChannelMode::RayleighAwgn:
            for (std::size_t n = 0; n < kTxAntennas; ++n)
                g(n, m) = complex_gaussian(rng, 0.5);
            break;
        case ChannelMode::AwgnOnly:
            g(0, m) = 1.0;
            break;
        case ChannelMode::RayleighSingle:
            g(0, m) = complex_gaussian(rng, 0.5);
            break;
        }
    }
    return g;
}

inline double snr_db_to_linear(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

// Received SNR as the average received power N (with N transmit antennas of
// unit-energy symbols) over the noise power. The noise is complex Gaussian
// with variance N/(2 SNR) per real dimension. An infinite SNR disables noise.
struct NoiseSpec
{
    double snr_linear;
    std::size_t tx_antennas = kTxAntennas;

    static NoiseSpec from_db(double snr_db) { return NoiseSpec{snr_db_to_linear(snr_db)}; }

    void validate() const
    {
        if (!(snr_linear > 0.0))
            throw std::invalid_argument("SNR must be positive (linear), got " + std::to_string(snr_linear));
        if (tx_antennas == 0)
            throw std::invalid_argument("need at least one transmit antenna");
    }

    bool noiseless() const noexcept { return std::isinf(snr_linear); }
    double per_dimension_variance() const noexcept
    {
        return noiseless() ? 0.0 : static_cast<double>(tx_antennas) / (2.0 * snr_linear);
    }
    // E|n|^2
    double complex_variance() const noexcept { return 2.0 * per_dimension_variance(); }
};

inline void add_awgn_inplace(std::span<cplx> samples, const NoiseSpec &spec, Engine &rng)
{
    spec.validate();
    if (spec.noiseless())
        return;
    const double per_dim = spec.per_dimension_variance();
    for (auto &s : samples)
        s += complex_gaussian(rng, per_dim);
}

inline std::vector<cplx> add_awgn(std::span<const cplx> samples, const NoiseSpec &spec, Engine &rng)
{
    std::vector<cplx> out(samples.begin(), samples.end());
    add_awgn_inplace(out, spec, rng);
    return out;
}

// Mean received energy per sample, sum_n E|alpha_n|^2, for a channel mode.
inline double mean_received_energy(ChannelMode mode)
{
    return mode == ChannelMode::RayleighAwgn ? static_cast<double>(kTxAntennas) : 1.0;
}

// Eb/N0 seen by uncoded symbols of `bits_per_symbol` bits at the given
// received SNR. Only used to anchor calibration against textbook curves.
inline double ebn0_db_from_snr_db(double snr_db, unsigned bits_per_symbol, ChannelMode mode)
{
    // N0 = N / SNR, Es = mean received energy, Eb = Es / bits_per_symbol.
    const double ratio = mean_received_energy(mode) / (static_cast<double>(kTxAntennas) * bits_per_symbol);
    return snr_db + 10.0 * std::log10(ratio);
}

inline double snr_db_from_ebn0_db(double ebn0_db, unsigned bits_per_symbol, ChannelMode mode)
{
    return ebn0_db - (ebn0_db_from_snr_db(0.0, bits_per_symbol, mode));
}

} // namespace qostbc
