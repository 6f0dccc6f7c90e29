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
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "common.hpp"
#include "modem.hpp"
#include "rng.hpp"
#include "stbc.hpp"
#include "turbo.hpp"

namespace qostbc
{

enum class Coding
{
    Uncoded,
    Turbo,
};

inline std::string_view to_string(Coding c)
{
    switch (c)
    {
    case Coding::Uncoded: return "uncoded";
    case Coding::Turbo: return "turbo";
    }
    throw std::invalid_argument("unknown coding");
}

inline std::optional<Coding> parse_coding(std::string_view name)
{
    for (auto c : {Coding::Uncoded, Coding::Turbo})
        if (to_string(c) == name)
            return c;
    return std::nullopt;
}

// SNR grid min, min+step, ... up to max (inclusive, with a small slack for
// rounding). Points are computed as min + i*step so they do not drift.
inline std::vector<double> snr_grid(double min_db, double max_db, double step_db)
{
    if (!std::isfinite(min_db) || !std::isfinite(max_db) || !std::isfinite(step_db))
        throw std::invalid_argument("SNR range must be finite");
    if (!(step_db > 0.0))
        throw std::invalid_argument("SNR step must be positive");
    if (max_db < min_db)
        throw std::invalid_argument("SNR max is below SNR min");
    std::vector<double> grid;
    for (std::size_t i = 0;; ++i)
    {
        const double v = min_db + static_cast<double>(i) * step_db;
        if (v > max_db + 1e-9 * step_db)
            break;
        grid.push_back(v);
    }
    return grid;
}

struct SimConfig
{
    std::size_t info_bits = 1022;
    Scheme modulation = Scheme::QAM4;
    Coding coding = Coding::Turbo;
    TurboConfig turbo{};
    // +infinity disables noise for that point.
    std::vector<double> snr_points_db = snr_grid(0.0, 10.0, 1.0);
    std::size_t min_frames = 10;
    std::size_t min_bit_errors = 100;
    std::size_t max_frames = 500;
    std::uint64_t master_seed = 1;
    ChannelMode channel_mode = ChannelMode::RayleighAwgn;
    // Worker threads per BER point; 0 picks the hardware concurrency.
    // Results do not depend on this value.
    unsigned threads = 0;

    void validate() const
    {
        if (info_bits == 0)
            throw std::invalid_argument("frame length must be >= 1 bit");
        if (min_frames == 0)
            throw std::invalid_argument("min_frames must be >= 1");
        if (max_frames < min_frames)
            throw std::invalid_argument("max_frames must be >= min_frames");
        if (snr_points_db.empty())
            throw std::invalid_argument("SNR list is empty");
        for (std::size_t i = 0; i < snr_points_db.size(); ++i)
        {
            const double s = snr_points_db[i];
            if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
                throw std::invalid_argument("SNR points must be finite or +inf (noiseless)");
            if (i > 0 && !(s > snr_points_db[i - 1]))
                throw std::invalid_argument("SNR points must be strictly increasing");
        }
        if (coding == Coding::Turbo)
            turbo.validate();
    }

    int effective_iterations() const noexcept { return coding == Coding::Turbo ? turbo.iterations : 0; }
};

struct BerRecord
{
    double snr_db = 0.0;
    std::size_t frames = 0;
    std::size_t bits_total = 0;
    std::size_t bit_errors = 0;
    // Sum over frames of (errors in frame)^2, for frame-level variance estimates.
    double frame_error_sq = 0.0;

    double ber() const noexcept
    {
        return bits_total == 0 ? 0.0 : static_cast<double>(bit_errors) / static_cast<double>(bits_total);
    }

    // Standard error of ber() treating frames as the independent unit.
    double ber_std_error() const noexcept
    {
        if (frames < 2 || bits_total == 0)
            return 0.0;
        const double n = static_cast<double>(frames);
        const double bits = static_cast<double>(bits_total) / n;
        const double mean = static_cast<double>(bit_errors) / n;
        const double var = std::max(0.0, (frame_error_sq - n * mean * mean) / (n - 1.0));
        return std::sqrt(var / n) / bits;
    }
};

struct BerCurve
{
    SimConfig config;
    std::vector<BerRecord> records;
};

struct FrameResult
{
    Bits tx;
    Bits rx;
    // Coded (or uncoded) bits before padding, and zero bits appended to fill the last block.
    std::size_t channel_bits = 0;
    std::size_t pad_bits = 0;

    std::size_t bit_errors() const
    {
        std::size_t e = 0;
        for (std::size_t i = 0; i < tx.size(); ++i)
            e += tx[i] != rx[i];
        return e;
    }
};

namespace detail
{
// Runs body(i) for i in [0, count) on up to `threads` workers.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)> &body)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                try
                {
                    for (std::size_t i = next++; i < count; i = next++)
                        body(i);
                }
                catch (...)
                {
                    errors[w] = std::current_exception();
                    next = count;
                }
            });
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}
} // namespace detail

// One configured link: turbo encoder, channel interleaver, modulator,
// quasi-orthogonal block code, fading channel and the matching receiver.
// Immutable after construction; run_frame() is safe to call concurrently.
class LinkSimulator
{
public:
    explicit LinkSimulator(SimConfig cfg)
        : cfg_(std::move(cfg)), constellation_(make_constellation(cfg_.modulation))
    {
        cfg_.validate();
        if (cfg_.coding == Coding::Turbo)
            codec_.emplace(cfg_.info_bits, cfg_.turbo);
        channel_bits_ = codec_ ? codec_->coded_length() : cfg_.info_bits;
        const std::size_t granule = constellation_.bits_per_symbol * kBlockSlots;
        pad_bits_ = (granule - channel_bits_ % granule) % granule;
        interleaver_.emplace(channel_bits_, stream_seed(cfg_.master_seed, 0, StreamTag::ChannelInterleaver));
    }

    const SimConfig &config() const noexcept { return cfg_; }
    const Constellation &constellation() const noexcept { return constellation_; }
    std::size_t channel_bits() const noexcept { return channel_bits_; }
    std::size_t pad_bits() const noexcept { return pad_bits_; }
    std::size_t blocks_per_frame() const noexcept
    {
        return (channel_bits_ + pad_bits_) / (constellation_.bits_per_symbol * kBlockSlots);
    }

    FrameResult run_frame(double snr_db, std::uint64_t frame_index) const
    {
        const NoiseSpec noise = NoiseSpec::from_db(snr_db);
        noise.validate();

        FrameResult out;
        out.channel_bits = channel_bits_;
        out.pad_bits = pad_bits_;

        auto bit_rng = make_stream(cfg_.master_seed, frame_index, StreamTag::InfoBits);
        out.tx.resize(cfg_.info_bits);
        for (auto &b : out.tx)
            b = static_cast<std::uint8_t>(bit_rng() >> 63);

        Bits channel = codec_ ? codec_->encode(out.tx).serialize() : out.tx;
        Bits padded = interleaver_->interleave<std::uint8_t>(channel);
        padded.resize(channel_bits_ + pad_bits_, 0);

        const auto symbols = map_bits(padded, constellation_);
        auto gain_rng = make_stream(cfg_.master_seed, frame_index, StreamTag::PathGains);
        auto noise_rng = make_stream(cfg_.master_seed, frame_index, StreamTag::Noise);

        std::vector<DetectedBlock> detected;
        detected.reserve(symbols.size() / kBlockSlots);
        for (std::size_t k = 0; k < symbols.size(); k += kBlockSlots)
        {
            const SymbolBlock block{{symbols[k], symbols[k + 1], symbols[k + 2], symbols[k + 3]}};
            const PathGains gains = draw_path_gains(gain_rng, cfg_.channel_mode);
            ReceivedBlock r = propagate(encode_block(block), gains);
            add_awgn_inplace(r.samples, noise, noise_rng);
            detected.push_back(ml_detect(r, gains, constellation_));
        }

        if (codec_)
        {
            std::vector<SymbolSoftInput> soft;
            soft.reserve(symbols.size());
            for (const auto &d : detected)
                for (std::size_t k = 0; k < 4; ++k)
                    soft.push_back({d.index[k], d.symbol_metrics[k]});
            LlrFrame llr = demap_soft(soft, constellation_, noise.complex_variance(), DemapMode::MaxLog);
            llr.resize(channel_bits_);
            const auto coded = interleaver_->deinterleave<double>(llr);
            out.rx = hard_decisions(codec_->decode_llr(coded, cfg_.turbo.iterations));
        }
        else
        {
            Bits rx;
            rx.reserve(padded.size());
            for (const auto &d : detected)
                for (std::size_t k = 0; k < 4; ++k)
                    append_label_bits(d.index[k], constellation_, rx);
            rx.resize(channel_bits_);
            out.rx = interleaver_->deinterleave<std::uint8_t>(rx);
        }
        return out;
    }

    // Runs frames 0, 1, 2, ... and stops after frame n once n >= min_frames and
    // either bit_errors >= min_bit_errors or n == max_frames. A noiseless point
    // stops at min_frames. Frames are simulated in parallel batches and then
    // accumulated in index order, so the record matches a serial run exactly.
    BerRecord run_ber_point(double snr_db) const
    {
        const bool noiseless = NoiseSpec::from_db(snr_db).noiseless();
        const std::size_t cap = noiseless ? cfg_.min_frames : cfg_.max_frames;
        const unsigned threads = cfg_.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg_.threads;
        const std::size_t batch = std::max<std::size_t>(threads * 4, 8);

        BerRecord rec;
        rec.snr_db = snr_db;
        std::vector<std::size_t> errors;
        while (rec.frames < cap)
        {
            const std::size_t first = rec.frames;
            const std::size_t n = std::min(batch, cap - first);
            errors.assign(n, 0);
            detail::parallel_for(n, threads,
                                 [&](std::size_t i) { errors[i] = run_frame(snr_db, first + i).bit_errors(); });
            for (std::size_t i = 0; i < n; ++i)
            {
                rec.frames += 1;
                rec.bits_total += cfg_.info_bits;
                rec.bit_errors += errors[i];
                rec.frame_error_sq += static_cast<double>(errors[i]) * static_cast<double>(errors[i]);
                if (rec.frames >= cfg_.min_frames && rec.bit_errors >= cfg_.min_bit_errors)
                    return rec;
            }
        }
        return rec;
    }

    BerCurve sweep() const
    {
        BerCurve curve{cfg_, {}};
        for (const double snr : cfg_.snr_points_db)
            curve.records.push_back(run_ber_point(snr));
        return curve;
    }

private:
    SimConfig cfg_;
    Constellation constellation_;
    std::optional<TurboCodec> codec_;
    std::optional<ChannelInterleaver> interleaver_;
    std::size_t channel_bits_ = 0;
    std::size_t pad_bits_ = 0;
};

inline FrameResult run_frame(const SimConfig &cfg, double snr_db, std::uint64_t frame_index)
{
    return LinkSimulator{cfg}.run_frame(snr_db, frame_index);
}

inline BerRecord run_ber_point(const SimConfig &cfg, double snr_db) { return LinkSimulator{cfg}.run_ber_point(snr_db); }

inline BerCurve sweep(const SimConfig &cfg) { return LinkSimulator{cfg}.sweep(); }

// 10 log10(ber_ref / ber_improved)
inline double ber_gain_db(double ber_ref, double ber_improved)
{
    const auto valid = [](double b) { return b > 0.0 && b <= 1.0; };
    if (!valid(ber_ref) || !valid(ber_improved))
        throw std::invalid_argument("BER values must lie in (0, 1]");
    return 10.0 * std::log10(ber_ref / ber_improved);
}

} // namespace qostbc
